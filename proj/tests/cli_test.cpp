#include "zoomsig/cli.hpp"
#include "zoomsig/report.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace zoomsig {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("zoomsig_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string simulate(const std::string& name, const std::string& seed = "5", bool hybrid = false) {
        std::vector<std::string> args{"simulate", "--model", "A:40:10:0.2", "--model", "B:120:20:0.2",
                                      "--n", "400", "--seed", seed, "--out", path(name)};
        if (hybrid) args.push_back("--hybrid");
        const auto r = run(args);
        EXPECT_EQ(r.code, 0) << r.err;
        return path(name);
    }

    fs::path dir_;
};

TEST_F(CliTest, SimulateIsDeterministic) {
    const auto a = simulate("a.jsonl");
    const auto b = simulate("b.jsonl");
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_NE(slurp(a), slurp(simulate("c.jsonl", "6")));
}

TEST_F(CliTest, SimulateFromConfigFile) {
    const fs::path cfg = fs::path(ZOOMSIG_CONFIG_DIR) / "acceptance_sim.json";
    const auto r = run({"simulate", "--config", cfg.string(), "--n", "50", "--out", path("cfg.jsonl")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(path("cfg.jsonl")));
}

TEST_F(CliTest, MissingSeedIsUsageError) {
    EXPECT_EQ(run({"simulate", "--model", "A:10:10", "--n", "5", "--out", path("x.jsonl")}).code, kExitUsage);
    const auto log = simulate("log.jsonl");
    EXPECT_EQ(run({"analyze", "--input", log}).code, kExitUsage);
    EXPECT_EQ(run({"route", "--input", log}).code, kExitUsage);
    EXPECT_EQ(run({"bogus"}).code, kExitUsage);
    EXPECT_EQ(run({}).code, kExitUsage);
}

TEST_F(CliTest, DataErrorsExitTwo) {
    std::ofstream(path("empty.jsonl")) << "\n";
    EXPECT_EQ(run({"analyze", "--input", path("empty.jsonl"), "--seed", "1"}).code, kExitData);
    EXPECT_EQ(run({"analyze", "--input", path("absent.jsonl"), "--seed", "1"}).code, kExitData);
    const auto log = simulate("log.jsonl");
    EXPECT_EQ(run({"analyze", "--input", log, "--seed", "1", "--model-a", "Z"}).code, kExitData);
}

TEST_F(CliTest, BadEdgesAreUsageErrors) {
    const auto log = simulate("log.jsonl");
    EXPECT_EQ(run({"analyze", "--input", log, "--seed", "1", "--buckets", "80,30"}).code, kExitUsage);
    EXPECT_EQ(run({"analyze", "--input", log, "--seed", "1", "--buckets", "a,b"}).code, kExitUsage);
}

TEST_F(CliTest, AnalyzeAndRouteAreByteIdentical) {
    const auto log = simulate("log.jsonl", "5", true);
    for (const char* cmd : {"analyze", "route"}) {
        for (const char* tag : {"1", "2"}) {
            const auto r = run({cmd, "--input", log, "--seed", "9", "--model-a", "A", "--model-b", "B",
                                "--bootstrap-iterations", "300", "--out", path(std::string(cmd) + tag + ".json"),
                                "--markdown", path(std::string(cmd) + tag + ".md")});
            if (std::string(cmd) == "analyze") {
                // analyze has no bootstrap flag
                EXPECT_EQ(r.code, kExitUsage);
                const auto ok = run({cmd, "--input", log, "--seed", "9", "--model-a", "A", "--model-b", "B", "--out",
                                     path(std::string(cmd) + tag + ".json"), "--markdown",
                                     path(std::string(cmd) + tag + ".md")});
                ASSERT_EQ(ok.code, 0) << ok.err;
            } else {
                ASSERT_EQ(r.code, 0) << r.err;
            }
        }
        const std::string c = cmd;
        EXPECT_EQ(slurp(path(c + "1.json")), slurp(path(c + "2.json")));
        EXPECT_EQ(slurp(path(c + "1.md")), slurp(path(c + "2.md")));
    }
}

TEST_F(CliTest, AnalyzeReportContents) {
    const auto log = simulate("log.jsonl");
    const auto r = run({"analyze", "--input", log, "--seed", "3", "--buckets", "30,80,150,250", "--out",
                        path("a.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(path("a.json")));
    EXPECT_EQ(j["schema"], kReportSchema);
    EXPECT_EQ(j["seed"], 3);
    EXPECT_EQ(j["models"]["a"], "A");
    EXPECT_EQ(j["models"]["b"], "B");
    ASSERT_EQ(j["buckets"]["rows"].size(), 5u);
    EXPECT_EQ(j["buckets"]["rows"][0]["bucket"], "< 30");
    EXPECT_EQ(j["buckets"]["rows"][4]["bucket"], ">= 250");
    EXPECT_EQ(j["partitions"]["rows"].size(), 4u);
    EXPECT_EQ(j["inputs"][0]["sha256"].get<std::string>().size(), 64u);
    EXPECT_NE(r.out.find("< 30"), std::string::npos);
}

TEST_F(CliTest, SingleModelAnalyzeOmitsPartitions) {
    ASSERT_EQ(run({"simulate", "--model", "solo:30:10", "--n", "80", "--seed", "2", "--out", path("s.jsonl")}).code,
              0);
    const auto r = run({"analyze", "--input", path("s.jsonl"), "--seed", "1", "--out", path("s.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(path("s.json")));
    EXPECT_TRUE(j["partitions"].contains("omitted"));
    EXPECT_EQ(run({"route", "--input", path("s.jsonl"), "--seed", "1"}).code, kExitData);
}

TEST_F(CliTest, RouteSkipsStageSplitWithoutHybrid) {
    const auto log = simulate("log.jsonl");
    const auto r = run({"route", "--input", log, "--seed", "4", "--bootstrap-iterations", "200", "--out",
                        path("r.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(path("r.json")));
    bool found = false;
    for (const auto& row : j["strategies"]) {
        if (row["strategy"] == "stage-split") {
            found = true;
            EXPECT_TRUE(row.contains("skipped"));
        } else {
            EXPECT_FALSE(row.contains("skipped")) << row.dump();
        }
    }
    EXPECT_TRUE(found);
    EXPECT_NE(r.out.find("stage-split"), std::string::npos);
    EXPECT_EQ(j["confusion"]["N"], 400);
}

TEST_F(CliTest, RouteWithHybridRunsStageSplit) {
    const auto log = simulate("log.jsonl", "5", true);
    const auto r = run({"route", "--input", log, "--seed", "4", "--bootstrap-iterations", "200", "--strategies",
                        "consistency,stage-split", "--out", path("r.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(path("r.json")));
    ASSERT_EQ(j["strategies"].size(), 2u);
    EXPECT_FALSE(j["strategies"][1].contains("skipped"));
    EXPECT_EQ(run({"route", "--input", log, "--seed", "4", "--strategies", "argmax"}).code, kExitUsage);
}

TEST_F(CliTest, ReportRerendersMarkdown) {
    const auto log = simulate("log.jsonl");
    ASSERT_EQ(run({"route", "--input", log, "--seed", "4", "--bootstrap-iterations", "100", "--out", path("r.json"),
                   "--markdown", path("r.md")})
                  .code,
              0);
    const auto r = run({"report", "--input", path("r.json"), "--out", path("again.md")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("r.md")), slurp(path("again.md")));
}

TEST_F(CliTest, ConfigSeedAndFlagOverride) {
    const auto log = simulate("log.jsonl");
    std::ofstream(path("cfg.json")) << json{{"seed", 11}, {"inputs", {log}}, {"bootstrap_iterations", 50}}.dump();
    ASSERT_EQ(run({"route", "--config", path("cfg.json"), "--out", path("c.json")}).code, 0);
    EXPECT_EQ(json::parse(slurp(path("c.json")))["seed"], 11);
    ASSERT_EQ(run({"route", "--config", path("cfg.json"), "--seed", "12", "--out", path("d.json")}).code, 0);
    EXPECT_EQ(json::parse(slurp(path("d.json")))["seed"], 12);
}

TEST_F(CliTest, SimulateSummary) {
    const auto zero = run({"simulate", "--model", "exact:0:0", "--n", "50", "--seed", "1", "--out", path("z.jsonl")});
    ASSERT_EQ(zero.code, 0) << zero.err;
    EXPECT_NE(zero.out.find("exact: accuracy 1.000"), std::string::npos) << zero.out;

    const auto two = run({"simulate", "--model", "A:40:10", "--model", "B:120:20", "--n", "50", "--seed", "1",
                          "--out", path("two.jsonl")});
    ASSERT_EQ(two.code, 0);
    EXPECT_NE(two.out.find("  A: accuracy"), std::string::npos);
    EXPECT_NE(two.out.find("  B: accuracy"), std::string::npos);
}

TEST_F(CliTest, UnwritableOutputIsIoError) {
    const auto r = run({"simulate", "--model", "A:10:10", "--n", "5", "--seed", "1", "--out",
                        path("missing_dir/x.jsonl")});
    EXPECT_EQ(r.code, kExitData);
    EXPECT_NE(r.err.find("cannot write"), std::string::npos);
}

TEST_F(CliTest, AcceptanceConfigDirections) {
    const fs::path cfg = fs::path(ZOOMSIG_CONFIG_DIR) / "acceptance_sim.json";
    ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", path("acc.jsonl")}).code, 0);
    const auto r = run({"analyze", "--input", path("acc.jsonl"), "--seed", "1", "--model-a", "specialist",
                        "--model-b", "generalist", "--out", path("acc.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(path("acc.json")));

    const json& full = j["correlation"][0];
    EXPECT_EQ(full["model"], "specialist");
    EXPECT_GT(full["auc"].get<double>(), 0.5);
    EXPECT_LT(full["spearman_rho"].get<double>(), 0.0);

    const json& buckets = j["buckets"]["rows"];
    EXPECT_GT(buckets.front()["accuracy"].get<double>(), buckets.back()["accuracy"].get<double>());

    double s11 = -1, s00 = -1;
    for (const auto& row : j["partitions"]["rows"]) {
        if (row["partition"] == "S11") s11 = row["mean"].get<double>();
        if (row["partition"] == "S00") s00 = row["mean"].get<double>();
    }
    EXPECT_GE(s11, 0.0);
    EXPECT_LT(s11, s00);

    bool saw_os = false;
    for (const auto& g : j["groups"]) {
        if (g["dimension"] != "os" || g["metric"] != "spearman") continue;
        saw_os = true;
        ASSERT_EQ(g["rows"].size(), 3u);
        for (const auto& row : g["rows"]) EXPECT_LT(row["value"].get<double>(), 0.0) << row.dump();
    }
    EXPECT_TRUE(saw_os);
}

}  // namespace
}  // namespace zoomsig
