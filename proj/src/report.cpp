#include "zoomsig/report.hpp"

#include "zoomsig/error.hpp"
#include "zoomsig/metrics.hpp"
#include "zoomsig/router.hpp"
#include "zoomsig/significance.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace zoomsig {

namespace {

constexpr std::size_t kMaxReportedDiagnostics = 50;

ReportJson opt_json(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

ReportJson finite_json(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

ReportJson header(const char* kind, ReportJson config, std::uint64_t seed, const std::vector<InputDigest>& inputs,
                  const std::vector<Diagnostic>& diagnostics) {
    ReportJson r;
    r["schema"] = kReportSchema;
    r["kind"] = kind;
    r["seed"] = seed;
    r["config"] = std::move(config);
    ReportJson in = ReportJson::array();
    for (const auto& d : inputs) in.push_back({{"path", d.path}, {"sha256", d.sha256}});
    r["inputs"] = std::move(in);

    std::size_t dropped = 0;
    ReportJson items = ReportJson::array();
    for (const auto& d : diagnostics) {
        if (d.dropped) ++dropped;
        if (items.size() < kMaxReportedDiagnostics) {
            items.push_back({{"line", d.line}, {"message", d.message}, {"dropped", d.dropped}});
        }
    }
    r["diagnostics"] = {{"count", diagnostics.size()}, {"dropped", dropped}, {"items", std::move(items)}};
    return r;
}

ReportJson correlation_row(const std::string& model, const char* subset, const std::vector<ScoredSample>& samples) {
    ReportJson row;
    row["model"] = model;
    row["subset"] = subset;
    row["n"] = samples.size();
    std::string note;
    try {
        row["auc"] = auc_lower_score_positive(samples);
    } catch (const Error& e) {
        row["auc"] = nullptr;
        note = e.what();
    }
    try {
        const auto s = consistency_spearman(samples);
        row["spearman_rho"] = s.rho;
        row["p_value"] = s.p_value;
    } catch (const Error& e) {
        row["spearman_rho"] = nullptr;
        row["p_value"] = nullptr;
        if (note.empty()) note = e.what();
    }
    row["note"] = note;
    return row;
}

ReportJson outcome_json(const RoutingOutcome& o) {
    ReportJson row;
    row["strategy"] = o.strategy;
    row["n"] = o.n;
    row["n_correct"] = o.n_correct;
    row["accuracy"] = o.accuracy;
    row["delta_vs_model_a"] = o.delta_vs_model_a;
    row["gains"] = o.gains;
    row["losses"] = o.losses;
    row["eta"] = opt_json(o.eta);
    row["f10"] = opt_json(o.f10);
    row["f01"] = opt_json(o.f01);
    row["disagreement_precision"] = opt_json(o.disagreement_precision);
    return row;
}

// --- markdown -------------------------------------------------------------

std::string cell(const ReportJson& v) {
    if (v.is_null()) return "n/a";
    if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number_float()) return format_sig4(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

class Table {
public:
    explicit Table(std::vector<std::string> headers) : headers_(std::move(headers)) {}
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    void render(std::ostringstream& out) const {
        line(out, headers_);
        out << '|';
        for (std::size_t i = 0; i < headers_.size(); ++i) out << (i == 0 ? " :--- |" : " ---: |");
        out << '\n';
        for (const auto& r : rows_) line(out, r);
        out << '\n';
    }

private:
    static void line(std::ostringstream& out, const std::vector<std::string>& cells) {
        out << '|';
        for (const auto& c : cells) out << ' ' << c << " |";
        out << '\n';
    }

    std::vector<std::string> headers_;
    std::vector<std::vector<std::string>> rows_;
};

void render_header(std::ostringstream& out, const ReportJson& r, const char* title) {
    out << "# " << title << "\n\n";
    out << "- schema: `" << cell(r.at("schema")) << "`\n";
    out << "- seed: " << cell(r.at("seed")) << '\n';
    out << "- model A: `" << cell(r.at("models").at("a")) << "`";
    if (!r.at("models").at("b").get<std::string>().empty()) {
        out << ", model B: `" << cell(r.at("models").at("b")) << "`";
    }
    out << '\n';
    for (const auto& in : r.at("inputs")) {
        out << "- input: `" << cell(in.at("path")) << "` (sha256 `" << cell(in.at("sha256")) << "`)\n";
    }
    const auto& diag = r.at("diagnostics");
    out << "- diagnostics: " << cell(diag.at("count")) << " (" << cell(diag.at("dropped")) << " lines dropped)\n\n";
}

void render_analyze(std::ostringstream& out, const ReportJson& r) {
    render_header(out, r, "Zoom consistency analysis");

    out << "## Correlation with correctness\n\n";
    Table corr({"Model", "Subset", "AUC", "Spearman rho", "p-value", "n"});
    for (const auto& row : r.at("correlation")) {
        corr.add({cell(row.at("model")), cell(row.at("subset")), cell(row.at("auc")), cell(row.at("spearman_rho")),
                  cell(row.at("p_value")), cell(row.at("n"))});
    }
    corr.render(out);

    const auto& split = r.at("split_half");
    out << "## Split-half stability (`" << cell(split.at("model")) << "`)\n\n";
    if (split.contains("note") && !split.at("note").get<std::string>().empty()) {
        out << "Unavailable: " << cell(split.at("note")) << "\n\n";
    } else {
        Table t({"Half", "n", "Spearman rho", "p-value"});
        for (const char* half : {"first", "second"}) {
            const auto& h = split.at(half);
            t.add({half, cell(h.at("n")), cell(h.at("spearman_rho")), cell(h.at("p_value"))});
        }
        t.render(out);
    }

    const auto& buckets = r.at("buckets");
    out << "## Accuracy by consistency bucket (`" << cell(buckets.at("model")) << "`)\n\n";
    Table bt({"Consistency c", "n", "Accuracy"});
    for (const auto& row : buckets.at("rows")) {
        bt.add({cell(row.at("bucket")), cell(row.at("n")), cell(row.at("accuracy"))});
    }
    bt.render(out);

    const auto& parts = r.at("partitions");
    out << "## Model-A consistency by oracle partition\n\n";
    if (parts.contains("omitted")) {
        out << "Omitted: " << cell(parts.at("omitted")) << "\n\n";
    } else {
        Table pt({"Partition", "n", "Mean c", "Median c"});
        for (const auto& row : parts.at("rows")) {
            pt.add({cell(row.at("partition")), cell(row.at("n")), cell(row.at("mean")), cell(row.at("median"))});
        }
        pt.render(out);
    }

    for (const auto& g : r.at("groups")) {
        out << "## " << cell(g.at("metric")) << " by " << cell(g.at("dimension")) << "\n\n";
        if (g.contains("error")) {
            out << "Unavailable: " << cell(g.at("error")) << "\n\n";
            continue;
        }
        Table gt({cell(g.at("dimension")), "n", "Value", "p-value"});
        for (const auto& row : g.at("rows")) {
            gt.add({cell(row.at("label")), cell(row.at("n")), cell(row.at("value")), cell(row.at("p_value"))});
        }
        gt.render(out);
    }
}

void render_route(std::ostringstream& out, const ReportJson& r) {
    render_header(out, r, "Cross-model routing");

    const auto& c = r.at("confusion");
    out << "## Oracle decomposition\n\n";
    Table ct({"Partition", "Samples"});
    for (const char* k : {"n11", "n10", "n01", "n00", "N"}) ct.add({k, cell(c.at(k))});
    ct.render(out);
    Table acc({"Quantity", "Value"});
    for (const char* k : {"accuracy_a", "accuracy_b", "oracle_accuracy"}) acc.add({k, cell(c.at(k))});
    acc.render(out);

    out << "## Routing strategies\n\n";
    Table st({"Method", "Accuracy", "vs A", "Oracle eta", "Gains", "Losses"});
    std::vector<std::pair<std::string, std::string>> skipped;
    for (const auto& row : r.at("strategies")) {
        if (row.contains("skipped")) {
            skipped.emplace_back(cell(row.at("strategy")), cell(row.at("skipped")));
            continue;
        }
        st.add({cell(row.at("strategy")), cell(row.at("accuracy")), cell(row.at("delta_vs_model_a")),
                cell(row.at("eta")), cell(row.at("gains")), cell(row.at("losses"))});
    }
    st.render(out);
    for (const auto& [name, why] : skipped) out << "- skipped `" << name << "`: " << why << '\n';
    if (!skipped.empty()) out << '\n';

    const auto& cond = r.at("routing_condition");
    out << "## Improvement condition (consistency router)\n\n";
    Table ctab({"f10", "f01", "gains term f01*n01", "losses term (1-f10)*n10", "improves"});
    ctab.add({cell(cond.at("f10")), cell(cond.at("f01")), cell(cond.at("gains_term")), cell(cond.at("losses_term")),
              cell(cond.at("improves"))});
    ctab.render(out);

    const auto& d = r.at("disagreement");
    out << "## Disagreement set\n\n";
    if (d.contains("error")) {
        out << "Unavailable: " << cell(d.at("error")) << "\n\n";
    } else {
        Table dt({"Base rate pi", "Required lift", "Precision of B", "B selections", "eta"});
        dt.add({cell(d.at("pi")), cell(d.at("required_lift")), cell(d.at("precision_b")), cell(d.at("b_selections")),
                cell(d.at("eta"))});
        dt.render(out);
    }

    const auto& sig = r.at("significance");
    out << "## Significance (consistency router vs single:A)\n\n";
    Table sg({"Test", "Statistic", "Value"});
    sg.add({"McNemar exact", "b / c", cell(sig.at("mcnemar").at("b")) + " / " + cell(sig.at("mcnemar").at("c"))});
    sg.add({"McNemar exact", "p-value", cell(sig.at("mcnemar").at("p_value"))});
    const auto& bs = sig.at("bootstrap");
    sg.add({"Bootstrap", "iterations", cell(bs.at("iterations"))});
    sg.add({"Bootstrap", "P(improvement > 0)", cell(bs.at("p_improve"))});
    sg.add({"Bootstrap", "mean delta", cell(bs.at("delta_mean"))});
    sg.add({"Bootstrap", "95% CI", "[" + cell(bs.at("ci_low")) + ", " + cell(bs.at("ci_high")) + "]"});
    sg.render(out);

    const auto& pg = r.at("per_group");
    out << "## Router effect by " << cell(pg.at("dimension")) << "\n\n";
    if (pg.contains("error")) {
        out << "Unavailable: " << cell(pg.at("error")) << "\n\n";
    } else {
        Table gt({cell(pg.at("dimension")), "n", "A", "Router", "Delta"});
        for (const auto& row : pg.at("rows")) {
            gt.add({cell(row.at("label")), cell(row.at("n")), cell(row.at("accuracy_a")),
                    cell(row.at("accuracy_router")), cell(row.at("delta"))});
        }
        gt.render(out);
    }
}

}  // namespace

ReportJson to_json(const AnalyzeConfig& cfg) {
    ReportJson j;
    j["inputs"] = cfg.inputs;
    j["model_a"] = cfg.model_a;
    j["model_b"] = cfg.model_b;
    j["seed"] = cfg.seed;
    j["buckets"] = cfg.bucket_edges;
    j["group"] = cfg.group_dimensions;
    return j;
}

ReportJson to_json(const RouteConfig& cfg) {
    ReportJson j;
    j["inputs"] = cfg.inputs;
    j["model_a"] = cfg.model_a;
    j["model_b"] = cfg.model_b;
    j["seed"] = cfg.seed;
    j["strategies"] = cfg.strategies;
    j["bootstrap_iterations"] = cfg.bootstrap_iterations;
    j["group"] = cfg.group_dimension;
    return j;
}

ReportJson build_analyze_report(const PairedDataset& data, const AnalyzeConfig& cfg,
                                const std::vector<InputDigest>& inputs,
                                const std::vector<Diagnostic>& diagnostics) {
    ReportJson r = header("analyze", to_json(cfg), cfg.seed, inputs, diagnostics);
    r["models"] = {{"a", data.model_a}, {"b", data.model_b}};
    r["n_samples"] = data.samples.size();

    const auto parseable = data.parseable_subset();
    const auto scored_a = scored_samples(data, data.model_a);
    ReportJson corr = ReportJson::array();
    corr.push_back(correlation_row(data.model_a, "full", scored_a));
    if (data.has_model_b()) {
        corr.push_back(correlation_row(data.model_a, "both-parseable", scored_samples(data, data.model_a, parseable)));
        corr.push_back(correlation_row(data.model_b, "full", scored_samples(data, data.model_b)));
        corr.push_back(correlation_row(data.model_b, "both-parseable", scored_samples(data, data.model_b, parseable)));
    }
    r["correlation"] = std::move(corr);
    r["n_both_parseable"] = parseable.size();

    ReportJson split;
    split["model"] = data.model_a;
    try {
        const auto s = split_half_spearman(scored_a, cfg.seed);
        split["first"] = {{"n", s.n_first}, {"spearman_rho", s.first.rho}, {"p_value", s.first.p_value}};
        split["second"] = {{"n", s.n_second}, {"spearman_rho", s.second.rho}, {"p_value", s.second.p_value}};
        split["note"] = "";
    } catch (const Error& e) {
        split["note"] = e.what();
    }
    r["split_half"] = std::move(split);

    ReportJson buckets;
    buckets["model"] = data.model_a;
    buckets["edges"] = cfg.bucket_edges;
    ReportJson rows = ReportJson::array();
    for (const auto& b : bucket_accuracy(scored_a, cfg.bucket_edges)) {
        rows.push_back({{"bucket", b.label()},
                        {"lower", b.lower},
                        {"upper", opt_json(b.upper)},
                        {"n", b.n},
                        {"n_correct", b.n_correct},
                        {"accuracy", opt_json(b.accuracy)}});
    }
    buckets["rows"] = std::move(rows);
    r["buckets"] = std::move(buckets);

    const auto paired = paired_scores(data);
    if (data.has_model_b()) {
        ReportJson prow = ReportJson::array();
        for (const auto& p : partition_consistency_stats(paired)) {
            prow.push_back({{"partition", to_string(p.partition)},
                            {"n", p.n},
                            {"mean", opt_json(p.mean)},
                            {"median", opt_json(p.median)}});
        }
        r["partitions"] = {{"rows", std::move(prow)}};
    } else {
        r["partitions"] = {{"omitted", "partition table needs two models"}};
    }

    ReportJson groups = ReportJson::array();
    std::vector<GroupMetric> metrics{GroupMetric::Accuracy, GroupMetric::Spearman};
    if (data.has_model_b()) metrics.push_back(GroupMetric::PreferredModelRate);
    for (const auto& dim : cfg.group_dimensions) {
        for (GroupMetric m : metrics) {
            ReportJson g;
            g["dimension"] = dim;
            g["metric"] = to_string(m);
            try {
                ReportJson grows = ReportJson::array();
                for (const auto& row : grouped_report(paired, dim, m)) {
                    grows.push_back({{"label", row.label},
                                     {"n", row.n},
                                     {"value", opt_json(row.value)},
                                     {"p_value", opt_json(row.p_value)},
                                     {"note", row.note}});
                }
                g["rows"] = std::move(grows);
            } catch (const Error& e) {
                g["error"] = e.what();
            }
            groups.push_back(std::move(g));
        }
    }
    r["groups"] = std::move(groups);
    return r;
}

ReportJson build_route_report(const PairedDataset& data, const RouteConfig& cfg,
                              const std::vector<InputDigest>& inputs,
                              const std::vector<Diagnostic>& diagnostics) {
    if (!data.has_model_b()) throw Error(ErrorKind::InvalidConfig, "routing needs two models");
    ReportJson r = header("route", to_json(cfg), cfg.seed, inputs, diagnostics);
    r["models"] = {{"a", data.model_a}, {"b", data.model_b}};

    const ConfusionCounts counts = confusion(data);
    r["confusion"] = {{"n11", counts.n11},
                      {"n10", counts.n10},
                      {"n01", counts.n01},
                      {"n00", counts.n00},
                      {"N", counts.total()},
                      {"accuracy_a", counts.accuracy_a()},
                      {"accuracy_b", counts.accuracy_b()},
                      {"oracle_accuracy", counts.oracle_accuracy()}};

    ReportJson rows = ReportJson::array();
    for (const auto& spec : cfg.strategies) {
        const Strategy strategy = Strategy::parse(spec);
        try {
            rows.push_back(outcome_json(route(data, strategy).outcome));
        } catch (const Error& e) {
            rows.push_back({{"strategy", strategy.name()}, {"skipped", e.what()}});
        }
    }
    r["strategies"] = std::move(rows);

    const RouteResult router = route(data, Strategy{});
    std::uint64_t kept_s10 = 0;
    std::uint64_t taken_s01 = 0;
    for (const auto& s : router.samples) {
        if (s.partition == Partition::S10 && s.correct) ++kept_s10;
        if (s.partition == Partition::S01 && s.correct) ++taken_s01;
    }
    const RoutingCondition cond = routing_condition(counts, kept_s10, taken_s01);
    r["routing_condition"] = {{"f10", opt_json(router.outcome.f10)},
                              {"f01", opt_json(router.outcome.f01)},
                              {"gains_term", cond.gains_term},
                              {"losses_term", cond.losses_term},
                              {"improves", cond.improves}};

    try {
        const auto d = disagreement_stats(counts, router.samples);
        r["disagreement"] = {{"pi", d.pi},
                             {"required_lift", finite_json(d.required_lift)},
                             {"precision_b", opt_json(d.precision_b)},
                             {"b_selections", d.b_selections},
                             {"b_correct_selections", d.b_correct_selections},
                             {"eta", opt_json(d.eta)}};
    } catch (const Error& e) {
        r["disagreement"] = {{"error", e.what()}};
    }

    std::vector<CorrectnessOutcome> paired;
    paired.reserve(router.samples.size());
    for (const auto& s : router.samples) {
        const bool a = s.partition == Partition::S11 || s.partition == Partition::S10;
        paired.push_back({s.correct, a});
    }
    const PairedOutcome disc = discordant_pairs(paired);
    const BootstrapResult boot = bootstrap_improvement(paired, cfg.bootstrap_iterations, cfg.seed);
    r["significance"] = {
        {"mcnemar", {{"b", disc.b}, {"c", disc.c}, {"p_value", mcnemar_exact(disc)}}},
        {"bootstrap",
         {{"iterations", boot.iterations},
          {"seed", cfg.seed},
          {"p_improve", boot.p_improve},
          {"delta_mean", boot.delta_mean},
          {"ci_low", boot.ci_low},
          {"ci_high", boot.ci_high}}}};

    ReportJson pg;
    pg["dimension"] = cfg.group_dimension;
    try {
        ReportJson grows = ReportJson::array();
        for (const auto& g : grouped_routing(data, router.samples, cfg.group_dimension)) {
            grows.push_back({{"label", g.label},
                             {"n", g.n},
                             {"accuracy_a", g.accuracy_a},
                             {"accuracy_router", g.accuracy_router},
                             {"delta", g.delta}});
        }
        pg["rows"] = std::move(grows);
    } catch (const Error& e) {
        pg["error"] = e.what();
    }
    r["per_group"] = std::move(pg);
    return r;
}

std::string render_markdown(const ReportJson& report) {
    if (!report.is_object() || report.value("schema", "") != kReportSchema) {
        throw Error(ErrorKind::InvalidConfig, std::string("not a ") + kReportSchema + " report");
    }
    std::ostringstream out;
    const std::string kind = report.value("kind", "");
    if (kind == "analyze") {
        render_analyze(out, report);
    } else if (kind == "route") {
        render_route(out, report);
    } else {
        throw Error(ErrorKind::InvalidConfig, "unknown report kind '" + kind + "'");
    }
    return out.str();
}

std::string format_sig4(double value) {
    if (!std::isfinite(value)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%#.4g", value);
    return buf;
}

std::string sha256_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);

    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[md[i] >> 4];
        hex += kHex[md[i] & 0xf];
    }
    return hex;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out) throw Error(ErrorKind::Io, "short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot move output into '" + path.string() + "'");
    }
}

}  // namespace zoomsig
