#include "zoomsig/cli.hpp"

#include "zoomsig/error.hpp"
#include "zoomsig/ingest.hpp"
#include "zoomsig/metrics.hpp"
#include "zoomsig/report.hpp"
#include "zoomsig/router.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace zoomsig {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& default_strategies() {
    static const std::vector<std::string> s{"consistency", "single:A", "single:B", "midpoint",
                                            "vote-agree:50", "stage-split", "oracle"};
    return s;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw UsageError("config '" + path + "' is not a JSON object");
    return j;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_edges(const std::string& s) {
    std::vector<double> edges;
    for (const auto& item : split_list(s)) {
        try {
            std::size_t used = 0;
            edges.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("bad bucket edge '" + item + "'");
        }
    }
    return edges;
}

template <typename T>
T config_value(const json& cfg, const char* key, T fallback) {
    auto it = cfg.find(key);
    if (it == cfg.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("config key '") + key + "' has the wrong type");
    }
}

std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value, const json& cfg) {
    if (flag->count() > 0) return flag_value;
    auto it = cfg.find("seed");
    if (it != cfg.end() && it->is_number_unsigned()) return it->get<std::uint64_t>();
    throw UsageError("--seed is required (no clock-derived default)");
}

struct LoadedInputs {
    std::vector<LogRecord> records;
    std::vector<Diagnostic> diagnostics;
    std::vector<InputDigest> digests;
};

LoadedInputs load_inputs(const std::vector<std::string>& paths) {
    if (paths.empty()) throw UsageError("at least one --input is required");
    LoadedInputs out;
    for (const auto& path : paths) {
        ParsedLog log = read_log_file(path);
        for (auto& rec : log.records) out.records.push_back(std::move(rec));
        for (auto& d : log.diagnostics) {
            d.message = path + ":" + std::to_string(d.line) + ": " + d.message;
            out.diagnostics.push_back(std::move(d));
        }
        out.digests.push_back({path, sha256_hex(path)});
    }
    return out;
}

// Fills unset model names: A is the first model in the log, B the next
// non-hybrid one.
void resolve_models(const std::vector<LogRecord>& records, std::string& a, std::string& b, bool want_b) {
    std::vector<std::string> names;
    for (auto& n : model_names(records)) {
        if (n.find("->") == std::string::npos) names.push_back(n);
    }
    if (a.empty()) {
        if (names.empty()) throw Error(ErrorKind::MissingModel, "log contains no models");
        a = names.front();
    }
    if (b.empty() && want_b) {
        for (const auto& n : names) {
            if (n != a) {
                b = n;
                break;
            }
        }
    }
}

void emit_report(const ReportJson& report, const std::string& out_path, const std::string& md_path,
                 std::ostream& out) {
    const std::string md = render_markdown(report);
    if (!out_path.empty()) write_file_atomic(out_path, report.dump(2) + "\n");
    if (!md_path.empty()) write_file_atomic(md_path, md);
    out << md;
}

struct SimulateArgs {
    std::string config;
    std::vector<std::string> models;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    double r = 0.5;
    double margin = 0.0;
    double bbox_half_size = 20.0;
    bool hybrid = false;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, const CLI::App& sub, std::ostream& out) {
    SimulationSpec spec;
    if (!a.config.empty()) spec = parse_simulation_spec(load_json_file(a.config));

    if (!a.models.empty()) {
        spec.models.clear();
        for (const auto& m : a.models) spec.models.push_back(parse_model_flag(m));
    }
    if (spec.models.empty()) throw UsageError("no models: pass --config or --model");
    if (sub.count("--r") > 0) {
        for (auto& m : spec.models) m.r = a.r;
    }
    if (sub.count("--margin") > 0) spec.options.margin = a.margin;
    if (sub.count("--bbox-half-size") > 0) spec.options.bbox_half_size = a.bbox_half_size;
    if (sub.count("--hybrid") > 0) spec.options.emit_hybrid = a.hybrid;
    if (sub.count("--n") > 0) spec.n = a.n;
    if (sub.count("--seed") > 0) spec.seed = a.seed;
    if (!spec.seed) throw UsageError("--seed is required (no clock-derived default)");
    if (!spec.n) throw UsageError("--n is required");
    if (a.out.empty()) throw UsageError("--out is required");

    const auto data = simulate_dataset(spec.models, *spec.n, *spec.seed, spec.options);
    std::ostringstream jsonl;
    write_jsonl(jsonl, data);
    write_file_atomic(a.out, jsonl.str());

    out << "simulated " << data.size() << " samples (seed " << *spec.seed << ") -> " << a.out << '\n';
    std::vector<std::string> names;
    for (const auto& [name, trace] : data.front().traces) names.push_back(name);
    for (const auto& name : names) {
        std::size_t correct = 0;
        std::size_t clipped = 0;
        for (const auto& s : data) {
            if (s.correct(name)) ++correct;
            const ZoomTrace* t = s.trace(name);
            if (t && t->crop && t->crop->clipped) ++clipped;
        }
        const double n = static_cast<double>(data.size());
        out << "  " << name << ": accuracy " << format_sig4(static_cast<double>(correct) / n) << ", clip rate "
            << format_sig4(static_cast<double>(clipped) / n) << '\n';
    }
    return kExitOk;
}

struct AnalyzeArgs {
    std::string config;
    std::vector<std::string> inputs;
    std::string model_a;
    std::string model_b;
    std::uint64_t seed = 0;
    std::string buckets;
    std::string group;
    std::string out;
    std::string markdown;
};

int cmd_analyze(const AnalyzeArgs& a, const CLI::App& sub, std::ostream& out) {
    const json file = a.config.empty() ? json::object() : load_json_file(a.config);
    AnalyzeConfig cfg;
    cfg.seed = resolve_seed(sub.get_option("--seed"), a.seed, file);
    cfg.inputs = !a.inputs.empty() ? a.inputs : config_value(file, "inputs", std::vector<std::string>{});
    cfg.model_a = !a.model_a.empty() ? a.model_a : config_value(file, "model_a", std::string());
    cfg.model_b = !a.model_b.empty() ? a.model_b : config_value(file, "model_b", std::string());
    cfg.bucket_edges = sub.count("--buckets") > 0
                           ? parse_edges(a.buckets)
                           : config_value(file, "buckets", default_bucket_edges());
    cfg.group_dimensions = sub.count("--group") > 0
                               ? split_list(a.group)
                               : config_value(file, "group", std::vector<std::string>{"category", "os"});
    const std::string out_path = !a.out.empty() ? a.out : config_value(file, "out", std::string());
    const std::string md_path = !a.markdown.empty() ? a.markdown : config_value(file, "markdown", std::string());

    LoadedInputs in = load_inputs(cfg.inputs);
    resolve_models(in.records, cfg.model_a, cfg.model_b, true);
    const PairedDataset data = pair_models(in.records, cfg.model_a, cfg.model_b);
    emit_report(build_analyze_report(data, cfg, in.digests, in.diagnostics), out_path, md_path, out);
    return kExitOk;
}

struct RouteArgs {
    std::string config;
    std::vector<std::string> inputs;
    std::string model_a;
    std::string model_b;
    std::uint64_t seed = 0;
    std::string strategies;
    std::uint64_t iterations = 10'000;
    std::string group;
    std::string out;
    std::string markdown;
};

int cmd_route(const RouteArgs& a, const CLI::App& sub, std::ostream& out) {
    const json file = a.config.empty() ? json::object() : load_json_file(a.config);
    RouteConfig cfg;
    cfg.seed = resolve_seed(sub.get_option("--seed"), a.seed, file);
    cfg.inputs = !a.inputs.empty() ? a.inputs : config_value(file, "inputs", std::vector<std::string>{});
    cfg.model_a = !a.model_a.empty() ? a.model_a : config_value(file, "model_a", std::string());
    cfg.model_b = !a.model_b.empty() ? a.model_b : config_value(file, "model_b", std::string());
    cfg.strategies = sub.count("--strategies") > 0 ? split_list(a.strategies)
                                                   : config_value(file, "strategies", default_strategies());
    for (const auto& s : cfg.strategies) (void)Strategy::parse(s);
    cfg.bootstrap_iterations = sub.count("--bootstrap-iterations") > 0
                                   ? a.iterations
                                   : config_value<std::uint64_t>(file, "bootstrap_iterations", 10'000);
    if (cfg.bootstrap_iterations == 0) throw UsageError("--bootstrap-iterations must be >= 1");
    cfg.group_dimension = !a.group.empty() ? a.group : config_value(file, "group", std::string("application"));
    const std::string out_path = !a.out.empty() ? a.out : config_value(file, "out", std::string());
    const std::string md_path = !a.markdown.empty() ? a.markdown : config_value(file, "markdown", std::string());

    LoadedInputs in = load_inputs(cfg.inputs);
    resolve_models(in.records, cfg.model_a, cfg.model_b, true);
    if (cfg.model_b.empty()) throw Error(ErrorKind::MissingModel, "routing needs a second model in the log");
    const PairedDataset data = pair_models(in.records, cfg.model_a, cfg.model_b);
    emit_report(build_route_report(data, cfg, in.digests, in.diagnostics), out_path, md_path, out);
    return kExitOk;
}

int cmd_report(const std::string& input, const std::string& out_path, std::ostream& out) {
    std::ifstream in(input);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + input + "'");
    const ReportJson report = ReportJson::parse(in, nullptr, false);
    if (report.is_discarded()) throw Error(ErrorKind::InvalidConfig, "'" + input + "' is not JSON");
    const std::string md = render_markdown(report);
    if (!out_path.empty()) {
        write_file_atomic(out_path, md);
    } else {
        out << md;
    }
    return kExitOk;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidConfig:
        case ErrorKind::InvalidEdges:
        case ErrorKind::InvalidRatio:
            return kExitUsage;
        default:
            return kExitData;
    }
}

}  // namespace

ErrorDistribution parse_error_distribution(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "error distribution must be an object");
    const std::string family = j.value("family", "");
    try {
        if (family == "zero") return ErrorDistribution::zero();
        if (family == "fixed") return ErrorDistribution::fixed({j.at("x").get<double>(), j.at("y").get<double>()});
        if (family == "gaussian" || family == "isotropic-gaussian") {
            return ErrorDistribution::gaussian(j.at("sigma").get<double>());
        }
        if (family == "uniform-disc") return ErrorDistribution::uniform_disc(j.at("radius").get<double>());
        if (family == "mixture") {
            std::vector<MixtureComponent> parts;
            for (const auto& c : j.at("components")) {
                parts.push_back({c.at("weight").get<double>(), parse_error_distribution(c.at("dist"))});
            }
            return ErrorDistribution::mixture(std::move(parts));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("error distribution '") + family + "': " + e.what());
    }
    throw Error(ErrorKind::InvalidConfig, "unknown error family '" + family + "'");
}

SyntheticModelConfig parse_model_config(const json& j) {
    SyntheticModelConfig cfg;
    try {
        cfg.name = j.at("name").get<std::string>();
        cfg.r = j.value("r", 0.5);
        cfg.step1_error = j.contains("step1_error") ? parse_error_distribution(j.at("step1_error"))
                                                    : ErrorDistribution::zero();
        cfg.step2_error = j.contains("step2_error") ? parse_error_distribution(j.at("step2_error"))
                                                    : ErrorDistribution::zero();
        cfg.step2_error_coupling = j.value("coupling", 0.0);
        const std::string ooc = j.value("out_of_crop", "clamp");
        if (ooc == "clamp") {
            cfg.out_of_crop = OutOfCropBehavior::Clamp;
        } else if (ooc == "uniform") {
            cfg.out_of_crop = OutOfCropBehavior::UniformInCrop;
        } else {
            throw Error(ErrorKind::InvalidConfig, "out_of_crop must be 'clamp' or 'uniform'");
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("model config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

SimulationSpec parse_simulation_spec(const json& j) {
    SimulationSpec spec;
    try {
        if (j.contains("n")) spec.n = j.at("n").get<std::uint64_t>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        spec.options.margin = j.value("margin", spec.options.margin);
        spec.options.bbox_half_size = j.value("bbox_half_size", spec.options.bbox_half_size);
        spec.options.emit_hybrid = j.value("hybrid", false);
        if (j.contains("categories")) spec.options.categories = j.at("categories").get<std::vector<std::string>>();
        if (j.contains("os")) spec.options.os_labels = j.at("os").get<std::vector<std::string>>();
        spec.options.apps_per_category = j.value("apps_per_category", spec.options.apps_per_category);
        for (const auto& m : j.at("models")) {
            SyntheticModelConfig cfg = parse_model_config(m);
            if (!m.contains("r") && j.contains("r")) cfg.r = j.at("r").get<double>();
            cfg.validate();
            spec.models.push_back(std::move(cfg));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("simulation config: ") + e.what());
    }
    spec.options.validate();
    return spec;
}

SyntheticModelConfig parse_model_flag(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 3 || parts.size() > 4 || parts[0].empty()) {
        throw Error(ErrorKind::InvalidConfig, "--model expects name:sigma1:sigma2[:coupling], got '" + spec + "'");
    }
    SyntheticModelConfig cfg;
    cfg.name = parts[0];
    try {
        cfg.step1_error = ErrorDistribution::gaussian(std::stod(parts[1]));
        cfg.step2_error = ErrorDistribution::gaussian(std::stod(parts[2]));
        if (parts.size() == 4) cfg.step2_error_coupling = std::stod(parts[3]);
    } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidConfig, "non-numeric value in --model '" + spec + "'");
    }
    cfg.validate();
    return cfg;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"zoomsig: zoom-consistency confidence toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic prediction log (JSONL)");
    simulate->add_option("--config", sim.config, "simulation config JSON");
    simulate->add_option("--model", sim.models, "name:sigma1:sigma2[:coupling] (Gaussian errors), repeatable");
    simulate->add_option("--n", sim.n, "number of samples");
    simulate->add_option("--seed", sim.seed, "random seed (required)");
    simulate->add_option("--r", sim.r, "crop ratio for every model");
    simulate->add_option("--margin", sim.margin, "target margin from the canvas edge");
    simulate->add_option("--bbox-half-size", sim.bbox_half_size, "ground-truth box half-size");
    simulate->add_flag("--hybrid", sim.hybrid, "also emit stage-split traces for the first two models");
    simulate->add_option("--out", sim.out, "output JSONL path");

    AnalyzeArgs ana;
    auto* analyze = app.add_subcommand("analyze", "correlation, bucket, partition and grouped report");
    analyze->add_option("--config", ana.config, "config JSON (flags take precedence)");
    analyze->add_option("--input", ana.inputs, "JSONL prediction log, repeatable");
    analyze->add_option("--model-a", ana.model_a, "reference model (default: first in log)");
    analyze->add_option("--model-b", ana.model_b, "second model (default: next in log)");
    analyze->add_option("--seed", ana.seed, "seed for the split-half check (required)");
    analyze->add_option("--buckets", ana.buckets, "ascending bucket edges, e.g. 30,80,150,250");
    analyze->add_option("--group", ana.group, "comma-separated label dimensions");
    analyze->add_option("--out", ana.out, "JSON report path");
    analyze->add_option("--markdown", ana.markdown, "markdown report path");

    RouteArgs rt;
    auto* routec = app.add_subcommand("route", "routing strategies, improvement condition and significance");
    routec->add_option("--config", rt.config, "config JSON (flags take precedence)");
    routec->add_option("--input", rt.inputs, "JSONL prediction log, repeatable");
    routec->add_option("--model-a", rt.model_a, "reference model (default: first in log)");
    routec->add_option("--model-b", rt.model_b, "second model (default: next in log)");
    routec->add_option("--seed", rt.seed, "bootstrap seed (required)");
    routec->add_option("--strategies", rt.strategies, "comma-separated strategy specs");
    routec->add_option("--bootstrap-iterations", rt.iterations, "bootstrap resamples");
    routec->add_option("--group", rt.group, "label dimension for the per-group table");
    routec->add_option("--out", rt.out, "JSON report path");
    routec->add_option("--markdown", rt.markdown, "markdown report path");

    std::string report_in;
    std::string report_out;
    auto* report = app.add_subcommand("report", "re-render a stored JSON report as markdown");
    report->add_option("--input", report_in, "JSON report")->required();
    report->add_option("--out", report_out, "markdown output path (default: stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*simulate) return cmd_simulate(sim, *simulate, out);
        if (*analyze) return cmd_analyze(ana, *analyze, out);
        if (*routec) return cmd_route(rt, *routec, out);
        if (*report) return cmd_report(report_in, report_out, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace zoomsig
