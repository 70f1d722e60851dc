#pragma once

#include "zoomsig/dataset.hpp"
#include "zoomsig/ingest.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace zoomsig {

inline constexpr const char* kReportSchema = "zoomsig-report/1";

using ReportJson = nlohmann::ordered_json;

struct InputDigest {
    std::string path;
    std::string sha256;
};

struct AnalyzeConfig {
    std::vector<std::string> inputs;
    std::string model_a;
    std::string model_b;
    std::uint64_t seed = 0;
    std::vector<double> bucket_edges;
    std::vector<std::string> group_dimensions;
};

struct RouteConfig {
    std::vector<std::string> inputs;
    std::string model_a;
    std::string model_b;
    std::uint64_t seed = 0;
    std::vector<std::string> strategies;
    std::uint64_t bootstrap_iterations = 10'000;
    std::string group_dimension = "application";
};

ReportJson to_json(const AnalyzeConfig& cfg);
ReportJson to_json(const RouteConfig& cfg);

/// Correlation, bucket, partition and grouped tables for a paired dataset.
ReportJson build_analyze_report(const PairedDataset& data, const AnalyzeConfig& cfg,
                                const std::vector<InputDigest>& inputs,
                                const std::vector<Diagnostic>& diagnostics);

/// Strategy table, routing condition, disagreement statistics, significance
/// and per-group deltas for a two-model dataset.
ReportJson build_route_report(const PairedDataset& data, const RouteConfig& cfg,
                              const std::vector<InputDigest>& inputs,
                              const std::vector<Diagnostic>& diagnostics);

/// Markdown rendering of an analyze or route report. Numbers are the JSON
/// values at 4 significant digits.
std::string render_markdown(const ReportJson& report);

/// "%#.4g" rendering used for every non-integer number in markdown.
std::string format_sig4(double value);

std::string sha256_hex(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace zoomsig
