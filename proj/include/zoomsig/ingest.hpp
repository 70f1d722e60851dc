#pragma once

#include "zoomsig/dataset.hpp"
#include "zoomsig/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zoomsig {

/// One line of a prediction log: one model's 2-step output on one sample.
///
/// JSONL schema, one object per line:
///   sample_id (string), model (string), r (number),
///   p1 ([x,y] | null), crop_box ([x0,y0,x1,y1] | null), p2 ([x,y] | null),
///   final ([x,y] | null, optional), gt_bbox ([x0,y0,x1,y1]),
///   category, os, application (strings), parse_failed_stage (1 | 2 | null).
/// Unknown fields are ignored.
struct LogRecord {
    std::string sample_id;
    std::string model;
    double r = 0.5;
    std::optional<Point> p1;
    std::optional<BBox> crop_box;
    std::optional<Point> p2;
    std::optional<Point> final_point;
    BBox gt_bbox;
    std::string category;
    std::string os;
    std::string application;
    ParseStage parse_failed_stage = ParseStage::None;

    friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

struct Diagnostic {
    std::size_t line = 0;  // 1-based
    std::string message;
    bool dropped = false;  // the line produced no record
};

struct ParsedLog {
    std::vector<LogRecord> records;
    std::vector<Diagnostic> diagnostics;
};

/// Parses a JSONL log. Bad lines become diagnostics and never abort the
/// parse; a log with no valid record throws empty-log.
ParsedLog parse_log(std::istream& in);
ParsedLog read_log_file(const std::filesystem::path& path);

/// Trace implied by a record: crop reconstructed from p1 and r when absent,
/// stored final trusted when present.
ZoomTrace to_trace(const LogRecord& rec);

/// Builds the sample universe from model A's records and attaches every other
/// model's trace for the same sample_id. `model_b` may be empty.
PairedDataset pair_models(std::span<const LogRecord> records, const std::string& model_a,
                          const std::string& model_b);

/// Model names in order of first appearance.
std::vector<std::string> model_names(std::span<const LogRecord> records);

/// One record per (sample, model), models in name order.
std::vector<LogRecord> to_log_records(const SampleRecord& sample);

std::string to_jsonl_line(const LogRecord& rec);
void write_jsonl(std::ostream& out, std::span<const SampleRecord> samples);

}  // namespace zoomsig
