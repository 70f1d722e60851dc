#pragma once

// Hand-built paired datasets with chosen correctness and consistency values.

#include "zoomsig/dataset.hpp"
#include "zoomsig/geometry.hpp"

#include <cstdio>
#include <optional>
#include <string>

namespace zoomsig::fixture {

inline constexpr double kRatio = 0.5;
inline const BBox kGtBox{450, 450, 550, 550};

/// Trace whose step-2 prediction has consistency `c` and whose final point
/// lands inside kGtBox iff `correct`. Absent `c` is a step-1 parse failure.
inline ZoomTrace trace_with(std::optional<double> c, bool correct) {
    if (!c) return make_trace(kRatio, std::nullopt, std::nullopt);
    const Point target = correct ? Point{500, 500} : Point{500, 700};
    const Point p2{500 + *c, 500};
    const Point p1{target.x - kRatio * *c, target.y};
    return make_trace(kRatio, p1, p2);
}

inline std::string sample_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%05zu", i);
    return buf;
}

inline SampleRecord paired_sample(std::size_t index, bool correct_a, bool correct_b, std::optional<double> c_a,
                                  std::optional<double> c_b, Labels labels = {}) {
    SampleRecord s;
    s.sample_id = sample_id(index);
    s.gt_bbox = kGtBox;
    if (labels.empty()) labels = {{"category", "dev"}, {"os", "linux"}, {"application", "vscode"}};
    s.labels = std::move(labels);
    s.traces["A"] = trace_with(c_a, correct_a);
    s.traces["B"] = trace_with(c_b, correct_b);
    rescore(s);
    return s;
}

/// Paired dataset with confusion counts (n11, n10, n01, n00) where the
/// consistency router takes B on exactly `gains` samples of S01 and
/// `losses` samples of S10.
inline PairedDataset counts_dataset(std::size_t n11, std::size_t n10, std::size_t n01, std::size_t n00,
                                    std::size_t gains, std::size_t losses) {
    PairedDataset d;
    d.model_a = "A";
    d.model_b = "B";
    std::size_t i = 0;
    auto add = [&](bool ca, bool cb, double c_a, double c_b) {
        d.samples.push_back(paired_sample(i++, ca, cb, c_a, c_b));
    };
    for (std::size_t k = 0; k < n11; ++k) add(true, true, 100, 200);
    for (std::size_t k = 0; k < n10; ++k) add(true, false, k < losses ? 300 : 100, k < losses ? 150 : 200);
    for (std::size_t k = 0; k < n01; ++k) add(false, true, k < gains ? 300 : 100, k < gains ? 150 : 200);
    for (std::size_t k = 0; k < n00; ++k) add(false, false, 100, 200);
    return d;
}

}  // namespace zoomsig::fixture
