#pragma once

#include "zoomsig/geometry.hpp"

#include <map>
#include <string>
#include <vector>

namespace zoomsig {

/// Grouping labels of a sample, keyed by dimension ("category", "os",
/// "application").
using Labels = std::map<std::string, std::string>;

inline const std::vector<std::string>& label_dimensions() {
    static const std::vector<std::string> dims{"category", "os", "application"};
    return dims;
}

/// One benchmark sample with every model's trace and the derived
/// point-in-box correctness.
struct SampleRecord {
    std::string sample_id;
    BBox gt_bbox;
    Labels labels;
    std::map<std::string, ZoomTrace> traces;
    std::map<std::string, bool> correctness;

    [[nodiscard]] const ZoomTrace* trace(const std::string& model) const {
        auto it = traces.find(model);
        return it == traces.end() ? nullptr : &it->second;
    }
    [[nodiscard]] bool correct(const std::string& model) const {
        auto it = correctness.find(model);
        return it != correctness.end() && it->second;
    }
    /// Consistency of `model` if it produced a step-2 prediction.
    [[nodiscard]] std::optional<double> consistency(const std::string& model) const {
        const ZoomTrace* t = trace(model);
        return t ? t->consistency : std::nullopt;
    }

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// Correctness of a trace against a ground-truth box; absent predictions are
/// incorrect.
bool score_trace(const ZoomTrace& trace, const BBox& gt_bbox);

/// Recomputes `correctness` for every trace of `sample`.
void rescore(SampleRecord& sample);

/// Samples anchored on a reference model A, optionally paired with model B.
struct PairedDataset {
    std::string model_a;
    std::string model_b;  // empty for a single-model dataset
    std::vector<SampleRecord> samples;

    [[nodiscard]] bool has_model_b() const noexcept { return !model_b.empty(); }
    /// Name under which stage-split traces (A's step 1, B's step 2 on A's
    /// crop) are stored.
    [[nodiscard]] std::string hybrid_model() const { return hybrid_model_name(model_a, model_b); }

    /// Indices of samples where every paired model has a consistency value.
    [[nodiscard]] std::vector<std::size_t> parseable_subset() const;

    static std::string hybrid_model_name(const std::string& a, const std::string& b) {
        return a + "->" + b;
    }
};

}  // namespace zoomsig
