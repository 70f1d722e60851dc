#include "zoomsig/dataset.hpp"

namespace zoomsig {

bool score_trace(const ZoomTrace& trace, const BBox& gt_bbox) {
    return trace.final_point && point_in_bbox(*trace.final_point, gt_bbox);
}

void rescore(SampleRecord& sample) {
    sample.correctness.clear();
    for (const auto& [model, trace] : sample.traces) {
        sample.correctness[model] = score_trace(trace, sample.gt_bbox);
    }
}

std::vector<std::size_t> PairedDataset::parseable_subset() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SampleRecord& s = samples[i];
        if (!s.consistency(model_a)) continue;
        if (has_model_b() && !s.consistency(model_b)) continue;
        out.push_back(i);
    }
    return out;
}

}  // namespace zoomsig
