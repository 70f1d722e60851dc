#pragma once

#include "zoomsig/dataset.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace zoomsig {

/// A consistency value with the correctness of the prediction it came from.
struct ScoredSample {
    double consistency = 0.0;
    bool correct = false;
    Labels labels;
};

/// Per-sample view of a paired dataset: both models' correctness and
/// consistency (absent on parse failure).
struct PairedScore {
    std::optional<double> consistency_a;
    std::optional<double> consistency_b;
    bool correct_a = false;
    bool correct_b = false;
    Labels labels;
};

struct SpearmanResult {
    double rho = 0.0;
    double p_value = 1.0;
};

struct CorrelationReport {
    double auc = 0.5;
    double spearman_rho = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// Average (mid) ranks, 1-based; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

/// P(c_correct < c_incorrect) + 0.5 * P(c_correct == c_incorrect), via the
/// Mann-Whitney rank sum.
double auc_lower_score_positive(std::span<const ScoredSample> samples);

/// Tie-corrected Spearman rho with a two-sided p-value.
///
/// p-value: exact permutation distribution for n <= 10, a fixed-seed
/// 200'000-draw Monte Carlo permutation estimate for 11 <= n < 20, and the
/// Student-t approximation with n - 2 degrees of freedom for n >= 20.
SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys);

/// Two-sided p-value of rho under the t approximation.
double spearman_t_pvalue(double rho, std::size_t n);

/// Spearman between consistency and correctness (1 = correct).
SpearmanResult consistency_spearman(std::span<const ScoredSample> samples);

CorrelationReport correlation_report(std::span<const ScoredSample> samples);

struct BucketRow {
    double lower = 0.0;
    std::optional<double> upper;  // absent for the open-ended last bucket
    std::size_t n = 0;
    std::size_t n_correct = 0;
    std::optional<double> accuracy;  // absent when n == 0

    [[nodiscard]] std::string label() const;
};

inline const std::vector<double>& default_bucket_edges() {
    static const std::vector<double> edges{30.0, 80.0, 150.0, 250.0};
    return edges;
}

/// Buckets [0, e1), [e1, e2), ..., [ek, inf).
std::vector<BucketRow> bucket_accuracy(std::span<const ScoredSample> samples,
                                       std::span<const double> edges);

enum class Partition { S11, S10, S01, S00 };

const char* to_string(Partition p) noexcept;
Partition partition_of(bool correct_a, bool correct_b) noexcept;

struct PartitionRow {
    Partition partition = Partition::S11;
    std::size_t n = 0;
    std::optional<double> mean;
    std::optional<double> median;
};

/// Model-A consistency summarized per oracle partition. Always four rows in
/// S11, S10, S01, S00 order; samples without a model-A consistency are skipped.
std::vector<PartitionRow> partition_consistency_stats(std::span<const PairedScore> samples);

double median(std::vector<double> values);

enum class GroupMetric { Accuracy, Spearman, PreferredModelRate };

const char* to_string(GroupMetric m) noexcept;
GroupMetric parse_group_metric(const std::string& name);

struct GroupRow {
    std::string label;
    std::size_t n = 0;               // samples in the group contributing to the metric
    std::optional<double> value;     // absent when undefined for the group
    std::optional<double> p_value;   // Spearman only
    std::string note;                // why `value` is absent
};

/// `metric` evaluated within each label of `dimension`, rows ordered by label.
///   accuracy             model-A accuracy
///   spearman             rho(c_A, correct_A) over samples with c_A
///   preferred-model-rate fraction of samples with both c present and c_B < c_A
std::vector<GroupRow> grouped_report(std::span<const PairedScore> samples, const std::string& dimension,
                                     GroupMetric metric);

/// Samples where `model` has a consistency value, optionally restricted to
/// the given sample indices.
std::vector<ScoredSample> scored_samples(const PairedDataset& data, const std::string& model);
std::vector<ScoredSample> scored_samples(const PairedDataset& data, const std::string& model,
                                         std::span<const std::size_t> indices);
std::vector<PairedScore> paired_scores(const PairedDataset& data);

struct SplitHalfResult {
    SpearmanResult first;
    SpearmanResult second;
    std::size_t n_first = 0;
    std::size_t n_second = 0;
};

/// Randomly halves `samples` (seeded shuffle) and correlates each half.
SplitHalfResult split_half_spearman(std::span<const ScoredSample> samples, std::uint64_t seed);

}  // namespace zoomsig
