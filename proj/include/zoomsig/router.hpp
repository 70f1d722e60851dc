#pragma once

#include "zoomsig/dataset.hpp"
#include "zoomsig/metrics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zoomsig {

struct ConfusionCounts {
    std::uint64_t n11 = 0;  // both correct
    std::uint64_t n10 = 0;  // only A correct
    std::uint64_t n01 = 0;  // only B correct
    std::uint64_t n00 = 0;  // both wrong

    [[nodiscard]] std::uint64_t total() const noexcept { return n11 + n10 + n01 + n00; }
    [[nodiscard]] double accuracy_a() const { return ratio(n11 + n10); }
    [[nodiscard]] double accuracy_b() const { return ratio(n11 + n01); }
    [[nodiscard]] double oracle_accuracy() const { return ratio(n11 + n10 + n01); }
    [[nodiscard]] std::uint64_t count(Partition p) const noexcept;

    void add(Partition p) noexcept;
    void validate() const;

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;

private:
    [[nodiscard]] double ratio(std::uint64_t k) const;
};

struct CorrectnessPair {
    bool correct_a = false;
    bool correct_b = false;
};

ConfusionCounts confusion(std::span<const CorrectnessPair> samples);
ConfusionCounts confusion(const PairedDataset& data);

struct Strategy {
    enum class Kind { Consistency, SingleA, SingleB, Midpoint, VoteAgree, StageSplit, Oracle };

    Kind kind = Kind::Consistency;
    double vote_distance = 50.0;

    /// "consistency", "single:A", "single:B", "midpoint", "vote-agree" or
    /// "vote-agree:<d>", "stage-split", "oracle".
    static Strategy parse(const std::string& spec);
    [[nodiscard]] std::string name() const;
};

/// Which source produced a routed prediction.
enum class Choice { A, B, Fused, Hybrid, None };

struct RoutedSample {
    Choice choice = Choice::None;
    std::optional<Point> prediction;
    bool correct = false;
    Partition partition = Partition::S00;
};

struct RoutingOutcome {
    std::string strategy;
    std::uint64_t n = 0;
    std::uint64_t n_correct = 0;
    double accuracy = 0.0;
    double delta_vs_model_a = 0.0;
    std::uint64_t gains = 0;   // router correct where A wrong
    std::uint64_t losses = 0;  // router wrong where A correct
    std::optional<double> eta;  // (gains - losses) / n01
    std::optional<double> f10;  // realized P(router correct | S10)
    std::optional<double> f01;  // realized P(router correct | S01)
    std::optional<double> disagreement_precision;  // of B selections on S10 u S01
};

struct RouteResult {
    std::vector<RoutedSample> samples;
    RoutingOutcome outcome;
};

/// Routes every sample of a paired dataset with `strategy`. Throws
/// invalid-config when the strategy needs trace fields the data lacks
/// (stage-split without hybrid traces).
RouteResult route(const PairedDataset& data, const Strategy& strategy);

/// Consistency-router decision: A iff c_A <= c_B, absent values treated as +inf.
/// Returns Choice::None when neither model has a prediction.
Choice consistency_choice(std::optional<double> c_a, std::optional<double> c_b) noexcept;

struct RoutingCondition {
    bool improves = false;
    double gains_term = 0.0;   // f01 * n01
    double losses_term = 0.0;  // (1 - f10) * n10
};

/// Router beats model A alone iff f01 * n01 > (1 - f10) * n10.
RoutingCondition routing_condition(const ConfusionCounts& counts, double f10, double f01);

/// Exact form on realized selection counts: `a_kept_s10` samples of S10
/// routed to A, `b_taken_s01` samples of S01 routed to B.
RoutingCondition routing_condition(const ConfusionCounts& counts, std::uint64_t a_kept_s10,
                                   std::uint64_t b_taken_s01);

struct DisagreementStats {
    double pi = 0.0;                        // n01 / (n10 + n01)
    std::optional<double> precision_b;      // absent when B is never chosen on D
    double required_lift = 0.0;             // 0.5 / pi
    std::optional<double> eta;              // net gain / n01
    std::uint64_t b_selections = 0;
    std::uint64_t b_correct_selections = 0;
};

/// Statistics of B selections on the disagreement set S10 u S01.
DisagreementStats disagreement_stats(const ConfusionCounts& counts, std::span<const RoutedSample> routed);

/// Partition-level base rate and required precision lift only.
DisagreementStats disagreement_stats(const ConfusionCounts& counts);

struct GroupRouting {
    std::string label;
    std::uint64_t n = 0;
    double accuracy_a = 0.0;
    double accuracy_router = 0.0;
    double delta = 0.0;
};

/// Per-label model-A vs router accuracy, sorted by delta (descending, ties by label).
std::vector<GroupRouting> grouped_routing(const PairedDataset& data, std::span<const RoutedSample> routed,
                                          const std::string& dimension);

}  // namespace zoomsig
