#pragma once

#include <cstdint>
#include <span>

namespace zoomsig {

/// Discordant pair counts of a paired comparison.
struct PairedOutcome {
    std::uint64_t b = 0;  // router correct, baseline wrong
    std::uint64_t c = 0;  // router wrong, baseline correct
};

/// Exact two-sided McNemar test: min(1, 2 P(X >= max(b, c))) with
/// X ~ Binomial(b + c, 1/2). Returns 1 when there are no discordant pairs.
double mcnemar_exact(std::uint64_t b, std::uint64_t c);
inline double mcnemar_exact(PairedOutcome o) { return mcnemar_exact(o.b, o.c); }

struct CorrectnessOutcome {
    bool router_correct = false;
    bool baseline_correct = false;
};

PairedOutcome discordant_pairs(std::span<const CorrectnessOutcome> samples);

struct BootstrapResult {
    double p_improve = 0.0;   // fraction of resamples with router accuracy > baseline
    double delta_mean = 0.0;  // mean accuracy delta over resamples
    double ci_low = 0.0;      // 2.5th percentile of the delta
    double ci_high = 0.0;     // 97.5th percentile of the delta
    std::uint64_t iterations = 0;
};

/// Sample-level paired bootstrap. Iteration i resamples N indices with
/// replacement from Rng::derive(seed, i).
BootstrapResult bootstrap_improvement(std::span<const CorrectnessOutcome> samples, std::uint64_t iterations,
                                      std::uint64_t seed);

}  // namespace zoomsig
