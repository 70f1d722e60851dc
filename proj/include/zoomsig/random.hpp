#pragma once

#include <cstdint>
#include <random>

namespace zoomsig {

/// Seeded random source used by every randomized procedure.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Uniform and normal variates are derived here rather than through
/// the <random> distributions, whose algorithms differ between standard
/// library vendors, so a seed reproduces the same stream on any toolchain.
///
/// Sub-streams: `Rng::derive(seed, stream)` hashes (seed, stream) with
/// SplitMix64 into an independent engine seed. Per-sample and per-iteration
/// work uses one derived stream each, so results do not depend on execution
/// order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller (one variate per call).
    double normal();
    /// Unbiased integer in [0, bound); bound must be nonzero.
    std::uint64_t below(std::uint64_t bound);

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace zoomsig
