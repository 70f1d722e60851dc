#include "zoomsig/significance.hpp"

#include "zoomsig/error.hpp"
#include "zoomsig/random.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace zoomsig {

namespace {

// Number of k-subsets summed exactly while it fits in 64 bits.
constexpr std::uint64_t kExactTailMax = 62;

// P(X >= k), X ~ Binomial(n, 1/2), with an exact integer tail when n is small.
double upper_tail_half(std::uint64_t n, std::uint64_t k) {
    if (k == 0) return 1.0;
    if (k > n) return 0.0;
    if (n <= kExactTailMax) {
        std::uint64_t coeff = 1;  // C(n, 0)
        std::uint64_t tail = 0;
        for (std::uint64_t j = 0; j <= n; ++j) {
            if (j >= k) tail += coeff;
            if (j < n) coeff = coeff / (j + 1) * (n - j) + coeff % (j + 1) * (n - j) / (j + 1);
        }
        return std::ldexp(static_cast<double>(tail), -static_cast<int>(n));
    }
    const boost::math::binomial_distribution<double> dist(static_cast<double>(n), 0.5);
    return boost::math::cdf(boost::math::complement(dist, static_cast<double>(k - 1)));
}

double percentile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double mcnemar_exact(std::uint64_t b, std::uint64_t c) {
    const std::uint64_t n = b + c;
    if (n == 0) return 1.0;
    return std::min(1.0, 2.0 * upper_tail_half(n, std::max(b, c)));
}

PairedOutcome discordant_pairs(std::span<const CorrectnessOutcome> samples) {
    PairedOutcome o;
    for (const auto& s : samples) {
        if (s.router_correct && !s.baseline_correct) ++o.b;
        if (!s.router_correct && s.baseline_correct) ++o.c;
    }
    return o;
}

BootstrapResult bootstrap_improvement(std::span<const CorrectnessOutcome> samples, std::uint64_t iterations,
                                      std::uint64_t seed) {
    if (samples.empty()) throw Error(ErrorKind::InsufficientData, "bootstrap needs at least one sample");
    if (iterations == 0) throw Error(ErrorKind::InvalidConfig, "bootstrap needs at least one iteration");

    std::vector<int> diff(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        diff[i] = static_cast<int>(samples[i].router_correct) - static_cast<int>(samples[i].baseline_correct);
    }

    const auto n = static_cast<std::uint64_t>(samples.size());
    std::vector<double> deltas(iterations);
    std::uint64_t improved = 0;
    for (std::uint64_t it = 0; it < iterations; ++it) {
        Rng rng = Rng::derive(seed, it);
        std::int64_t net = 0;
        for (std::uint64_t k = 0; k < n; ++k) net += diff[rng.below(n)];
        if (net > 0) ++improved;
        deltas[it] = static_cast<double>(net) / static_cast<double>(n);
    }

    BootstrapResult out;
    out.iterations = iterations;
    out.p_improve = static_cast<double>(improved) / static_cast<double>(iterations);
    double sum = 0.0;
    for (double d : deltas) sum += d;
    out.delta_mean = sum / static_cast<double>(iterations);
    std::sort(deltas.begin(), deltas.end());
    out.ci_low = percentile(deltas, 0.025);
    out.ci_high = percentile(deltas, 0.975);
    return out;
}

}  // namespace zoomsig
