#include "zoomsig/metrics.hpp"

#include "zoomsig/error.hpp"
#include "zoomsig/random.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

namespace zoomsig {

namespace {

constexpr std::size_t kExactPermutationMax = 10;
constexpr std::size_t kAsymptoticMin = 20;
constexpr std::size_t kMonteCarloDraws = 200'000;
constexpr std::uint64_t kMonteCarloSeed = 0x5eed'cafe'f00dULL;

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::InsufficientData, std::string(what) + " contains a non-finite value");
        }
    }
}

// Twelve times the tie-corrected sum of squared rank deviations:
// n^3 - n - sum over tie groups of (t^3 - t). Integer valued.
double twelve_rank_ss(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double total = n * n * n - n;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        total -= t * t * t - t;
        i = j;
    }
    return total;
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return d2;
}

// Permutations with |12K - 12D| >= observed are at least as extreme; all
// quantities are exact multiples of small fractions, so compare exactly.
struct PermutationFrame {
    double twelve_k = 0.0;
    double observed = 0.0;

    [[nodiscard]] bool extreme(double d2) const { return std::abs(twelve_k - 12.0 * d2) >= observed; }
};

double exact_permutation_pvalue(std::span<const double> rx, std::vector<double> ry, const PermutationFrame& f) {
    std::vector<std::size_t> perm(ry.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> permuted(ry.size());
    std::uint64_t total = 0;
    std::uint64_t hits = 0;
    do {
        for (std::size_t i = 0; i < perm.size(); ++i) permuted[i] = ry[perm[i]];
        ++total;
        if (f.extreme(sum_squared_diff(rx, permuted))) ++hits;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
}

double monte_carlo_permutation_pvalue(std::span<const double> rx, std::vector<double> ry,
                                      const PermutationFrame& f) {
    Rng rng(kMonteCarloSeed);
    std::uint64_t hits = 0;
    for (std::size_t draw = 0; draw < kMonteCarloDraws; ++draw) {
        for (std::size_t i = ry.size() - 1; i > 0; --i) {
            std::swap(ry[i], ry[rng.below(i + 1)]);
        }
        if (f.extreme(sum_squared_diff(rx, ry))) ++hits;
    }
    return static_cast<double>(hits + 1) / static_cast<double>(kMonteCarloDraws + 1);
}

std::string format_edge(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        const double mid = static_cast<double>(i + 1 + j) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
        i = j;
    }
    return ranks;
}

double auc_lower_score_positive(std::span<const ScoredSample> samples) {
    std::vector<double> values;
    values.reserve(samples.size());
    std::size_t n_correct = 0;
    for (const auto& s : samples) {
        values.push_back(s.consistency);
        if (s.correct) ++n_correct;
    }
    require_finite(values, "consistency");
    const std::size_t n_incorrect = samples.size() - n_correct;
    if (n_correct == 0 || n_incorrect == 0) {
        throw Error(ErrorKind::UndefinedAuc, "AUC needs at least one correct and one incorrect sample");
    }

    const auto ranks = average_ranks(values);
    double rank_sum_incorrect = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].correct) rank_sum_incorrect += ranks[i];
    }
    const double ni = static_cast<double>(n_incorrect);
    const double u = rank_sum_incorrect - ni * (ni + 1.0) / 2.0;
    return u / (static_cast<double>(n_correct) * ni);
}

double spearman_t_pvalue(double rho, std::size_t n) {
    if (n < 3) throw Error(ErrorKind::InsufficientData, "t approximation needs n >= 3");
    const double dof = static_cast<double>(n - 2);
    const double denom = (1.0 + rho) * (1.0 - rho);
    if (denom <= 0.0) return std::numeric_limits<double>::min();
    const double t = std::abs(rho) * std::sqrt(dof / denom);
    const boost::math::students_t_distribution<double> dist(dof);
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
    return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw Error(ErrorKind::InsufficientData, "spearman inputs differ in length");
    }
    const std::size_t n = xs.size();
    if (n < 3) throw Error(ErrorKind::InsufficientData, "spearman needs n >= 3");
    require_finite(xs, "xs");
    require_finite(ys, "ys");

    const double tx = twelve_rank_ss(xs);
    const double ty = twelve_rank_ss(ys);
    if (tx == 0.0 || ty == 0.0) {
        throw Error(ErrorKind::UndefinedCorrelation, "spearman is undefined for a constant input");
    }
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double d2 = sum_squared_diff(rx, ry);

    // rho = (Sx + Sy - sum d^2) / (2 sqrt(Sx Sy)) with S = (n^3 - n - ties) / 12.
    SpearmanResult out;
    out.rho = std::clamp((tx + ty - 12.0 * d2) / (2.0 * std::sqrt(tx * ty)), -1.0, 1.0);

    const PermutationFrame frame{tx + ty, std::abs(tx + ty - 12.0 * d2)};
    if (n <= kExactPermutationMax) {
        out.p_value = exact_permutation_pvalue(rx, ry, frame);
    } else if (n < kAsymptoticMin) {
        out.p_value = monte_carlo_permutation_pvalue(rx, ry, frame);
    } else {
        out.p_value = spearman_t_pvalue(out.rho, n);
    }
    return out;
}

SpearmanResult consistency_spearman(std::span<const ScoredSample> samples) {
    std::vector<double> cs;
    std::vector<double> ok;
    cs.reserve(samples.size());
    ok.reserve(samples.size());
    for (const auto& s : samples) {
        cs.push_back(s.consistency);
        ok.push_back(s.correct ? 1.0 : 0.0);
    }
    return spearman(cs, ok);
}

CorrelationReport correlation_report(std::span<const ScoredSample> samples) {
    CorrelationReport r;
    r.n = samples.size();
    r.auc = auc_lower_score_positive(samples);
    const auto s = consistency_spearman(samples);
    r.spearman_rho = s.rho;
    r.p_value = s.p_value;
    return r;
}

std::string BucketRow::label() const {
    if (!upper) return ">= " + format_edge(lower);
    if (lower == 0.0) return "< " + format_edge(*upper);
    return format_edge(lower) + "-" + format_edge(*upper);
}

std::vector<BucketRow> bucket_accuracy(std::span<const ScoredSample> samples, std::span<const double> edges) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!std::isfinite(edges[i]) || edges[i] <= 0.0 || (i > 0 && edges[i] <= edges[i - 1])) {
            throw Error(ErrorKind::InvalidEdges, "bucket edges must be positive and strictly ascending");
        }
    }
    std::vector<BucketRow> rows(edges.size() + 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].lower = i == 0 ? 0.0 : edges[i - 1];
        if (i < edges.size()) rows[i].upper = edges[i];
    }
    for (const auto& s : samples) {
        const auto idx = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), s.consistency) - edges.begin());
        ++rows[idx].n;
        if (s.correct) ++rows[idx].n_correct;
    }
    for (auto& row : rows) {
        if (row.n > 0) row.accuracy = static_cast<double>(row.n_correct) / static_cast<double>(row.n);
    }
    return rows;
}

const char* to_string(Partition p) noexcept {
    switch (p) {
        case Partition::S11: return "S11";
        case Partition::S10: return "S10";
        case Partition::S01: return "S01";
        case Partition::S00: return "S00";
    }
    return "?";
}

Partition partition_of(bool correct_a, bool correct_b) noexcept {
    if (correct_a) return correct_b ? Partition::S11 : Partition::S10;
    return correct_b ? Partition::S01 : Partition::S00;
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorKind::InsufficientData, "median of an empty set");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2.0;
}

std::vector<PartitionRow> partition_consistency_stats(std::span<const PairedScore> samples) {
    std::array<std::vector<double>, 4> groups;
    for (const auto& s : samples) {
        if (!s.consistency_a) continue;
        groups[static_cast<std::size_t>(partition_of(s.correct_a, s.correct_b))].push_back(*s.consistency_a);
    }
    std::vector<PartitionRow> rows;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        PartitionRow row;
        row.partition = static_cast<Partition>(i);
        row.n = groups[i].size();
        if (row.n > 0) {
            row.mean = std::accumulate(groups[i].begin(), groups[i].end(), 0.0) / static_cast<double>(row.n);
            row.median = median(groups[i]);
        }
        rows.push_back(row);
    }
    return rows;
}

const char* to_string(GroupMetric m) noexcept {
    switch (m) {
        case GroupMetric::Accuracy: return "accuracy";
        case GroupMetric::Spearman: return "spearman";
        case GroupMetric::PreferredModelRate: return "preferred-model-rate";
    }
    return "?";
}

GroupMetric parse_group_metric(const std::string& name) {
    if (name == "accuracy") return GroupMetric::Accuracy;
    if (name == "spearman") return GroupMetric::Spearman;
    if (name == "preferred-model-rate") return GroupMetric::PreferredModelRate;
    throw Error(ErrorKind::InvalidConfig, "unknown group metric '" + name + "'");
}

std::vector<GroupRow> grouped_report(std::span<const PairedScore> samples, const std::string& dimension,
                                     GroupMetric metric) {
    std::map<std::string, std::vector<const PairedScore*>> groups;
    for (const auto& s : samples) {
        auto it = s.labels.find(dimension);
        if (it == s.labels.end()) {
            throw Error(ErrorKind::MissingLabel, "sample lacks group label '" + dimension + "'");
        }
        groups[it->second].push_back(&s);
    }

    std::vector<GroupRow> rows;
    for (const auto& [label, members] : groups) {
        GroupRow row;
        row.label = label;
        switch (metric) {
            case GroupMetric::Accuracy: {
                row.n = members.size();
                const auto hits = std::count_if(members.begin(), members.end(), [](auto* s) { return s->correct_a; });
                row.value = static_cast<double>(hits) / static_cast<double>(row.n);
                break;
            }
            case GroupMetric::Spearman: {
                std::vector<ScoredSample> scored;
                for (const auto* s : members) {
                    if (s->consistency_a) scored.push_back({*s->consistency_a, s->correct_a, {}});
                }
                row.n = scored.size();
                try {
                    const auto r = consistency_spearman(scored);
                    row.value = r.rho;
                    row.p_value = r.p_value;
                } catch (const Error& e) {
                    row.note = e.what();
                }
                break;
            }
            case GroupMetric::PreferredModelRate: {
                std::size_t preferred = 0;
                for (const auto* s : members) {
                    if (!s->consistency_a || !s->consistency_b) continue;
                    ++row.n;
                    if (*s->consistency_b < *s->consistency_a) ++preferred;
                }
                if (row.n > 0) {
                    row.value = static_cast<double>(preferred) / static_cast<double>(row.n);
                } else {
                    row.note = "no samples with both consistencies";
                }
                break;
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ScoredSample> scored_samples(const PairedDataset& data, const std::string& model) {
    std::vector<std::size_t> all(data.samples.size());
    std::iota(all.begin(), all.end(), 0);
    return scored_samples(data, model, all);
}

std::vector<ScoredSample> scored_samples(const PairedDataset& data, const std::string& model,
                                         std::span<const std::size_t> indices) {
    std::vector<ScoredSample> out;
    for (std::size_t i : indices) {
        const SampleRecord& s = data.samples.at(i);
        if (auto c = s.consistency(model)) out.push_back({*c, s.correct(model), s.labels});
    }
    return out;
}

std::vector<PairedScore> paired_scores(const PairedDataset& data) {
    std::vector<PairedScore> out;
    out.reserve(data.samples.size());
    for (const auto& s : data.samples) {
        PairedScore p;
        p.consistency_a = s.consistency(data.model_a);
        p.correct_a = s.correct(data.model_a);
        if (data.has_model_b()) {
            p.consistency_b = s.consistency(data.model_b);
            p.correct_b = s.correct(data.model_b);
        }
        p.labels = s.labels;
        out.push_back(std::move(p));
    }
    return out;
}

SplitHalfResult split_half_spearman(std::span<const ScoredSample> samples, std::uint64_t seed) {
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    const std::size_t half = order.size() / 2;
    std::vector<ScoredSample> first;
    std::vector<ScoredSample> second;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < half ? first : second).push_back(samples[order[i]]);
    }
    SplitHalfResult out;
    out.n_first = first.size();
    out.n_second = second.size();
    out.first = consistency_spearman(first);
    out.second = consistency_spearman(second);
    return out;
}

}  // namespace zoomsig
