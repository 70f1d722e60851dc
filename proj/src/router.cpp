#include "zoomsig/router.hpp"

#include "zoomsig/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace zoomsig {

std::uint64_t ConfusionCounts::count(Partition p) const noexcept {
    switch (p) {
        case Partition::S11: return n11;
        case Partition::S10: return n10;
        case Partition::S01: return n01;
        case Partition::S00: return n00;
    }
    return 0;
}

void ConfusionCounts::add(Partition p) noexcept {
    switch (p) {
        case Partition::S11: ++n11; break;
        case Partition::S10: ++n10; break;
        case Partition::S01: ++n01; break;
        case Partition::S00: ++n00; break;
    }
}

void ConfusionCounts::validate() const {
    if (total() == 0) throw Error(ErrorKind::EmptyDataset, "confusion counts are all zero");
}

double ConfusionCounts::ratio(std::uint64_t k) const {
    validate();
    return static_cast<double>(k) / static_cast<double>(total());
}

ConfusionCounts confusion(std::span<const CorrectnessPair> samples) {
    ConfusionCounts counts;
    for (const auto& s : samples) counts.add(partition_of(s.correct_a, s.correct_b));
    return counts;
}

ConfusionCounts confusion(const PairedDataset& data) {
    ConfusionCounts counts;
    for (const auto& s : data.samples) {
        counts.add(partition_of(s.correct(data.model_a), data.has_model_b() && s.correct(data.model_b)));
    }
    return counts;
}

Strategy Strategy::parse(const std::string& spec) {
    Strategy s;
    if (spec == "consistency") {
        s.kind = Kind::Consistency;
    } else if (spec == "single:A") {
        s.kind = Kind::SingleA;
    } else if (spec == "single:B") {
        s.kind = Kind::SingleB;
    } else if (spec == "midpoint") {
        s.kind = Kind::Midpoint;
    } else if (spec == "stage-split") {
        s.kind = Kind::StageSplit;
    } else if (spec == "oracle") {
        s.kind = Kind::Oracle;
    } else if (spec.rfind("vote-agree", 0) == 0) {
        s.kind = Kind::VoteAgree;
        const std::string rest = spec.substr(std::string("vote-agree").size());
        if (!rest.empty()) {
            if (rest.front() != ':') throw Error(ErrorKind::InvalidConfig, "bad strategy '" + spec + "'");
            try {
                std::size_t used = 0;
                s.vote_distance = std::stod(rest.substr(1), &used);
                if (used != rest.size() - 1) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw Error(ErrorKind::InvalidConfig, "bad vote-agree distance in '" + spec + "'");
            }
            if (!(s.vote_distance > 0.0) || !std::isfinite(s.vote_distance)) {
                throw Error(ErrorKind::InvalidConfig, "vote-agree distance must be > 0");
            }
        }
    } else {
        throw Error(ErrorKind::InvalidConfig, "unknown strategy '" + spec + "'");
    }
    return s;
}

std::string Strategy::name() const {
    switch (kind) {
        case Kind::Consistency: return "consistency";
        case Kind::SingleA: return "single:A";
        case Kind::SingleB: return "single:B";
        case Kind::Midpoint: return "midpoint";
        case Kind::StageSplit: return "stage-split";
        case Kind::Oracle: return "oracle";
        case Kind::VoteAgree: {
            char buf[48];
            std::snprintf(buf, sizeof buf, "vote-agree:%g", vote_distance);
            return buf;
        }
    }
    return "?";
}

Choice consistency_choice(std::optional<double> c_a, std::optional<double> c_b) noexcept {
    if (!c_a && !c_b) return Choice::None;
    const double inf = std::numeric_limits<double>::infinity();
    return c_a.value_or(inf) <= c_b.value_or(inf) ? Choice::A : Choice::B;
}

namespace {

std::optional<Point> final_of(const SampleRecord& s, const std::string& model) {
    const ZoomTrace* t = s.trace(model);
    return t ? t->final_point : std::nullopt;
}

Point midpoint(Point a, Point b) { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

// Falls back to whichever model produced something when fusion is impossible.
void single_fallback(RoutedSample& out, const std::optional<Point>& a, const std::optional<Point>& b) {
    if (a) {
        out.choice = Choice::A;
        out.prediction = a;
    } else if (b) {
        out.choice = Choice::B;
        out.prediction = b;
    }
}

RoutedSample route_one(const PairedDataset& data, const SampleRecord& s, const Strategy& strategy,
                       const std::string& hybrid) {
    const auto pred_a = final_of(s, data.model_a);
    const auto pred_b = data.has_model_b() ? final_of(s, data.model_b) : std::nullopt;
    const bool correct_a = s.correct(data.model_a);
    const bool correct_b = data.has_model_b() && s.correct(data.model_b);

    RoutedSample out;
    out.partition = partition_of(correct_a, correct_b);

    switch (strategy.kind) {
        case Strategy::Kind::Consistency:
            out.choice = consistency_choice(s.consistency(data.model_a),
                                            data.has_model_b() ? s.consistency(data.model_b) : std::nullopt);
            if (out.choice == Choice::None) single_fallback(out, pred_a, pred_b);
            if (out.choice == Choice::A) out.prediction = pred_a;
            if (out.choice == Choice::B) out.prediction = pred_b;
            break;
        case Strategy::Kind::SingleA:
            out.choice = Choice::A;
            out.prediction = pred_a;
            break;
        case Strategy::Kind::SingleB:
            out.choice = Choice::B;
            out.prediction = pred_b;
            break;
        case Strategy::Kind::Midpoint:
            if (pred_a && pred_b) {
                out.choice = Choice::Fused;
                out.prediction = midpoint(*pred_a, *pred_b);
            } else {
                single_fallback(out, pred_a, pred_b);
            }
            break;
        case Strategy::Kind::VoteAgree:
            if (pred_a && pred_b) {
                const double d = std::hypot(pred_a->x - pred_b->x, pred_a->y - pred_b->y);
                if (d < strategy.vote_distance) {
                    out.choice = Choice::A;
                    out.prediction = pred_a;
                } else {
                    out.choice = Choice::Fused;
                    out.prediction = midpoint(*pred_a, *pred_b);
                }
            } else {
                single_fallback(out, pred_a, pred_b);
            }
            break;
        case Strategy::Kind::StageSplit:
            out.choice = Choice::Hybrid;
            out.prediction = final_of(s, hybrid);
            break;
        case Strategy::Kind::Oracle:
            if (correct_a || !correct_b) {
                out.choice = Choice::A;
                out.prediction = pred_a;
            } else {
                out.choice = Choice::B;
                out.prediction = pred_b;
            }
            break;
    }

    if (out.choice == Choice::A) {
        out.correct = correct_a;
    } else if (out.choice == Choice::B) {
        out.correct = correct_b;
    } else {
        out.correct = out.prediction && point_in_bbox(*out.prediction, s.gt_bbox);
    }
    return out;
}

std::optional<double> fraction(std::uint64_t k, std::uint64_t n) {
    if (n == 0) return std::nullopt;
    return static_cast<double>(k) / static_cast<double>(n);
}

}  // namespace

RouteResult route(const PairedDataset& data, const Strategy& strategy) {
    if (data.samples.empty()) throw Error(ErrorKind::EmptyDataset, "nothing to route");
    const bool needs_b = strategy.kind != Strategy::Kind::SingleA;
    if (needs_b && !data.has_model_b()) {
        throw Error(ErrorKind::InvalidConfig, "strategy " + strategy.name() + " needs a second model");
    }
    const std::string hybrid = data.has_model_b() ? data.hybrid_model() : std::string();
    if (strategy.kind == Strategy::Kind::StageSplit) {
        const bool any = std::any_of(data.samples.begin(), data.samples.end(),
                                     [&](const SampleRecord& s) { return s.trace(hybrid) != nullptr; });
        if (!any) {
            throw Error(ErrorKind::InvalidConfig,
                        "stage-split needs hybrid traces under model '" + hybrid + "'; none in the input");
        }
    }

    RouteResult result;
    result.samples.reserve(data.samples.size());
    ConfusionCounts counts;
    std::uint64_t correct_s10 = 0;
    std::uint64_t correct_s01 = 0;
    RoutingOutcome& o = result.outcome;
    o.strategy = strategy.name();

    for (const auto& s : data.samples) {
        RoutedSample r = route_one(data, s, strategy, hybrid);
        counts.add(r.partition);
        const bool correct_a = r.partition == Partition::S11 || r.partition == Partition::S10;
        if (r.correct) ++o.n_correct;
        if (r.correct && !correct_a) ++o.gains;
        if (!r.correct && correct_a) ++o.losses;
        if (r.correct && r.partition == Partition::S10) ++correct_s10;
        if (r.correct && r.partition == Partition::S01) ++correct_s01;
        result.samples.push_back(r);
    }

    o.n = counts.total();
    o.accuracy = static_cast<double>(o.n_correct) / static_cast<double>(o.n);
    o.delta_vs_model_a = o.accuracy - counts.accuracy_a();
    if (counts.n01 > 0) {
        o.eta = (static_cast<double>(o.gains) - static_cast<double>(o.losses)) / static_cast<double>(counts.n01);
    }
    o.f10 = fraction(correct_s10, counts.n10);
    o.f01 = fraction(correct_s01, counts.n01);
    if (counts.n10 + counts.n01 > 0) {
        o.disagreement_precision = disagreement_stats(counts, result.samples).precision_b;
    }
    return result;
}

RoutingCondition routing_condition(const ConfusionCounts& counts, double f10, double f01) {
    counts.validate();
    RoutingCondition out;
    out.gains_term = f01 * static_cast<double>(counts.n01);
    out.losses_term = (1.0 - f10) * static_cast<double>(counts.n10);
    out.improves = out.gains_term > out.losses_term;
    return out;
}

RoutingCondition routing_condition(const ConfusionCounts& counts, std::uint64_t a_kept_s10,
                                   std::uint64_t b_taken_s01) {
    counts.validate();
    if (a_kept_s10 > counts.n10 || b_taken_s01 > counts.n01) {
        throw Error(ErrorKind::InvalidConfig, "selection counts exceed partition sizes");
    }
    const std::uint64_t lost = counts.n10 - a_kept_s10;
    RoutingCondition out;
    out.gains_term = static_cast<double>(b_taken_s01);
    out.losses_term = static_cast<double>(lost);
    out.improves = b_taken_s01 > lost;
    return out;
}

DisagreementStats disagreement_stats(const ConfusionCounts& counts) {
    const std::uint64_t d = counts.n10 + counts.n01;
    if (d == 0) throw Error(ErrorKind::UndefinedStats, "disagreement set S10 u S01 is empty");
    DisagreementStats out;
    out.pi = static_cast<double>(counts.n01) / static_cast<double>(d);
    out.required_lift = out.pi > 0.0 ? 0.5 / out.pi : std::numeric_limits<double>::infinity();
    return out;
}

DisagreementStats disagreement_stats(const ConfusionCounts& counts, std::span<const RoutedSample> routed) {
    DisagreementStats out = disagreement_stats(counts);
    std::int64_t net = 0;
    for (const auto& r : routed) {
        const bool in_s10 = r.partition == Partition::S10;
        const bool in_s01 = r.partition == Partition::S01;
        if (!in_s10 && !in_s01) continue;
        if (r.choice == Choice::B) {
            ++out.b_selections;
            if (in_s01) ++out.b_correct_selections;
        }
        // A correct on S10, B correct on S01: net change versus always-A.
        if (in_s01 && r.correct) ++net;
        if (in_s10 && !r.correct) --net;
    }
    out.precision_b = fraction(out.b_correct_selections, out.b_selections);
    if (counts.n01 > 0) out.eta = static_cast<double>(net) / static_cast<double>(counts.n01);
    return out;
}

std::vector<GroupRouting> grouped_routing(const PairedDataset& data, std::span<const RoutedSample> routed,
                                          const std::string& dimension) {
    if (routed.size() != data.samples.size()) {
        throw Error(ErrorKind::InvalidConfig, "routed samples do not match the dataset");
    }
    struct Tally {
        std::uint64_t n = 0;
        std::uint64_t a = 0;
        std::uint64_t router = 0;
    };
    std::map<std::string, Tally> tallies;
    for (std::size_t i = 0; i < routed.size(); ++i) {
        const SampleRecord& s = data.samples[i];
        auto it = s.labels.find(dimension);
        if (it == s.labels.end()) {
            throw Error(ErrorKind::MissingLabel, "sample '" + s.sample_id + "' lacks label '" + dimension + "'");
        }
        Tally& t = tallies[it->second];
        ++t.n;
        if (s.correct(data.model_a)) ++t.a;
        if (routed[i].correct) ++t.router;
    }
    std::vector<GroupRouting> rows;
    for (const auto& [label, t] : tallies) {
        GroupRouting row;
        row.label = label;
        row.n = t.n;
        row.accuracy_a = static_cast<double>(t.a) / static_cast<double>(t.n);
        row.accuracy_router = static_cast<double>(t.router) / static_cast<double>(t.n);
        row.delta = row.accuracy_router - row.accuracy_a;
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const GroupRouting& x, const GroupRouting& y) {
        return x.delta > y.delta;
    });
    return rows;
}

}  // namespace zoomsig
