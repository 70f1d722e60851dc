#include "fixtures.hpp"

#include "zoomsig/error.hpp"
#include "zoomsig/router.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <utility>

namespace zoomsig {
namespace {

const ConfusionCounts kReferenceCounts{883, 383, 79, 236};

TEST(Confusion, Counts) {
    const std::vector<CorrectnessPair> one{{true, true}};
    EXPECT_EQ(confusion(one), (ConfusionCounts{1, 0, 0, 0}));

    EXPECT_EQ(kReferenceCounts.total(), 1581u);
    EXPECT_NEAR(kReferenceCounts.oracle_accuracy(), 1345.0 / 1581.0, 1e-15);
    EXPECT_NEAR(kReferenceCounts.oracle_accuracy(), 0.8507, 5e-5);
    EXPECT_NEAR(kReferenceCounts.accuracy_a(), 0.8008, 5e-5);
    EXPECT_NEAR(kReferenceCounts.accuracy_b(), 0.6085, 5e-5);
    EXPECT_THROW((void)ConfusionCounts{}.accuracy_a(), Error);
}

TEST(Confusion, FromDatasetCountsParseFailuresAsWrong) {
    PairedDataset d;
    d.model_a = "A";
    d.model_b = "B";
    d.samples.push_back(fixture::paired_sample(0, true, false, 10.0, std::nullopt));
    d.samples.push_back(fixture::paired_sample(1, false, true, 10.0, 5.0));
    EXPECT_EQ(confusion(d), (ConfusionCounts{0, 1, 1, 0}));
}

TEST(Strategy, ParseAndName) {
    EXPECT_EQ(Strategy::parse("consistency").kind, Strategy::Kind::Consistency);
    EXPECT_EQ(Strategy::parse("single:B").kind, Strategy::Kind::SingleB);
    const auto v = Strategy::parse("vote-agree:75");
    EXPECT_EQ(v.kind, Strategy::Kind::VoteAgree);
    EXPECT_EQ(v.vote_distance, 75.0);
    EXPECT_EQ(v.name(), "vote-agree:75");
    EXPECT_EQ(Strategy::parse("vote-agree").vote_distance, 50.0);
    EXPECT_THROW(Strategy::parse("vote-agree:x"), Error);
    EXPECT_THROW(Strategy::parse("vote-agree:-5"), Error);
    EXPECT_THROW(Strategy::parse("argmax"), Error);
}

TEST(ConsistencyChoice, TiesGoToA) {
    EXPECT_EQ(consistency_choice(100.0, 100.0), Choice::A);
    EXPECT_EQ(consistency_choice(100.0, 99.0), Choice::B);
    EXPECT_EQ(consistency_choice(std::nullopt, 50.0), Choice::B);
    EXPECT_EQ(consistency_choice(50.0, std::nullopt), Choice::A);
    EXPECT_EQ(consistency_choice(std::nullopt, std::nullopt), Choice::None);
}

TEST(Route, ConsistencyHandlesParseFailures) {
    PairedDataset d;
    d.model_a = "A";
    d.model_b = "B";
    d.samples.push_back(fixture::paired_sample(0, false, true, std::nullopt, 50.0));
    d.samples.push_back(fixture::paired_sample(1, false, false, std::nullopt, std::nullopt));
    const auto r = route(d, Strategy{});
    EXPECT_EQ(r.samples[0].choice, Choice::B);
    EXPECT_TRUE(r.samples[0].correct);
    EXPECT_EQ(r.samples[1].choice, Choice::None);
    EXPECT_FALSE(r.samples[1].correct);
}

TEST(Route, MidpointAndVoteAgree) {
    PairedDataset d;
    d.model_a = "A";
    d.model_b = "B";
    SampleRecord s = fixture::paired_sample(0, true, true, 0.0, 0.0);
    s.gt_bbox = {150, 100, 250, 200};
    // Step-2 points chosen so each final lands back on its step-1 point.
    for (const auto& [name, p1] : {std::pair{"A", Point{100, 100}}, std::pair{"B", Point{300, 200}}}) {
        s.traces[name] = make_trace(0.5, p1, to_crop(p1, make_crop(p1, 0.5)));
    }
    rescore(s);
    d.samples.push_back(s);

    const auto mid = route(d, Strategy::parse("midpoint"));
    EXPECT_EQ(mid.samples[0].choice, Choice::Fused);
    EXPECT_NEAR(mid.samples[0].prediction->x, 200.0, 1e-9);
    EXPECT_NEAR(mid.samples[0].prediction->y, 150.0, 1e-9);
    EXPECT_TRUE(mid.samples[0].correct);

    // Finals 223.6 apart: below 250 votes A, above 200 fuses.
    const auto agree = route(d, Strategy::parse("vote-agree:250"));
    EXPECT_EQ(agree.samples[0].choice, Choice::A);
    const auto disagree = route(d, Strategy::parse("vote-agree:200"));
    EXPECT_EQ(disagree.samples[0].choice, Choice::Fused);
    EXPECT_NEAR(disagree.samples[0].prediction->x, 200.0, 1e-9);
}

TEST(Route, StageSplitNeedsHybridTraces) {
    auto d = fixture::counts_dataset(3, 1, 1, 1, 0, 0);
    try {
        route(d, Strategy::parse("stage-split"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
    }
    d.samples[0].traces["A->B"] = fixture::trace_with(10.0, true);
    rescore(d.samples[0]);
    const auto r = route(d, Strategy::parse("stage-split"));
    EXPECT_TRUE(r.samples[0].correct);
    EXPECT_FALSE(r.samples[1].correct);  // no hybrid trace for this sample
}

TEST(Route, ReferenceRunOutcome) {
    const auto d = fixture::counts_dataset(883, 383, 79, 236, 48, 35);
    EXPECT_EQ(confusion(d), kReferenceCounts);
    const auto r = route(d, Strategy{});
    const RoutingOutcome& o = r.outcome;
    EXPECT_EQ(o.gains, 48u);
    EXPECT_EQ(o.losses, 35u);
    EXPECT_EQ(o.n_correct, 883u + 348u + 48u);
    EXPECT_NEAR(o.accuracy, 1279.0 / 1581.0, 1e-15);
    EXPECT_NEAR(o.delta_vs_model_a, 13.0 / 1581.0, 1e-15);
    EXPECT_NEAR(*o.eta, 13.0 / 79.0, 1e-15);
    EXPECT_NEAR(*o.disagreement_precision, 48.0 / 83.0, 1e-15);
    EXPECT_NEAR(*o.f10, 348.0 / 383.0, 1e-15);
    EXPECT_NEAR(*o.f01, 48.0 / 79.0, 1e-15);
}

TEST(Route, SingleAndOracleRows) {
    const auto d = fixture::counts_dataset(20, 7, 5, 3, 2, 1);
    const ConfusionCounts c = confusion(d);
    EXPECT_DOUBLE_EQ(route(d, Strategy::parse("single:A")).outcome.accuracy, c.accuracy_a());
    const auto b = route(d, Strategy::parse("single:B")).outcome;
    EXPECT_DOUBLE_EQ(b.delta_vs_model_a, c.accuracy_b() - c.accuracy_a());
    EXPECT_EQ(b.n_correct, 25u);
    EXPECT_EQ(static_cast<std::int64_t>(b.gains) - static_cast<std::int64_t>(b.losses), 5 - 7);
    const auto oracle = route(d, Strategy::parse("oracle")).outcome;
    EXPECT_DOUBLE_EQ(oracle.accuracy, c.oracle_accuracy());
    EXPECT_DOUBLE_EQ(*oracle.eta, 1.0);
}

TEST(RoutingCondition, Examples) {
    const auto ref = routing_condition(kReferenceCounts, 348.0 / 383.0, 48.0 / 79.0);
    EXPECT_TRUE(ref.improves);
    EXPECT_NEAR(ref.gains_term, 48.0, 1e-9);
    EXPECT_NEAR(ref.losses_term, 35.0, 1e-9);
    const auto exact = routing_condition(kReferenceCounts, std::uint64_t{348}, std::uint64_t{48});
    EXPECT_TRUE(exact.improves);
    EXPECT_EQ(exact.gains_term, 48.0);
    EXPECT_EQ(exact.losses_term, 35.0);

    const ConfusionCounts no_headroom{10, 5, 0, 2};
    for (double f : {0.0, 0.3, 1.0}) EXPECT_FALSE(routing_condition(no_headroom, f, f).improves);
    EXPECT_TRUE(routing_condition(kReferenceCounts, 1.0, 1.0).improves);
    EXPECT_FALSE(routing_condition(no_headroom, 1.0, 1.0).improves);
    EXPECT_THROW(routing_condition(kReferenceCounts, std::uint64_t{400}, std::uint64_t{0}), Error);
}

TEST(DisagreementStats, ReferenceValues) {
    const auto base = disagreement_stats(kReferenceCounts);
    EXPECT_NEAR(base.pi, 79.0 / 462.0, 1e-15);
    EXPECT_NEAR(base.pi, 0.171, 5e-4);
    EXPECT_NEAR(base.required_lift, 2.924, 5e-4);

    const auto d = fixture::counts_dataset(883, 383, 79, 236, 48, 35);
    const auto r = route(d, Strategy{});
    const auto s = disagreement_stats(kReferenceCounts, r.samples);
    EXPECT_EQ(s.b_selections, 83u);
    EXPECT_NEAR(*s.precision_b, 0.578, 5e-4);
    EXPECT_NEAR(*s.eta, 0.165, 5e-4);

    try {
        disagreement_stats(ConfusionCounts{5, 0, 0, 5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UndefinedStats);
    }
    EXPECT_TRUE(std::isinf(disagreement_stats(ConfusionCounts{1, 3, 0, 0}).required_lift));
}

TEST(Route, ConditionMatchesRealizedGainAndAccuracyIdentity) {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n11 = gen() % 15, n10 = gen() % 15, n01 = gen() % 15, n00 = 1 + gen() % 5;
        const std::size_t losses = n10 ? gen() % (n10 + 1) : 0;
        const std::size_t gains = n01 ? gen() % (n01 + 1) : 0;
        const auto d = fixture::counts_dataset(n11, n10, n01, n00, gains, losses);
        const ConfusionCounts c = confusion(d);
        const auto r = route(d, Strategy{});
        EXPECT_EQ(r.outcome.n_correct, n11 + (n10 - losses) + gains);
        const bool better = r.outcome.n_correct > n11 + n10;
        EXPECT_EQ(routing_condition(c, n10 - losses, gains).improves, better);
    }
}

TEST(Route, ArgminInvariantUnderCommonMonotoneTransform) {
    auto d = fixture::counts_dataset(10, 6, 4, 3, 3, 2);
    const auto before = route(d, Strategy{});
    for (auto& s : d.samples) {
        for (auto& [name, t] : s.traces) {
            if (t.consistency) t.consistency = std::sqrt(*t.consistency) * 10.0 + 3.0;
        }
    }
    const auto after = route(d, Strategy{});
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        EXPECT_EQ(before.samples[i].choice, after.samples[i].choice);
    }
}

TEST(Route, NoStrategyBeatsOracle) {
    const auto d = fixture::counts_dataset(12, 9, 6, 4, 4, 3);
    const double oracle = confusion(d).oracle_accuracy();
    for (const char* spec : {"consistency", "single:A", "single:B", "vote-agree:50", "oracle"}) {
        EXPECT_LE(route(d, Strategy::parse(spec)).outcome.accuracy, oracle) << spec;
    }
}

TEST(GroupedRouting, SortedByDelta) {
    PairedDataset d;
    d.model_a = "A";
    d.model_b = "B";
    d.samples.push_back(fixture::paired_sample(0, false, true, 300.0, 100.0, {{"application", "photoshop"}}));
    d.samples.push_back(fixture::paired_sample(1, true, false, 300.0, 100.0, {{"application", "vscode"}}));
    d.samples.push_back(fixture::paired_sample(2, true, true, 10.0, 100.0, {{"application", "blender"}}));
    const auto r = route(d, Strategy{});
    const auto rows = grouped_routing(d, r.samples, "application");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].label, "photoshop");
    EXPECT_EQ(rows[0].delta, 1.0);
    EXPECT_EQ(rows[1].label, "blender");
    EXPECT_EQ(rows[2].label, "vscode");
    EXPECT_EQ(rows[2].delta, -1.0);
    EXPECT_THROW(grouped_routing(d, r.samples, "os"), Error);
}

}  // namespace
}  // namespace zoomsig
