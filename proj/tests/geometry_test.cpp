#include "zoomsig/error.hpp"
#include "zoomsig/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace zoomsig {
namespace {

constexpr double kTol = 1e-9;

void expect_point(Point p, double x, double y, double tol = kTol) {
    EXPECT_NEAR(p.x, x, tol);
    EXPECT_NEAR(p.y, y, tol);
}

TEST(MakeCrop, CenteredBoxAwayFromEdges) {
    const CropBox c = make_crop({400, 400}, 0.5);
    EXPECT_EQ(c.box, (BBox{150, 150, 650, 650}));
    EXPECT_FALSE(c.clipped);
    EXPECT_EQ(c.effective_center(), (Point{400, 400}));
}

TEST(MakeCrop, FullImage) {
    const CropBox c = make_crop({500, 500}, 1.0);
    EXPECT_EQ(c.box, (BBox{0, 0, 1000, 1000}));
    EXPECT_FALSE(c.clipped);
}

TEST(MakeCrop, ShiftsAwayFromLeftEdge) {
    // Requested x-range [-150, 350] moves right by 150.
    const CropBox c = make_crop({100, 500}, 0.5);
    EXPECT_EQ(c.box, (BBox{0, 250, 500, 750}));
    EXPECT_EQ(c.effective_center(), (Point{250, 500}));
    EXPECT_TRUE(c.clipped);
}

TEST(MakeCrop, ShiftsEachAxisIndependently) {
    const CropBox c = make_crop({990, 20}, 0.2);
    EXPECT_EQ(c.box, (BBox{800, 0, 1000, 200}));
    EXPECT_TRUE(c.clipped);
}

TEST(MakeCrop, RejectsRatioOutsideUnitInterval) {
    for (double r : {0.0, -0.1, 1.0001, std::nan("")}) {
        try {
            make_crop({500, 500}, r);
            FAIL() << "accepted r=" << r;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::InvalidRatio);
        }
    }
}

TEST(MakeCrop, SizePreservedEverywhere) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> coord(-200.0, 1200.0);
    std::uniform_real_distribution<double> ratio(0.05, 1.0);
    for (int i = 0; i < 10'000; ++i) {
        const double r = ratio(gen);
        const CropBox c = make_crop({coord(gen), coord(gen)}, r);
        EXPECT_NEAR(c.box.x1 - c.box.x0, r * 1000.0, kTol);
        EXPECT_NEAR(c.box.y1 - c.box.y0, r * 1000.0, kTol);
        EXPECT_GE(c.box.x0, 0.0);
        EXPECT_GE(c.box.y0, 0.0);
        EXPECT_LE(c.box.x1, 1000.0);
        EXPECT_LE(c.box.y1, 1000.0);
    }
    for (Point corner : {Point{0, 0}, Point{0, 1000}, Point{1000, 0}, Point{1000, 1000}}) {
        const CropBox c = make_crop(corner, 0.5);
        EXPECT_EQ(c.box.x1 - c.box.x0, 500.0);
        EXPECT_EQ(c.box.y1 - c.box.y0, 500.0);
        EXPECT_TRUE(c.clipped);
    }
}

TEST(CropMap, CenterMapsToCenter) {
    const CropBox c = make_crop({100, 500}, 0.5);
    expect_point(to_crop(c.effective_center(), c), 500, 500);
    expect_point(from_crop({500, 500}, c), 250, 500);
}

TEST(CropMap, WorkedExamples) {
    const CropBox c = make_crop({400, 400}, 0.5);
    expect_point(to_crop({450, 430}, c), 600, 560);
    expect_point(to_crop({150, 150}, c), 0, 0);
    expect_point(from_crop({600, 560}, c), 450, 430);

    const CropBox clipped = make_crop({100, 500}, 0.5);
    expect_point(from_crop({0, 0}, clipped), 0, 250);
}

TEST(CropMap, RoundTripProperty) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> coord(-100.0, 1100.0);
    std::uniform_real_distribution<double> ratio(0.05, 1.0);
    for (int i = 0; i < 10'000; ++i) {
        const CropBox c = make_crop({coord(gen), coord(gen)}, ratio(gen));
        const Point q{coord(gen), coord(gen)};
        expect_point(from_crop(to_crop(q, c), c), q.x, q.y);
    }
}

TEST(Consistency, Examples) {
    EXPECT_EQ(consistency({500, 500}), 0.0);
    EXPECT_NEAR(consistency({600, 560}), std::sqrt(13600.0), 1e-12);
    EXPECT_NEAR(consistency({1000, 1000}), 500.0 * std::sqrt(2.0), 1e-9);
}

TEST(Consistency, SymmetricAboutCropCenterAndBounded) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> off(-500.0, 500.0);
    for (int i = 0; i < 10'000; ++i) {
        const double a = off(gen);
        const double b = off(gen);
        EXPECT_NEAR(consistency({500 + a, 500 + b}), consistency({500 - a, 500 - b}), 1e-9);
        const double c = consistency({500 + a, 500 + b});
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 500.0 * std::sqrt(2.0) + 1e-9);
    }
}

TEST(ImpliedStep1Error, LinearInConsistency) {
    EXPECT_DOUBLE_EQ(implied_step1_error(100, 0.5), 50.0);
    EXPECT_EQ(implied_step1_error(0, 0.3), 0.0);
    EXPECT_NEAR(implied_step1_error(116.619, 0.5), 58.3095, 1e-9);
    EXPECT_THROW(implied_step1_error(10, 1.5), Error);
}

TEST(LinearEstimator, ExactUnderPerfectStepTwo) {
    // Target inside an unclipped crop, step 2 predicts phi(t) exactly.
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> ratio(0.05, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int checked = 0;
    while (checked < 10'000) {
        const double r = ratio(gen);
        const double half = r * 500.0;
        const Point eps{unit(gen) * half * 0.99, unit(gen) * half * 0.99};
        std::uniform_real_distribution<double> inner(half, 1000.0 - half);
        const Point p1{inner(gen), inner(gen)};
        const Point t{p1.x - eps.x, p1.y - eps.y};
        const CropBox c = make_crop(p1, r);
        ASSERT_FALSE(c.clipped);
        ASSERT_TRUE(target_in_crop(t, c));
        EXPECT_NEAR(consistency(to_crop(t, c)) * r, std::hypot(eps.x, eps.y), 1e-9);
        ++checked;
    }
}

TEST(TargetInCrop, InclusiveEdges) {
    const CropBox c = make_crop({400, 400}, 0.5);
    EXPECT_TRUE(target_in_crop({400, 400}, c));
    EXPECT_FALSE(target_in_crop({700, 400}, c));
    EXPECT_TRUE(target_in_crop({650, 650}, c));
}

TEST(TargetInCrop, InfinityNormTrigger) {
    // |eps|_inf > r * 500 with an unclipped crop puts the target outside.
    const CropBox c = make_crop({500, 500}, 0.5);
    EXPECT_FALSE(target_in_crop({500 - 250.5, 500}, c));
    EXPECT_TRUE(target_in_crop({500 - 249.5, 500 + 249.5}, c));
}

TEST(PointInBBox, Containment) {
    const BBox box{10, 10, 20, 20};
    EXPECT_TRUE(point_in_bbox({15, 15}, box));
    EXPECT_TRUE(point_in_bbox({10, 17}, box));
    EXPECT_TRUE(point_in_bbox({20, 20}, box));
    EXPECT_FALSE(point_in_bbox({0, 0}, box));
}

TEST(PointInBBox, DegenerateBoxRejected) {
    try {
        point_in_bbox({0, 0}, {20, 10, 10, 20});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidBox);
    }
}

TEST(MakeTrace, DerivesCropFinalAndConsistency) {
    const ZoomTrace t = make_trace(0.5, Point{400, 400}, Point{600, 560});
    ASSERT_TRUE(t.final_point && t.consistency && t.crop);
    expect_point(*t.final_point, 450, 430);
    EXPECT_NEAR(*t.consistency, std::sqrt(13600.0), 1e-12);
    EXPECT_EQ(t.parse_failed_stage, ParseStage::None);

    const ZoomTrace step2 = make_trace(0.5, Point{400, 400}, std::nullopt);
    EXPECT_EQ(step2.parse_failed_stage, ParseStage::Step2);
    EXPECT_TRUE(step2.crop.has_value());
    EXPECT_FALSE(step2.consistency.has_value());

    const ZoomTrace step1 = make_trace(0.5, std::nullopt, std::nullopt);
    EXPECT_EQ(step1.parse_failed_stage, ParseStage::Step1);
    EXPECT_FALSE(step1.has_prediction());
}

TEST(CropFromCorners, ChecksSideAgainstRatio) {
    const CropBox c = crop_from_corners({0, 250, 500, 750}, 0.5, Point{100, 500});
    EXPECT_TRUE(c.clipped);
    EXPECT_EQ(c, make_crop({100, 500}, 0.5));
    EXPECT_THROW(crop_from_corners({0, 0, 400, 500}, 0.5, std::nullopt), Error);
}

}  // namespace
}  // namespace zoomsig
