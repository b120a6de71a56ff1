#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tistop/error.hpp"
#include "tistop/numerics.hpp"
#include "tistop/strategy.hpp"

using namespace tistop;

TEST(ContinuationSet, SortsIntervals) {
    const ContinuationSet c({{2.0, 3.0}, {-1.0, 1.0}});
    ASSERT_EQ(c.intervals().size(), 2u);
    EXPECT_EQ(c.intervals()[0].lo, -1.0);
    EXPECT_EQ(c.intervals()[1].lo, 2.0);
}

TEST(ContinuationSet, RejectsOverlapAndEmptyIntervals) {
    EXPECT_THROW(ContinuationSet({{0.0, 2.0}, {1.0, 3.0}}), DomainError);
    EXPECT_THROW(ContinuationSet({{1.0, 1.0}}), DomainError);
    EXPECT_THROW(ContinuationSet({{2.0, 1.0}}), DomainError);
}

TEST(ContinuationSet, TouchingIntervalsAreAllowed) {
    // (0,1) and (1,2) are disjoint open sets; 1 is a boundary point of both.
    const ContinuationSet c({{0.0, 1.0}, {1.0, 2.0}});
    EXPECT_FALSE(c.contains(1.0));
    const auto b = c.boundary({-kInf, kInf});
    EXPECT_EQ(b, (std::vector<double>{0.0, 1.0, 2.0}));
}

TEST(ContinuationSet, MembershipIsOpen) {
    const ContinuationSet c({{0.0, 0.41}});
    EXPECT_TRUE(c.contains(0.2));
    EXPECT_FALSE(c.contains(0.41));
    EXPECT_FALSE(c.contains(0.0));
    ASSERT_TRUE(c.component(0.3).has_value());
    EXPECT_EQ(c.component(0.3)->hi, 0.41);
    EXPECT_FALSE(c.component(0.5).has_value());
}

TEST(ContinuationSet, BoundaryExcludesStateEnds) {
    const ContinuationSet c({{0.0, 0.41}});
    EXPECT_EQ(c.boundary({0.0, kInf}), std::vector<double>{0.41});
    EXPECT_TRUE(ContinuationSet::whole({0.0, kInf}).boundary({0.0, kInf}).empty());
}

TEST(ContinuationSet, CheckInside) {
    EXPECT_NO_THROW(ContinuationSet({{0.0, 1.0}}).check_inside({0.0, kInf}));
    EXPECT_THROW(ContinuationSet({{-1.0, 1.0}}).check_inside({0.0, kInf}), DomainError);
}

TEST(ClassifyPoint, ThreeWay) {
    const ContinuationSet c({{-1.0, 1.0}});
    EXPECT_EQ(classify_point(c, 0.0), PointClass::InC);
    EXPECT_EQ(classify_point(c, 1.0), PointClass::Boundary);
    EXPECT_EQ(classify_point(c, 1.0 + 1e-13), PointClass::Boundary);
    EXPECT_EQ(classify_point(c, 1.5), PointClass::IntComplement);
    EXPECT_EQ(classify_point(ContinuationSet::empty(), 0.0), PointClass::IntComplement);
}

TEST(IntensityInvert, LinearInterpolation) {
    const std::vector<double> cum{0.0, 1.0, 3.0};
    const std::vector<double> t{0.0, 1.0, 2.0};
    EXPECT_DOUBLE_EQ(integrated_intensity_invert(cum, t, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(integrated_intensity_invert(cum, t, 2.0), 1.5);
    EXPECT_DOUBLE_EQ(integrated_intensity_invert(cum, t, 3.0), 2.0);
    EXPECT_THROW(integrated_intensity_invert(cum, t, 3.5), TargetNotReachedError);
}

TEST(SampleStop, OutsideCStopsImmediately) {
    const auto s = MixedStrategy::pure(ContinuationSet({{-1.0, 1.0}}));
    PathStream rng(1, 1);
    const auto out = sample_stop(DiffusionModel::wiener(), s, 2.0, PathConfig{}, rng);
    EXPECT_EQ(out.kind, StopKind::ImmediateStop);
    EXPECT_EQ(out.state, 2.0);
    EXPECT_EQ(out.time, 0.0);
}

TEST(SampleStop, ExitIsSnappedToBoundary) {
    const auto s = MixedStrategy::pure(ContinuationSet({{-1.0, 1.0}}));
    PathConfig c;
    c.dt = 1e-3;
    for (std::uint64_t i = 0; i < 100; ++i) {
        PathStream rng(2, i);
        const auto out = sample_stop(DiffusionModel::wiener(), s, 0.3, c, rng);
        ASSERT_EQ(out.kind, StopKind::ExitC);
        EXPECT_TRUE(out.state == -1.0 || out.state == 1.0);
    }
}

TEST(SampleStop, CensoredAtHorizon) {
    const auto s = MixedStrategy::pure(ContinuationSet::whole({-kInf, kInf}));
    PathConfig c;
    c.dt = 0.01;
    c.horizon = 1.0;
    PathStream rng(3, 0);
    const auto out = sample_stop(DiffusionModel::wiener(), s, 0.0, c, rng);
    EXPECT_EQ(out.kind, StopKind::Censored);
    EXPECT_EQ(out.time, 1.0);
}

TEST(SampleStop, ConstantIntensityJumpTimeIsExponential) {
    // With C = E the stopping time is Exp(lambda): mean 1/lambda, and the
    // time does not depend on the path.
    const double lambda = 2.0;
    const auto s = MixedStrategy::constant(lambda, ContinuationSet::whole({-kInf, kInf}));
    PathConfig c;
    c.dt = 1e-2;
    constexpr std::size_t n = 20000;
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) {
        PathStream rng(4, i);
        const auto out = sample_stop(DiffusionModel::wiener(), s, 0.0, c, rng);
        ASSERT_EQ(out.kind, StopKind::CoxJump);
        times[i] = out.time;
    }
    const auto st = mean_stat(times, [](double t) { return t; });
    EXPECT_NEAR(st.mean, 1.0 / lambda, 4.0 * st.std_error);
}

TEST(SampleStop, StateDependentIntensityMatchesConstantWhenFlat) {
    // A non-constant SmoothFn that happens to be flat must give the same law.
    MixedStrategy flat;
    flat.continuation = ContinuationSet::whole({-kInf, kInf});
    flat.intensity.value = [](double) { return 2.0; };
    PathConfig c;
    c.dt = 1e-2;
    constexpr std::size_t n = 20000;
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) {
        PathStream rng(4, i);
        times[i] = sample_stop(DiffusionModel::wiener(), flat, 0.0, c, rng).time;
    }
    const auto st = mean_stat(times, [](double t) { return t; });
    EXPECT_NEAR(st.mean, 0.5, 4.0 * st.std_error);
}

TEST(SampleStop, Deterministic) {
    const auto s = MixedStrategy::constant(0.3, ContinuationSet({{-2.0, 2.0}}));
    PathConfig c;
    PathStream a(5, 9), b(5, 9);
    const auto oa = sample_stop(DiffusionModel::wiener(), s, 0.1, c, a);
    const auto ob = sample_stop(DiffusionModel::wiener(), s, 0.1, c, b);
    EXPECT_EQ(oa.state, ob.state);
    EXPECT_EQ(oa.time, ob.time);
    EXPECT_EQ(oa.kind, ob.kind);
}

TEST(SampleStop, StartOutsideStateThrows) {
    PathStream rng(1, 1);
    EXPECT_THROW(sample_stop(DiffusionModel::gbm(0.0, 1.0), MixedStrategy::pure(ContinuationSet::empty()), -1.0,
                             PathConfig{}, rng),
                 DomainError);
}

TEST(StopKind, Names) {
    EXPECT_EQ(to_string(StopKind::CoxJump), "CoxJump");
    EXPECT_EQ(to_string(StopKind::Censored), "Censored");
}
