#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tistop/diffusion.hpp"
#include "tistop/error.hpp"
#include "tistop/smooth_fn.hpp"

using namespace tistop;

TEST(SmoothFn, PolynomialDerivatives) {
    const auto p = SmoothFn::polynomial({1.0, -2.0, 0.0, 3.0});  // 1 - 2x + 3x^3
    EXPECT_DOUBLE_EQ(p(2.0), 1.0 - 4.0 + 24.0);
    EXPECT_DOUBLE_EQ(p.deriv(1, 2.0), -2.0 + 36.0);
    EXPECT_DOUBLE_EQ(p.deriv(2, 2.0), 36.0);
    EXPECT_DOUBLE_EQ(p.deriv(3, 2.0), 18.0);
}

TEST(SmoothFn, PowerDerivatives) {
    const auto p = SmoothFn::power(2.0, 0.5);
    EXPECT_DOUBLE_EQ(p(4.0), 4.0);
    EXPECT_DOUBLE_EQ(p.deriv(1, 4.0), 0.5);
    EXPECT_DOUBLE_EQ(p.deriv(2, 4.0), -0.0625);
}

TEST(SmoothFn, ConstantIsMarked) {
    const auto c = SmoothFn::constant_fn(0.25);
    ASSERT_TRUE(c.constant.has_value());
    EXPECT_EQ(*c.constant, 0.25);
    EXPECT_EQ(c.deriv(1, 3.0), 0.0);
}

TEST(SmoothFn, MissingDerivativeThrows) {
    SmoothFn f;
    f.value = [](double x) { return x; };
    EXPECT_FALSE(f.has(1));
    EXPECT_THROW((void)f.deriv(1, 0.0), MissingDerivativeError);
}

TEST(SmoothFn, DerivativeCheckFlagsWrongDerivative) {
    const std::vector<double> pts{0.5, 1.0, 2.0};
    EXPECT_TRUE(check_derivatives(SmoothFn::polynomial({0, 0, 1}), pts).ok);
    SmoothFn bad = SmoothFn::polynomial({0, 0, 1});
    bad.d1 = [](double x) { return 3.0 * x; };
    const auto chk = check_derivatives(bad, pts);
    EXPECT_FALSE(chk.ok);
    EXPECT_GE(chk.worst_order, 1);
}

TEST(DiffusionModel, GbmCoefficients) {
    const auto m = DiffusionModel::gbm(-0.1, 0.15);
    EXPECT_DOUBLE_EQ(m.drift(2.0), -0.2);
    EXPECT_DOUBLE_EQ(m.variance(2.0), 0.6);
    EXPECT_TRUE(m.in_state(1e-9));
    EXPECT_FALSE(m.in_state(0.0));
    EXPECT_EQ(m.scheme(), Scheme::GBM);
}

TEST(DiffusionModel, GbmLimitStateOnlyWhenPathsVanish) {
    EXPECT_EQ(DiffusionModel::gbm(0.07, 0.45).limit_state(), 0.0);
    EXPECT_FALSE(DiffusionModel::gbm(0.5, 0.45).limit_state().has_value());
    EXPECT_FALSE(DiffusionModel::wiener().limit_state().has_value());
}

TEST(DiffusionModel, GbmRejectsNonPositiveVariance) {
    EXPECT_THROW(DiffusionModel::gbm(0.1, 0.0), ParameterError);
}

TEST(Generator, GbmOnSquare) {
    // A x^2 = 2 mu x^2 + sigma^2 x^2.
    const auto m = DiffusionModel::gbm(-0.1, 0.15);
    EXPECT_NEAR(generator_apply(m, SmoothFn::polynomial({0, 0, 1}), 3.0), (2 * -0.1 + 0.15) * 9.0, 1e-14);
}

TEST(Generator, WienerOnQuartic) {
    EXPECT_NEAR(generator_apply(DiffusionModel::wiener(), SmoothFn::polynomial({0, 0, 0, 0, 1}), 2.0), 24.0, 1e-12);
}

TEST(SimulateStep, ExactGbmTransition) {
    const auto m = DiffusionModel::gbm(0.07, 0.45);
    const double x = 1.3, dt = 0.01, z = 0.7;
    EXPECT_NEAR(simulate_step(m, x, dt, z), x * std::exp((0.07 - 0.225) * dt + std::sqrt(0.45 * dt) * z), 1e-15);
}

TEST(SimulateStep, WienerAndZeroStep) {
    const auto w = DiffusionModel::wiener();
    EXPECT_DOUBLE_EQ(simulate_step(w, 1.0, 0.25, -2.0), 0.0);
    EXPECT_EQ(simulate_step(w, 1.0, 0.0, 5.0), 1.0);
    EXPECT_THROW(simulate_step(w, 1.0, -1.0, 0.0), DomainError);
}

TEST(SimulateStep, EulerEscapeWithoutRngThrows) {
    const auto m = DiffusionModel::general([](double) { return 0.0; }, [](double) { return 1.0; }, {0.0, kInf});
    EXPECT_THROW(simulate_step(m, 0.01, 1.0, -5.0), BoundaryEscapeError);
    PathStream rng(1, 1);
    EXPECT_TRUE(m.in_state(simulate_step(m, 0.5, 0.01, 0.3, &rng)));
}

TEST(PathConfig, ValidateRejectsBadSteps) {
    PathConfig c;
    c.dt = 0.0;
    EXPECT_THROW(c.validate(), ParameterError);
    c.dt = 2.0;
    c.horizon = 1.0;
    EXPECT_THROW(c.validate(), ParameterError);
}

TEST(SymmetricExit, LandsOnTheBallBoundary) {
    const auto m = DiffusionModel::gbm(-0.1, 0.15);
    PathConfig c;
    c.dt = 1e-5;
    for (std::uint64_t i = 0; i < 50; ++i) {
        PathStream rng(3, i);
        const auto s = sample_symmetric_exit(m, 1.0, 0.05, c, rng);
        EXPECT_TRUE(s.state == 0.95 || s.state == 1.05) << s.state;
        EXPECT_GT(s.time, 0.0);
    }
}

TEST(SymmetricExit, BallMustFitInState) {
    PathConfig c;
    PathStream rng(1, 1);
    EXPECT_THROW(sample_symmetric_exit(DiffusionModel::gbm(0.0, 1.0), 0.1, 0.2, c, rng), DomainError);
}

TEST(ExitStatistics, WienerMoments) {
    // Brownian exit of [-h, h]: E tau = h^2, E tau^2 = 5 h^4 / 3, P(up) = 1/2.
    const double h = 0.1;
    PathConfig c;
    c.dt = h * h / 200.0;
    const auto s = exit_time_statistics(DiffusionModel::wiener(), 0.0, h, c, 20000);
    EXPECT_NEAR(s.mean_time, h * h, 4.0 * s.mean_time_se);
    EXPECT_NEAR(s.mean_time_sq, 5.0 * std::pow(h, 4) / 3.0, 4.0 * s.mean_time_sq_se);
    EXPECT_NEAR(s.prob_up, 0.5, 4.0 * s.prob_up_se);
}

TEST(ExitStatistics, AntitheticReducesErrorOfSymmetricQuantity) {
    // Mirrored Wiener paths exit on opposite sides unless a bridge-crossing draw
    // intervenes, so the paired error of P(up) is far below the plain one.
    PathConfig c;
    c.dt = 1e-4;
    const auto plain = exit_time_statistics(DiffusionModel::wiener(), 0.0, 0.1, c, 2000);
    c.antithetic = true;
    const auto anti = exit_time_statistics(DiffusionModel::wiener(), 0.0, 0.1, c, 2000);
    EXPECT_LT(anti.prob_up_se, 0.5 * plain.prob_up_se);
    EXPECT_NEAR(anti.prob_up, 0.5, 4.0 * anti.prob_up_se + 1e-12);
}

TEST(HittingProb, ClosedFormAndEdges) {
    const double xi = 2 * 0.07 / 0.45;
    EXPECT_DOUBLE_EQ(gbm_hitting_prob(xi, 0.41, 0.41), 1.0);
    EXPECT_NEAR(gbm_hitting_prob(xi, 0.1, 0.4), std::pow(0.4, xi - 1) * std::pow(0.1, 1 - xi), 1e-15);
    EXPECT_THROW(gbm_hitting_prob(1.5, 0.1, 0.4), DomainError);
}

TEST(TwoSidedExit, EndpointsAndMonotone) {
    const double xi = 2 * 0.07 / 0.45;
    EXPECT_NEAR(gbm_two_sided_exit(xi, 0.2, 0.2, 0.5), 0.0, 1e-15);
    EXPECT_NEAR(gbm_two_sided_exit(xi, 0.5, 0.2, 0.5), 1.0, 1e-15);
    EXPECT_LT(gbm_two_sided_exit(xi, 0.3, 0.2, 0.5), gbm_two_sided_exit(xi, 0.4, 0.2, 0.5));
    EXPECT_NEAR(gbm_two_sided_exit(2.5, 0.5, 0.2, 0.5), 1.0, 1e-15);
}

TEST(TwoSidedExit, TendsToOneSidedHittingAsLowerEndVanishes) {
    // For xi < 1 the lower barrier at c -> 0 is almost never reached first.
    const double xi = 2 * 0.07 / 0.45;
    EXPECT_NEAR(gbm_two_sided_exit(xi, 0.1, 1e-12, 0.4), gbm_hitting_prob(xi, 0.1, 0.4), 1e-6);
}
