#include <gtest/gtest.h>

#include <cmath>

#include "tistop/error.hpp"
#include "tistop/solvers.hpp"

using namespace tistop;

TEST(VarianceSolver, FigureOneParameters) {
    const auto s = solve_variance_gbm(-0.1, 0.15);
    EXPECT_NEAR(s.lambda, 0.057735026919, 1e-10);
    EXPECT_NEAR(s.j_coefficient, 0.401923788647, 1e-9);
    EXPECT_NEAR(s.psi_slope, 0.36603, 5e-6);
    EXPECT_NEAR(s.phi_coefficient, 0.53590, 5e-6);
    EXPECT_NEAR(s.j(2.0), 4.0 * s.j_coefficient, 1e-15);
}

TEST(VarianceSolver, CoefficientIsPhiMinusPsiSquared) {
    const auto s = solve_variance_gbm(-0.2, 0.1);
    EXPECT_NEAR(s.lambda, 0.346410, 5e-7);
    EXPECT_NEAR(s.j_coefficient, s.phi_coefficient - s.psi_slope * s.psi_slope, 1e-15);
}

TEST(VarianceSolver, RejectsNonDecayingVariance) {
    try {
        (void)solve_variance_gbm(-0.5, 1.0);
        FAIL() << "expected ParameterError";
    } catch (const ParameterError& e) {
        EXPECT_NE(std::string(e.what()).find("2*mu + sigma^2 < 0"), std::string::npos);
    }
    EXPECT_THROW(solve_variance_gbm(-0.1, 0.0), ParameterError);
}

TEST(VarianceSolver, UniqueConstantIntensity) {
    EXPECT_EQ(count_constant_intensity_roots(-0.1, 0.15, 1.0), 1);
    EXPECT_EQ(count_constant_intensity_roots(-0.2, 0.1, 5.0), 1);
}

TEST(VarianceSolver, StrategyAndValues) {
    const auto s = solve_variance_gbm(-0.1, 0.15);
    const auto st = s.strategy();
    EXPECT_EQ(st.lambda(3.0), s.lambda);
    EXPECT_TRUE(st.continuation.contains(1e-6));
    const auto vf = s.values();
    EXPECT_NEAR(vf.phi(2.0), 4.0 * s.phi_coefficient, 1e-14);
    EXPECT_NEAR(vf.psi(2.0), 2.0 * s.psi_slope, 1e-14);
}

TEST(MeanVarianceSolver, FigureTwoThreshold) {
    const auto s = solve_mean_variance_gbm(0.07, 0.45, 1.1);
    ASSERT_EQ(s.regime, MeanVarianceRegime::Threshold);
    ASSERT_TRUE(s.b.has_value());
    EXPECT_NEAR(*s.b, 0.4105572, 1e-6);
    EXPECT_NEAR(*s.b, s.xi / (1.1 * (1.0 - s.xi)), 1e-15);
}

TEST(MeanVarianceSolver, RegimeBoundaries) {
    EXPECT_EQ(solve_mean_variance_gbm(-0.1, 0.45, 1.1).regime, MeanVarianceRegime::StopImmediately);
    EXPECT_EQ(solve_mean_variance_gbm(0.0, 0.45, 1.1).regime, MeanVarianceRegime::StopImmediately);
    EXPECT_EQ(solve_mean_variance_gbm(0.45 / 4.0, 0.45, 1.1).regime, MeanVarianceRegime::Threshold);
    EXPECT_EQ(solve_mean_variance_gbm(0.2, 0.45, 1.1).regime, MeanVarianceRegime::NoEquilibrium);
    EXPECT_EQ(solve_mean_variance_gbm(0.225, 0.45, 1.1).regime, MeanVarianceRegime::ValueUnbounded);
    EXPECT_EQ(solve_mean_variance_gbm(0.5, 0.45, 1.1).regime, MeanVarianceRegime::ValueUnbounded);
}

TEST(MeanVarianceSolver, ThresholdAtQuarterSigmaSquaredIsOneOverGamma) {
    // xi = 1/2 gives b = 1/gamma.
    const auto s = solve_mean_variance_gbm(0.1, 0.4, 2.0);
    ASSERT_EQ(s.regime, MeanVarianceRegime::Threshold);
    EXPECT_NEAR(*s.b, 0.5, 1e-15);
}

TEST(MeanVarianceSolver, ValueIsPhiPlusGOfPsi) {
    const double mu = 0.07, s2 = 0.45, gamma = 1.1;
    const auto s = solve_mean_variance_gbm(mu, s2, gamma);
    const double b = *s.b, xi = s.xi;
    for (double x : {0.01, 0.1, 0.3, 0.41}) {
        const double psi = std::pow(b, xi) * std::pow(x, 1 - xi);
        const double m2 = std::pow(b, 1 + xi) * std::pow(x, 1 - xi);
        EXPECT_NEAR(s.j(x), -gamma * m2 + psi + gamma * psi * psi, 1e-15) << x;
    }
    EXPECT_DOUBLE_EQ(s.j(0.45), 0.45);
    EXPECT_NEAR(s.j(b), b, 1e-15);
    EXPECT_NEAR(s.j(std::nextafter(b, 0.0)), b, 1e-14);
}

TEST(MeanVarianceSolver, NoValueOutsideEquilibriumRegimes) {
    EXPECT_THROW((void)solve_mean_variance_gbm(0.2, 0.45, 1.1).j(0.1), ParameterError);
    EXPECT_THROW((void)solve_mean_variance_gbm(0.2, 0.45, 1.1).strategy(), ParameterError);
    EXPECT_THROW(solve_mean_variance_gbm(0.07, 0.45, 0.0), ParameterError);
}

TEST(MeanVarianceSolver, RegimeNames) {
    EXPECT_EQ(to_string(MeanVarianceRegime::Threshold), "Threshold");
    EXPECT_EQ(to_string(MeanVarianceRegime::NoEquilibrium), "NoEquilibrium");
}

TEST(ThresholdValues, OneSidedDerivativesAtB) {
    const double mu = 0.07, s2 = 0.45, b = 0.4105571847507331, xi = 2 * mu / s2;
    const auto vf = threshold_value_functions(make_mean_variance_problem(1.1), mu, s2, b);
    EXPECT_NEAR(vf.derivative(true, 1, b, -1), 1.0 - xi, 1e-12);
    EXPECT_NEAR(vf.derivative(true, 1, b, +1), 1.0, 1e-12);
    EXPECT_NEAR(vf.psi(b), b, 1e-15);
    EXPECT_NEAR(vf.phi(b), -1.1 * b * b, 1e-15);
}

TEST(ClosedFormResolver, SupportedCases) {
    const auto vs = solve_variance_gbm(-0.1, 0.15);
    const auto gbm = DiffusionModel::gbm(-0.1, 0.15);
    auto vf = closed_form_value_functions(make_variance_problem(), gbm, vs.strategy());
    ASSERT_TRUE(vf.has_value());
    EXPECT_NEAR(vf->phi(1.0), vs.phi_coefficient, 1e-14);

    const auto te = two_equilibria_example();
    vf = closed_form_value_functions(te.problem, te.model, te.interval);
    ASSERT_TRUE(vf.has_value());
    EXPECT_NEAR(vf->phi(0.3), -2.0 / 9.0, 1e-14);
    EXPECT_NEAR(vf->psi(0.3), 1.0, 1e-14);

    vf = closed_form_value_functions(te.problem, te.model, te.immediate);
    ASSERT_TRUE(vf.has_value());
    EXPECT_NEAR(vf->psi(2.0), 4.0, 1e-14);
}

TEST(ClosedFormResolver, WienerBoundedIntervalIsAffine) {
    // E_x h(X_tau) on (-1, 2) for h = x: the martingale property gives x.
    const auto p = make_variance_problem();
    const auto vf = closed_form_value_functions(p, DiffusionModel::wiener(), MixedStrategy::pure(ContinuationSet({{-1.0, 2.0}})));
    ASSERT_TRUE(vf.has_value());
    EXPECT_NEAR(vf->psi(0.5), 0.5, 1e-14);
    // E X_tau^2 = P(up) 4 + P(down) 1, P(up) = (x+1)/3.
    EXPECT_NEAR(vf->phi(0.5), 0.5 * 4 + 0.5 * 1, 1e-14);
}

TEST(ClosedFormResolver, UnsupportedReturnsNullopt) {
    MixedStrategy s;
    s.intensity = SmoothFn::power(1.0, 1.0);
    s.continuation = ContinuationSet::whole({0.0, kInf});
    EXPECT_FALSE(closed_form_value_functions(make_variance_problem(), DiffusionModel::gbm(-0.1, 0.15), s).has_value());
}

namespace {

IntensityODEProblem variance_ode() {
    const auto vs = solve_variance_gbm(-0.1, 0.15);
    IntensityODEProblem ode{make_variance_problem(), DiffusionModel::gbm(-0.1, 0.15), {0.5, 2.0}, 1.0, vs.psi_slope,
                            vs.psi_slope};
    return ode;
}

}  // namespace

TEST(IntensityODE, LinearPsiGivesTheConstantEquilibriumIntensity) {
    const auto vs = solve_variance_gbm(-0.1, 0.15);
    const auto ode = variance_ode();
    for (double x : {0.6, 1.0, 1.9})
        EXPECT_NEAR(intensity_from_psi(ode, x, vs.psi_slope * x, vs.psi_slope), vs.lambda, 1e-12) << x;
    EXPECT_NEAR(psi_second_derivative(ode, 1.3, vs.psi_slope * 1.3, vs.psi_slope), 0.0, 1e-12);
}

TEST(IntensityODE, SingularDenominatorThrows) {
    const auto ode = variance_ode();
    // psi = h(x) makes (h - psi)^2 g''(psi) vanish.
    EXPECT_THROW(intensity_from_psi(ode, 1.0, 1.0, 0.5), SingularityError);
}

TEST(IntensityODE, IntegrationRecoversLinearPsi) {
    const auto vs = solve_variance_gbm(-0.1, 0.15);
    const auto sol = integrate_psi_ode(variance_ode());
    ASSERT_TRUE(sol.complete) << sol.stop_reason;
    ASSERT_GT(sol.x.size(), 100u);
    EXPECT_NEAR(sol.x.front(), 0.5, 1e-12);
    EXPECT_NEAR(sol.x.back(), 2.0, 1e-12);
    for (std::size_t i = 0; i < sol.x.size(); i += 97) EXPECT_NEAR(sol.psi[i], vs.psi_slope * sol.x[i], 1e-9);
    EXPECT_LT(sol.max_abs_residual, 1e-6);
}

TEST(TwoEquilibria, Constants) {
    const auto te = two_equilibria_example();
    EXPECT_NEAR(te.phi, -2.0 / 9.0, 1e-15);
    EXPECT_NEAR(te.psi, 1.0, 1e-15);
    EXPECT_NEAR(te.j, 2.0 / 9.0, 1e-15);
    const auto iv = te.interval_values();
    EXPECT_NEAR(iv.phi(0.0) + te.problem.g(iv.psi(0.0)), 2.0 / 9.0, 1e-15);
    const auto im = te.immediate_values();
    EXPECT_NEAR(im.phi(0.0), 0.0, 1e-15);
}
