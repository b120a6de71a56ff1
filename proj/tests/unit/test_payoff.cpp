#include <gtest/gtest.h>

#include <cmath>

#include "tistop/error.hpp"
#include "tistop/payoff.hpp"

using namespace tistop;

TEST(Problems, VarianceReward) {
    const auto p = make_variance_problem();
    EXPECT_DOUBLE_EQ(p.f(3.0), 9.0);
    EXPECT_DOUBLE_EQ(p.g(3.0), -9.0);
    EXPECT_DOUBLE_EQ(p.h(3.0), 3.0);
    EXPECT_DOUBLE_EQ(p.stop_reward(3.0), 0.0);
    EXPECT_DOUBLE_EQ(p.g.deriv(3, 1.0), 0.0);
}

TEST(Problems, MeanVarianceReward) {
    const auto p = make_mean_variance_problem(1.1);
    EXPECT_DOUBLE_EQ(p.stop_reward(0.4), 0.4);
    EXPECT_DOUBLE_EQ(p.g.deriv(1, 0.5), 1.0 + 2.2 * 0.5);
    EXPECT_DOUBLE_EQ(p.g.deriv(2, 0.5), 2.2);
    EXPECT_THROW(make_mean_variance_problem(0.0), ParameterError);
    EXPECT_THROW(make_mean_variance_problem(-1.0), ParameterError);
}

TEST(Problems, TwoEquilibriaReward) {
    const auto p = make_two_equilibria_problem();
    EXPECT_NEAR(p.f(1.0), -2.0 / 9.0, 1e-15);
    EXPECT_NEAR(p.g(1.0), 4.0 / 9.0, 1e-15);
    EXPECT_NEAR(p.stop_reward(1.0), 2.0 / 9.0, 1e-15);
    EXPECT_DOUBLE_EQ(p.h(-2.0), 4.0);
}

TEST(Problems, PolynomialCoefficientsMatchFunctions) {
    for (const auto& p : {make_variance_problem(), make_mean_variance_problem(2.0), make_two_equilibria_problem()}) {
        ASSERT_TRUE(p.f_poly && p.h_poly) << p.name;
        for (double x : {0.3, 1.7}) {
            double f = 0, h = 0, xp = 1;
            for (std::size_t k = 0; k < std::max(p.f_poly->size(), p.h_poly->size()); ++k, xp *= x) {
                if (k < p.f_poly->size()) f += (*p.f_poly)[k] * xp;
                if (k < p.h_poly->size()) h += (*p.h_poly)[k] * xp;
            }
            EXPECT_NEAR(f, p.f(x), 1e-14);
            EXPECT_NEAR(h, p.h(x), 1e-14);
        }
    }
}

TEST(ValueTriple, ExactValuesAndDeltaMethod) {
    const auto p = make_variance_problem();
    const auto v = exact_values(p, 0.5359, 0.36603);
    EXPECT_TRUE(v.exact);
    EXPECT_NEAR(v.j, 0.5359 - 0.36603 * 0.36603, 1e-15);
    EXPECT_EQ(v.j_se, 0.0);

    ValueTriple t;
    t.phi.estimate = 1.0;
    t.psi.estimate = 0.5;
    t.phi.std_error = 0.1;
    t.psi.std_error = 0.2;
    t.phi_psi_cov = 0.0;
    t.recompute(p.g);
    // g'(psi) = -1: var = 0.01 + 0.04.
    EXPECT_NEAR(t.j_se, std::sqrt(0.05), 1e-15);
}

TEST(ClosedForm, ConstantIntensityGbmMoments) {
    // Values from the constant-intensity equilibrium at mu=-0.1, sigma^2=0.15.
    const double lambda = 0.057735026918962588;
    EXPECT_NEAR(closed_form_values_constant_lambda_gbm(-0.1, 0.15, lambda, 1.0, 1.0), 0.36603, 5e-6);
    EXPECT_NEAR(closed_form_values_constant_lambda_gbm(-0.1, 0.15, lambda, 2.0, 1.0), 0.53590, 5e-6);
    EXPECT_NEAR(closed_form_values_constant_lambda_gbm(-0.1, 0.15, lambda, 2.0, 3.0), 9.0 * 0.5358983848622454, 1e-12);
    EXPECT_DOUBLE_EQ(closed_form_values_constant_lambda_gbm(-0.1, 0.15, lambda, 0.0, 3.0), 1.0);
}

TEST(ClosedForm, DivergentMomentThrows) {
    EXPECT_THROW(closed_form_values_constant_lambda_gbm(0.1, 0.15, 0.05, 1.0, 1.0), DivergentMomentError);
    EXPECT_THROW(closed_form_values_constant_lambda_gbm(0.1, 0.15, 0.0, 1.0, 1.0), DomainError);
}

TEST(ClosedForm, ThresholdGbmMoments) {
    const double mu = 0.07, s2 = 0.45, b = 0.4105571847507331;
    const double xi = 2 * mu / s2;
    EXPECT_DOUBLE_EQ(closed_form_values_threshold_gbm(mu, s2, b, 0.0, 0.2), 1.0);
    EXPECT_NEAR(closed_form_values_threshold_gbm(mu, s2, b, 1.0, b), b, 1e-15);
    EXPECT_NEAR(closed_form_values_threshold_gbm(mu, s2, b, 2.0, 0.2), std::pow(b, 1 + xi) * std::pow(0.2, 1 - xi), 1e-15);
    EXPECT_THROW(closed_form_values_threshold_gbm(0.3, s2, b, 1.0, 0.2), DomainError);
    EXPECT_THROW(closed_form_values_threshold_gbm(mu, s2, b, 1.0, 0.5), DomainError);
}

TEST(EstimateValues, OutsideCIsExact) {
    const auto p = make_variance_problem();
    const auto v = estimate_values(p, DiffusionModel::gbm(-0.1, 0.15), MixedStrategy::pure(ContinuationSet::empty()), 2.0,
                                   PathConfig{}, 10);
    EXPECT_TRUE(v.exact);
    EXPECT_DOUBLE_EQ(v.phi.estimate, 4.0);
    EXPECT_DOUBLE_EQ(v.psi.estimate, 2.0);
}

TEST(EstimateValues, ConstantIntensityMatchesClosedForm) {
    // mu=-0.2, sigma^2=0.1 keeps X_tau^2 square-integrable, so the 4-SE band is honest.
    const double mu = -0.2, s2 = 0.1, lambda = 0.34641016151377552;
    const auto model = DiffusionModel::gbm(mu, s2);
    PathConfig c;
    c.dt = 0.05;  // exact transitions and exact Exp(lambda) time: no step bias
    c.seed = 77;
    const auto v = estimate_values(make_variance_problem(), model,
                                   MixedStrategy::constant(lambda, ContinuationSet::whole(model.state_interval())), 1.0,
                                   c, 20000);
    EXPECT_NEAR(v.psi.estimate, closed_form_values_constant_lambda_gbm(mu, s2, lambda, 1, 1), 4 * v.psi.std_error);
    EXPECT_NEAR(v.phi.estimate, closed_form_values_constant_lambda_gbm(mu, s2, lambda, 2, 1), 4 * v.phi.std_error);
    EXPECT_EQ(v.phi.censored_fraction, 0.0);
    EXPECT_TRUE(v.phi.warning.empty());
}

TEST(EstimateValues, ThresholdUsesLimitStateForCensoredPaths) {
    const double mu = 0.07, s2 = 0.45, b = 0.4105571847507331;
    const auto model = DiffusionModel::gbm(mu, s2);
    PathConfig c;
    c.dt = 0.05;
    c.horizon = 200.0;
    const auto v = estimate_values(make_mean_variance_problem(1.1), model,
                                   MixedStrategy::pure(ContinuationSet({{0.0, b}})), 0.2, c, 20000);
    EXPECT_GT(v.psi.censored_fraction, 0.0);
    EXPECT_TRUE(v.psi.warning.empty());
    EXPECT_NEAR(v.psi.estimate, closed_form_values_threshold_gbm(mu, s2, b, 1, 0.2), 4 * v.psi.std_error);
}

TEST(EstimateValues, AntitheticPairsGiveConsistentEstimate) {
    const double mu = -0.2, s2 = 0.1, lambda = 0.34641016151377552;
    const auto model = DiffusionModel::gbm(mu, s2);
    PathConfig c;
    c.dt = 0.05;
    c.antithetic = true;
    const auto v = estimate_values(make_variance_problem(), model,
                                   MixedStrategy::constant(lambda, ContinuationSet::whole(model.state_interval())), 1.0,
                                   c, 20000);
    EXPECT_GT(v.psi.std_error, 0.0);
    EXPECT_NEAR(v.psi.estimate, closed_form_values_constant_lambda_gbm(mu, s2, lambda, 1, 1), 4 * v.psi.std_error);
}

TEST(EstimateValues, DeterministicAcrossThreadCounts) {
    const auto model = DiffusionModel::wiener();
    const auto s = MixedStrategy::constant(0.5, ContinuationSet({{-1.0, 1.0}}));
    PathConfig c;
    c.dt = 1e-3;
    c.threads = 1;
    const auto a = estimate_values(make_two_equilibria_problem(), model, s, 0.2, c, 500);
    c.threads = 3;
    const auto b = estimate_values(make_two_equilibria_problem(), model, s, 0.2, c, 500);
    EXPECT_EQ(a.phi.estimate, b.phi.estimate);
    EXPECT_EQ(a.psi.estimate, b.psi.estimate);
}

TEST(EstimateValues, NeedsTwoPaths) {
    const auto model = DiffusionModel::wiener();
    EXPECT_THROW(estimate_values(make_variance_problem(), model, MixedStrategy::pure(ContinuationSet({{-1.0, 1.0}})), 0.0,
                                 PathConfig{}, 1),
                 ParameterError);
}
