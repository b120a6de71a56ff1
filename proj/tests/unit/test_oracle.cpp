#include <gtest/gtest.h>

#include <cmath>

#include "tistop/error.hpp"
#include "tistop/oracle.hpp"
#include "tistop/solvers.hpp"

using namespace tistop;

TEST(KilledGbm, MatchesClosedFormWithFiniteVariance) {
    const double mu = -0.2, s2 = 0.1, lambda = 0.34641016151377552;
    for (double p : {1.0, 2.0}) {
        const auto r = killed_gbm_moment(mu, s2, lambda, p, 1.0, 200000);
        EXPECT_TRUE(r.warning.empty());
        EXPECT_GT(r.std_error, 0.0);
        EXPECT_NEAR(r.value, closed_form_values_constant_lambda_gbm(mu, s2, lambda, p, 1.0), 4.0 * r.std_error) << p;
    }
}

TEST(KilledGbm, ScalesWithStartingPoint) {
    // Same seed, so the samples are the same up to the factor x^p.
    const auto a = killed_gbm_moment(-0.2, 0.1, 0.3, 2.0, 1.0, 1000, 3);
    const auto b = killed_gbm_moment(-0.2, 0.1, 0.3, 2.0, 2.0, 1000, 3);
    EXPECT_NEAR(b.value, 4.0 * a.value, 1e-12 * b.value);
}

TEST(KilledGbm, DivergentMomentWarns) {
    const auto r = killed_gbm_moment(0.1, 0.15, 0.05, 1.0, 1.0, 100);
    EXPECT_FALSE(r.warning.empty());
    EXPECT_THROW(killed_gbm_moment(0.1, 0.15, 0.0, 1.0, 1.0, 100), DomainError);
}

TEST(DiscreteChain, TwoEquilibriaIntervalStrategy) {
    const auto te = two_equilibria_example();
    const auto cv = discrete_chain_value(te.problem, te.model, chain_from_strategy(te.interval, 1e-3), 0.0);
    EXPECT_NEAR(cv.j, 2.0 / 9.0, 1e-3);
    EXPECT_NEAR(cv.phi.value, -2.0 / 9.0, 1e-3);
    EXPECT_NEAR(cv.psi.value, 1.0, 1e-3);
    EXPECT_EQ(cv.phi.std_error, 0.0);
}

TEST(DiscreteChain, WienerExitIsMartingale) {
    // Driftless symmetric walk: E X_tau = x and P(up) = (x - c)/(d - c).
    const auto p = make_variance_problem();
    const auto cv = discrete_chain_value(p, DiffusionModel::wiener(),
                                         chain_from_strategy(MixedStrategy::pure(ContinuationSet({{-1.0, 2.0}})), 1e-2),
                                         0.5);
    EXPECT_NEAR(cv.psi.value, 0.5, 1e-10);
    EXPECT_NEAR(cv.phi.value, 2.5, 1e-10);
}

TEST(DiscreteChain, ConstantIntensityOnInterval) {
    // 1/2 phi'' + lambda (x^2 - phi) = 0 on (-1, 1), phi(+-1) = 1:
    // phi = x^2 + 1/lambda - cosh(k x) / (lambda cosh k), k = sqrt(2 lambda).
    const double lambda = 0.5, k = std::sqrt(2 * lambda);
    const auto s = MixedStrategy::constant(lambda, ContinuationSet({{-1.0, 1.0}}));
    const auto cv = discrete_chain_value(make_variance_problem(), DiffusionModel::wiener(), chain_from_strategy(s, 1e-3), 0.3);
    const double exact = 0.09 + 1 / lambda - std::cosh(k * 0.3) / (lambda * std::cosh(k));
    EXPECT_NEAR(cv.phi.value, exact, 1e-5);
    EXPECT_NEAR(cv.psi.value, 0.3, 1e-10);
}

TEST(DiscreteChain, GbmThresholdHittingProbability) {
    // Stop on first hitting b from (c, b) for GBM: psi with h = 1 on hitting is the two-sided exit probability.
    const double mu = 0.07, s2 = 0.45, c = 0.05, b = 0.41, x = 0.2;
    Problem p;
    p.f = SmoothFn::constant_fn(0.0);
    p.g = SmoothFn::polynomial({0.0, 1.0});
    p.h = SmoothFn::polynomial({0.0, 1.0});
    const auto cv = discrete_chain_value(p, DiffusionModel::gbm(mu, s2),
                                         chain_from_strategy(MixedStrategy::pure(ContinuationSet({{c, b}})), 1e-4), x);
    const double up = gbm_two_sided_exit(2 * mu / s2, x, c, b);
    EXPECT_NEAR(cv.psi.value, up * b + (1 - up) * c, 2e-4);
}

TEST(DiscreteChain, StateCap) {
    const auto te = two_equilibria_example();
    EXPECT_THROW(discrete_chain_value(te.problem, te.model, chain_from_strategy(te.interval, 1e-5), 0.0), DomainError);
}
