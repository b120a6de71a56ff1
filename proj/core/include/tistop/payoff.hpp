#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tistop/diffusion.hpp"
#include "tistop/smooth_fn.hpp"
#include "tistop/strategy.hpp"

namespace tistop {

/// Reward J_tau(x) = E_x f(X_tau) + g(E_x h(X_tau)).
///
/// `f_poly` / `h_poly` hold polynomial coefficients (constant term first) when
/// f or h is a polynomial; closed-form value resolvers use them.
struct Problem {
    SmoothFn f;
    SmoothFn g;
    SmoothFn h;
    std::string name;
    std::optional<std::vector<double>> f_poly;
    std::optional<std::vector<double>> h_poly;

    /// Reward of stopping immediately at x: f(x) + g(h(x)).
    [[nodiscard]] double stop_reward(double x) const { return f(x) + g(h(x)); }
};

/// f(x) = x^2, g(y) = -y^2, h(x) = x.
Problem make_variance_problem();
/// f(x) = -gamma x^2, g(y) = y + gamma y^2, h(x) = x. Throws ParameterError if gamma <= 0.
Problem make_mean_variance_problem(double gamma);
/// f(x) = x^6/9 - x^4/3, g(y) = y^2 - 5y^3/9, h(x) = x^2.
Problem make_two_equilibria_problem();

struct MCSummary {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double censored_fraction = 0.0;
    /// Empty unless the estimate is suspect (e.g. heavy censoring without a limit state).
    std::string warning;
};

/// phi = E f(X_tau), psi = E h(X_tau) and J = phi + g(psi).
///
/// `j_se` is a first-order delta-method standard error using g'(psi) and the
/// sample covariance of the per-path f and h values.
struct ValueTriple {
    MCSummary phi;
    MCSummary psi;
    double phi_psi_cov = 0.0;  // covariance of the two sample means
    double j = 0.0;
    double j_se = 0.0;
    bool exact = false;

    /// Rebuild j and j_se from the parts.
    void recompute(const SmoothFn& g);
};

/// Exact triple (zero standard error) from known phi and psi.
ValueTriple exact_values(const Problem& problem, double phi, double psi);

/// Monte Carlo estimate of phi, psi and J at x for the mixed strategy.
///
/// Paths still running at the horizon contribute f and h at the model's limit
/// state when it declares one, else at their terminal state; more than 1%
/// censoring without a limit state sets a warning. Starting points outside C
/// return the exact immediate-stop values.
ValueTriple estimate_values(const Problem& problem, const DiffusionModel& model, const MixedStrategy& strategy,
                            double x, const PathConfig& config, std::size_t n_paths);

/// E_x X^p at an independent Exp(lambda) time for GBM:
/// lambda / (lambda - p mu - p(p-1) sigma^2 / 2) * x^p.
/// Throws DivergentMomentError when the denominator is not positive.
double closed_form_values_constant_lambda_gbm(double mu, double sigma2, double lambda, double p, double x);

/// E_x X^p at the first hitting time of b for GBM with xi = 2mu/sigma^2 in (0, 1),
/// non-hitting paths tending to 0: b^(p-1+xi) x^(1-xi) for p > 0, 1 for p = 0.
double closed_form_values_threshold_gbm(double mu, double sigma2, double b, double p, double x);

}  // namespace tistop
