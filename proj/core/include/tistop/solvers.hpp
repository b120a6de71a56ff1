#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tistop/diffusion.hpp"
#include "tistop/payoff.hpp"
#include "tistop/strategy.hpp"
#include "tistop/value_functions.hpp"

namespace tistop {

/// Constant-intensity equilibrium of the variance problem under GBM.
struct VarianceSolution {
    double mu = 0.0;
    double sigma2 = 0.0;
    double lambda = 0.0;
    /// J(x) = j_coefficient * x^2.
    double j_coefficient = 0.0;
    /// psi(x) = psi_slope * x, with psi_slope = lambda / (lambda - mu).
    double psi_slope = 0.0;
    /// phi(x) = phi_coefficient * x^2, with phi_coefficient = lambda / (lambda - 2mu - sigma^2).
    double phi_coefficient = 0.0;

    [[nodiscard]] double j(double x) const noexcept { return j_coefficient * x * x; }
    [[nodiscard]] MixedStrategy strategy() const;
    [[nodiscard]] ValueFunctions values() const;
};

/// lambda = sqrt(-mu^2 (2mu + sigma^2) / sigma^2). Throws ParameterError unless
/// sigma^2 > 0 and 2mu + sigma^2 < 0.
VarianceSolution solve_variance_gbm(double mu, double sigma2);

/// Number of sign changes of 2mu^3 + mu^2 sigma^2 + sigma^2 lambda^2 over an
/// n-point scan of (0, lambda_max]; each marks one constant equilibrium intensity.
int count_constant_intensity_roots(double mu, double sigma2, double lambda_max, std::size_t n = 10000);

enum class MeanVarianceRegime { StopImmediately, Threshold, NoEquilibrium, ValueUnbounded };

std::string to_string(MeanVarianceRegime regime);

struct MeanVarianceSolution {
    MeanVarianceRegime regime = MeanVarianceRegime::StopImmediately;
    double mu = 0.0;
    double sigma2 = 0.0;
    double gamma = 0.0;
    double xi = 0.0;  // 2mu / sigma^2
    std::optional<double> b;

    /// Equilibrium value; x for x >= b, the threshold formula below b.
    /// Throws ParameterError when no equilibrium value exists.
    [[nodiscard]] double j(double x) const;
    [[nodiscard]] MixedStrategy strategy() const;
};

/// Regimes: mu <= 0 stop immediately; 0 < mu <= sigma^2/4 threshold b = xi / (gamma (1 - xi));
/// sigma^2/4 < mu < sigma^2/2 no equilibrium; mu >= sigma^2/2 unbounded value.
MeanVarianceSolution solve_mean_variance_gbm(double mu, double sigma2, double gamma);

/// phi, psi of "stop on first hitting b" for a GBM with xi = 2mu/sigma^2 < 1
/// and polynomial f, h; exact one-sided derivatives.
ValueFunctions threshold_value_functions(const Problem& problem, double mu, double sigma2, double b);

/// Closed-form phi, psi when one is known for (problem, model, strategy):
///   C empty; GBM with constant lambda > 0 on C = E; GBM with lambda = 0 on (0, b)
///   or (c, d); Wiener with lambda = 0 on a bounded interval. Polynomial f, h are
///   required except for C empty. Returns nullopt otherwise.
std::optional<ValueFunctions> closed_form_value_functions(const Problem& problem, const DiffusionModel& model,
                                                          const MixedStrategy& strategy);

/// Data for the equilibrium-intensity ODE on `domain`, anchored at `anchor`.
struct IntensityODEProblem {
    Problem problem;
    DiffusionModel model;
    Interval domain;
    double anchor = 0.0;
    double psi_anchor = 0.0;
    double dpsi_anchor = 0.0;
    /// Step as a fraction of the domain length.
    double step_fraction = 1e-4;
};

/// mu {f' + h' g'(psi)} + sigma^2/2 {f'' + d}, with
/// d = g'''(psi) psi'^2 (h - psi) + 2 g''(psi) psi' (h' - psi') + g'(psi) h''.
double intensity_numerator(const IntensityODEProblem& ode, double x, double psi, double dpsi);

/// lambda(x) = intensity_numerator / ((h - psi)^2 g''(psi)).
/// Throws SingularityError when the denominator vanishes. The caller checks lambda >= 0.
double intensity_from_psi(const IntensityODEProblem& ode, double x, double psi, double dpsi);

/// psi'' from the ODE -(mu psi' + sigma^2/2 psi'')(h - psi) g''(psi) = numerator.
/// Throws SingularityError when (h - psi) g''(psi) vanishes.
double psi_second_derivative(const IntensityODEProblem& ode, double x, double psi, double dpsi);

struct PsiSolution {
    std::vector<double> x;
    std::vector<double> psi;
    std::vector<double> dpsi;
    /// Residual of the implicit ODE with psi'' from central differences; NaN at the ends.
    std::vector<double> residual;
    double max_abs_residual = 0.0;
    bool complete = true;
    std::optional<double> stop_location;
    std::string stop_reason;
};

/// Classical RK4 for (psi, psi') from the anchor toward both ends of the domain.
/// Integration stops at the last good point when the psi'' coefficient vanishes;
/// singular anchor data throws SingularityError.
PsiSolution integrate_psi_ode(const IntensityODEProblem& ode);

/// Wiener process with f = x^6/9 - x^4/3, g = y^2 - 5y^3/9, h = x^2 and its two
/// equilibria: stop everywhere, and stop on leaving (-1, 1).
struct TwoEquilibriaExample {
    Problem problem;
    DiffusionModel model;
    MixedStrategy immediate;
    MixedStrategy interval;
    double phi = -2.0 / 9.0;
    double psi = 1.0;
    double j = 2.0 / 9.0;

    [[nodiscard]] ValueFunctions immediate_values() const;
    [[nodiscard]] ValueFunctions interval_values() const;
};

TwoEquilibriaExample two_equilibria_example();

}  // namespace tistop
