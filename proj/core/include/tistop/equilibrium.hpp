#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tistop/diffusion.hpp"
#include "tistop/payoff.hpp"
#include "tistop/strategy.hpp"
#include "tistop/value_functions.hpp"

namespace tistop {

enum class Condition { I, II, III, IV, V, SmoothFit };
enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Condition c);
std::string to_string(Verdict v);

struct PointResidual {
    double x = 0.0;
    double residual = 0.0;
    double tol = 0.0;
    bool pass = true;
};

struct ConditionVerdict {
    Condition condition = Condition::I;
    std::vector<PointResidual> points;
    Verdict overall = Verdict::Pass;
    std::string note;
};

/// Absolute tolerance for closed-form residuals.
inline constexpr double kClosedFormTolerance = 1e-9;
/// Tolerance for residuals that involve finite-difference derivatives.
inline constexpr double kFiniteDifferenceTolerance = 1e-6;

/// (I): J(x) - f(x) - g(h(x)) >= -tol on grid points in C.
ConditionVerdict check_condition_I(const Problem& problem, const ValueFunctions& vf, std::span<const double> grid);

/// (II): A_X f + g'(h) A_X h <= tol on grid points in int(C^c).
ConditionVerdict check_condition_II(const Problem& problem, const DiffusionModel& model, std::span<const double> grid);

struct ConditionIIIIV {
    ConditionVerdict iii;  // points with lambda(x) > 0: |residual| <= tol
    ConditionVerdict iv;   // points with lambda(x) = 0: residual <= tol
};

/// Residual f - phi + g'(psi)(h - psi) on grid points in C, split by the sign of lambda.
ConditionIIIIV check_condition_III_IV(const Problem& problem, const MixedStrategy& strategy, const ValueFunctions& vf,
                                      std::span<const double> grid);

/// J'(x) from the side of C minus f'(x) + g'(h(x)) h'(x), at each boundary point.
/// If both sides lie in C, the larger residual in absolute value is reported.
ConditionVerdict check_smooth_fit(const Problem& problem, const ContinuationSet& continuation, const ValueFunctions& vf,
                                  std::span<const double> boundary);

/// Left side of the sufficient second-order condition at each boundary point:
/// A phi(x+) + g'(psi) A psi(x+) + A phi(x-) + g'(psi) A psi(x-) + g''(psi) ((psi'(x+) - psi'(x-))/2)^2 sigma^2(x).
/// Points where smooth fit fails are reported but make the verdict inconclusive.
ConditionVerdict check_condition_V_sufficient(const Problem& problem, const DiffusionModel& model,
                                              const ContinuationSet& continuation, const ValueFunctions& vf,
                                              std::span<const double> boundary);

/// A deviation (eta, D): stop at the first jump of a Cox process with intensity
/// eta or on leaving D, whichever comes first.
struct Deviation {
    SmoothFn eta;
    ContinuationSet domain;
    std::string label;
};

/// eta in {0, lambda/2, 2 lambda, 5} times D in {empty, C, E}; duplicates removed.
std::vector<Deviation> standard_deviation_family(const MixedStrategy& strategy, const DiffusionModel& model);

struct GainPoint {
    double h = 0.0;
    double gain = 0.0;
    double std_error = 0.0;
    double mean_tau = 0.0;
    std::size_t n_paths = 0;
};

struct DeviationLadder {
    std::string label;
    double x = 0.0;
    std::vector<GainPoint> points;
    /// Closed-form limit of the gain as h -> 0, when available.
    std::optional<double> limit;
    std::string limit_case;
};

/// Closed-form h -> 0 limit of the deviation gain at x:
///   x not in D: +-inf or 0 following the sign of J - f - g(h);
///   x in C and D: (lambda - eta) (f - phi + g'(psi)(h - psi));
///   x in int(C^c) and D: -(A_X f + g'(h) A_X h);
///   x on the boundary of C and in D: -1/2 times the condition (V) left side.
std::optional<double> deviation_limit(const Problem& problem, const DiffusionModel& model, const MixedStrategy& strategy,
                                      const ValueFunctions& vf, const Deviation& deviation, double x,
                                      std::string* which = nullptr);

/// Monte Carlo (J(x) - J_spliced(x)) / E_x tau_h for each h, where the spliced
/// rule follows the deviation until tau_h and the strategy afterwards. The
/// strategy's continuation after tau_h is valued through vf (strong Markov).
/// Standard errors come from the delta method on (F, H, tau_h) per path.
DeviationLadder deviation_gain(const Problem& problem, const DiffusionModel& model, const MixedStrategy& strategy,
                               const ValueFunctions& vf, const Deviation& deviation, double x,
                               std::span<const double> h_ladder, const PathConfig& config, std::size_t n_paths);

/// Continuous function with possibly different one-sided slopes at x.
struct KinkedFn {
    RealFn value;
    double slope_left = 0.0;
    double slope_right = 0.0;
};

struct LocalTimePoint {
    double h = 0.0;
    double estimate = 0.0;  // (E k(X_tau_h) - k(x))^2 / E tau_h
    double std_error = 0.0;
    double mean_tau = 0.0;
    double dt = 0.0;
};

struct LocalTimeReport {
    double target = 0.0;  // ((k'(x+) - k'(x-))/2)^2 sigma^2(x)
    std::vector<LocalTimePoint> points;

    /// Relative error of the smallest-h estimate (absolute if the target is 0).
    [[nodiscard]] double final_error() const;
};

/// Time step used for exit problems of half-width h at x:
/// min(config.dt, h^2 / (100 sigma^2(x))), about 100 steps per expected exit.
double exit_step(const DiffusionModel& model, double x, double h, double dt);

LocalTimeReport local_time_limit_check(const DiffusionModel& model, const KinkedFn& k, double x,
                                       std::span<const double> h_ladder, const PathConfig& config,
                                       std::size_t n_paths);

struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 50;
};

/// Evaluation points: n evenly spaced points in [lo, hi] within the state
/// interval, plus the boundary points of C in range; sorted, deduplicated.
std::vector<double> report_grid(const GridSpec& spec, const DiffusionModel& model, const ContinuationSet& c);

struct ReportOptions {
    GridSpec grid;
    /// Deviation ladders attached as evidence when (V) or smooth fit cannot be
    /// decided and no other condition has already failed.
    std::vector<double> evidence_h{0.2, 0.1, 0.05};
    PathConfig config;
    std::size_t evidence_paths = 20000;
};

struct EquilibriumReport {
    std::vector<ConditionVerdict> verdicts;
    Verdict summary = Verdict::Pass;
    std::string strategy;
    GridSpec grid;
    std::vector<DeviationLadder> evidence;
};

/// Classify each grid point and run the conditions that apply there:
/// C gets (I) and (III)/(IV), int(C^c) gets (II), boundary points get smooth fit and (V).
/// In MCGrid mode tolerances are 3 standard errors; residuals within 6 are inconclusive.
EquilibriumReport run_full_report(const Problem& problem, const DiffusionModel& model, const MixedStrategy& strategy,
                                  const ValueFunctions& vf, const ReportOptions& options);

/// Any Fail gives Fail, else any Inconclusive gives Inconclusive, else Pass.
Verdict combine(std::span<const ConditionVerdict> verdicts);

}  // namespace tistop
