#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tistop/diffusion.hpp"
#include "tistop/payoff.hpp"
#include "tistop/strategy.hpp"

namespace tistop {

/// Derivative evaluated from one side: `side` is +1 (from the right) or -1 (from the left).
using SidedFn = std::function<double(double x, int side)>;

enum class ValueMode { ClosedForm, MCGrid };

/// phi_{lambda,C} and psi_{lambda,C} of a candidate strategy.
///
/// Closed-form one-sided derivatives are optional; when absent, derivatives are
/// taken by 4-point one-sided differences with step 1e-4. In MCGrid mode phi and
/// psi interpolate Monte Carlo estimates on `grid`, and `values` carries the
/// per-point standard errors.
struct ValueFunctions {
    RealFn phi;
    RealFn psi;
    SidedFn dphi;
    SidedFn dpsi;
    SidedFn d2phi;
    SidedFn d2psi;
    ValueMode mode = ValueMode::ClosedForm;
    std::vector<double> grid;
    std::vector<ValueTriple> values;

    [[nodiscard]] bool closed_derivatives() const noexcept { return dphi && dpsi && d2phi && d2psi; }
    /// Order-1 or order-2 one-sided derivative of phi (`of_psi` false) or psi (true).
    [[nodiscard]] double derivative(bool of_psi, int order, double x, int side) const;
    /// Grid estimate at x (MCGrid mode, |x - grid point| <= 1e-12), else nullptr.
    [[nodiscard]] const ValueTriple* at(double x) const noexcept;
};

inline constexpr double kFiniteDifferenceStep = 1e-4;

/// One-sided 4-point differences of `fn` at x with step s toward `side`.
double one_sided_d1(const RealFn& fn, double x, int side, double s = kFiniteDifferenceStep);
double one_sided_d2(const RealFn& fn, double x, int side, double s = kFiniteDifferenceStep);

/// A value function on C with optional first and second derivatives.
struct ValuePiece {
    RealFn value;
    RealFn d1;
    RealFn d2;
};

/// phi, psi equal to the given pieces on C and to f, h off C.
///
/// At a point the branch is chosen by where x + side * 1e-9 max(1, |x|) falls,
/// so boundary derivatives are one-sided limits of the adjacent branch.
ValueFunctions make_piecewise_values(const Problem& problem, const ContinuationSet& continuation, ValuePiece phi_in,
                                     ValuePiece psi_in);

/// Monte Carlo phi, psi at each grid point (exact off C), interpolated linearly in between.
ValueFunctions estimate_value_grid(const Problem& problem, const DiffusionModel& model, const MixedStrategy& strategy,
                                   std::span<const double> grid, const PathConfig& config, std::size_t n_paths);

}  // namespace tistop
