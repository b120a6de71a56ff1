#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace tistop {

using RealFn = std::function<double(double)>;

/// A real function together with the derivatives the caller chose to supply.
///
/// Problems need f, h in C^2 and g in C^3; intensities only need a value.
/// `constant` is set when the function is known to be constant, which lets
/// path simulators skip per-step evaluation.
struct SmoothFn {
    RealFn value;
    RealFn d1;
    RealFn d2;
    RealFn d3;
    std::optional<double> constant;

    double operator()(double x) const { return value(x); }

    /// Derivative of order 0..3; throws MissingDerivativeError if absent.
    [[nodiscard]] double deriv(int order, double x) const;
    [[nodiscard]] bool has(int order) const noexcept;

    static SmoothFn constant_fn(double c);
    /// c[0] + c[1] x + c[2] x^2 + ... with exact derivatives.
    static SmoothFn polynomial(std::vector<double> coefficients);
    /// a * x^p with exact derivatives; valid for x > 0 when p is not an integer.
    static SmoothFn power(double a, double p);
};

struct DerivativeCheck {
    bool ok = true;
    double worst_error = 0.0;
    double worst_x = 0.0;
    int worst_order = 0;
};

/// Spot-check supplied derivatives against central differences with step
/// 1e-5 * max(1, |x|). A derivative passes when |fd - d| <= rel_tol * max(1, |d|).
DerivativeCheck check_derivatives(const SmoothFn& fn, std::span<const double> points, double rel_tol = 1e-5);

}  // namespace tistop
