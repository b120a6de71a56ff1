#include "tistop/smooth_fn.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "tistop/error.hpp"

namespace tistop {

namespace {

double horner(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<double> differentiate(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> out(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) out[i - 1] = static_cast<double>(i) * c[i];
    return out;
}

const RealFn& slot(const SmoothFn& fn, int order) {
    switch (order) {
        case 0: return fn.value;
        case 1: return fn.d1;
        case 2: return fn.d2;
        case 3: return fn.d3;
        default: throw DomainError("derivative order must be in 0..3");
    }
}

}  // namespace

double SmoothFn::deriv(int order, double x) const {
    const RealFn& f = slot(*this, order);
    if (!f) throw MissingDerivativeError("derivative of order " + std::to_string(order) + " not supplied");
    return f(x);
}

bool SmoothFn::has(int order) const noexcept {
    if (order < 0 || order > 3) return false;
    return static_cast<bool>(slot(*this, order));
}

SmoothFn SmoothFn::constant_fn(double c) {
    SmoothFn fn;
    fn.value = [c](double) { return c; };
    fn.d1 = [](double) { return 0.0; };
    fn.d2 = [](double) { return 0.0; };
    fn.d3 = [](double) { return 0.0; };
    fn.constant = c;
    return fn;
}

SmoothFn SmoothFn::polynomial(std::vector<double> coefficients) {
    if (coefficients.empty()) coefficients.push_back(0.0);
    auto c1 = differentiate(coefficients);
    auto c2 = differentiate(c1);
    auto c3 = differentiate(c2);
    SmoothFn fn;
    fn.value = [c = std::move(coefficients)](double x) { return horner(c, x); };
    fn.d1 = [c = std::move(c1)](double x) { return horner(c, x); };
    fn.d2 = [c = std::move(c2)](double x) { return horner(c, x); };
    fn.d3 = [c = std::move(c3)](double x) { return horner(c, x); };
    return fn;
}

SmoothFn SmoothFn::power(double a, double p) {
    SmoothFn fn;
    fn.value = [a, p](double x) { return a * std::pow(x, p); };
    fn.d1 = [a, p](double x) { return a * p * std::pow(x, p - 1.0); };
    fn.d2 = [a, p](double x) { return a * p * (p - 1.0) * std::pow(x, p - 2.0); };
    fn.d3 = [a, p](double x) { return a * p * (p - 1.0) * (p - 2.0) * std::pow(x, p - 3.0); };
    return fn;
}

DerivativeCheck check_derivatives(const SmoothFn& fn, std::span<const double> points, double rel_tol) {
    DerivativeCheck result;
    for (double x : points) {
        const double s = 1e-5 * std::max(1.0, std::abs(x));
        for (int order = 1; order <= 3; ++order) {
            if (!fn.has(order)) continue;
            const RealFn& lower = slot(fn, order - 1);
            if (!lower) continue;
            const double fd = (lower(x + s) - lower(x - s)) / (2.0 * s);
            const double d = slot(fn, order)(x);
            const double err = std::abs(fd - d) / std::max(1.0, std::abs(d));
            if (err > result.worst_error) {
                result.worst_error = err;
                result.worst_x = x;
                result.worst_order = order;
            }
        }
    }
    result.ok = result.worst_error <= rel_tol;
    return result;
}

}  // namespace tistop
