#include "tistop/value_functions.hpp"

#include <algorithm>
#include <cmath>

#include "tistop/error.hpp"

namespace tistop {

double one_sided_d1(const RealFn& fn, double x, int side, double s) {
    const double sg = side >= 0 ? 1.0 : -1.0;
    const double f0 = fn(x);
    const double f1 = fn(x + sg * s);
    const double f2 = fn(x + 2.0 * sg * s);
    const double f3 = fn(x + 3.0 * sg * s);
    return sg * (-11.0 * f0 + 18.0 * f1 - 9.0 * f2 + 2.0 * f3) / (6.0 * s);
}

double one_sided_d2(const RealFn& fn, double x, int side, double s) {
    const double sg = side >= 0 ? 1.0 : -1.0;
    const double f0 = fn(x);
    const double f1 = fn(x + sg * s);
    const double f2 = fn(x + 2.0 * sg * s);
    const double f3 = fn(x + 3.0 * sg * s);
    return (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (s * s);
}

double ValueFunctions::derivative(bool of_psi, int order, double x, int side) const {
    if (order != 1 && order != 2) throw DomainError("value function derivatives of order 1 or 2 only");
    const SidedFn& closed = of_psi ? (order == 1 ? dpsi : d2psi) : (order == 1 ? dphi : d2phi);
    if (closed) return closed(x, side);
    const RealFn& fn = of_psi ? psi : phi;
    return order == 1 ? one_sided_d1(fn, x, side) : one_sided_d2(fn, x, side);
}

const ValueTriple* ValueFunctions::at(double x) const noexcept {
    if (mode != ValueMode::MCGrid) return nullptr;
    const auto it = std::lower_bound(grid.begin(), grid.end(), x - 1e-12);
    if (it == grid.end() || std::abs(*it - x) > 1e-12) return nullptr;
    return &values[static_cast<std::size_t>(it - grid.begin())];
}

namespace {

bool side_in_c(const ContinuationSet& c, double x, int side) {
    const double delta = 1e-9 * std::max(1.0, std::abs(x));
    return c.contains(x + (side >= 0 ? delta : -delta));
}

}  // namespace

ValueFunctions make_piecewise_values(const Problem& problem, const ContinuationSet& continuation, ValuePiece phi_in,
                                     ValuePiece psi_in) {
    if (!phi_in.value || !psi_in.value) throw DomainError("value pieces need a value function");
    ValueFunctions vf;
    const auto c = continuation;
    const auto f = problem.f;
    const auto h = problem.h;
    vf.phi = [c, f, pv = phi_in.value](double x) { return c.contains(x) ? pv(x) : f(x); };
    vf.psi = [c, h, pv = psi_in.value](double x) { return c.contains(x) ? pv(x) : h(x); };

    auto sided = [&c](const RealFn& inside, const SmoothFn& outside, int order) -> SidedFn {
        if (!inside || !outside.has(order)) return {};
        return [c, inside, outside, order](double x, int side) {
            return side_in_c(c, x, side) ? inside(x) : outside.deriv(order, x);
        };
    };
    vf.dphi = sided(phi_in.d1, f, 1);
    vf.d2phi = sided(phi_in.d2, f, 2);
    vf.dpsi = sided(psi_in.d1, h, 1);
    vf.d2psi = sided(psi_in.d2, h, 2);
    vf.mode = ValueMode::ClosedForm;
    return vf;
}

ValueFunctions estimate_value_grid(const Problem& problem, const DiffusionModel& model, const MixedStrategy& strategy,
                                   std::span<const double> grid, const PathConfig& config, std::size_t n_paths) {
    ValueFunctions vf;
    vf.mode = ValueMode::MCGrid;
    vf.grid.assign(grid.begin(), grid.end());
    std::sort(vf.grid.begin(), vf.grid.end());
    vf.grid.erase(std::unique(vf.grid.begin(), vf.grid.end()), vf.grid.end());
    if (vf.grid.empty()) throw DomainError("estimate_value_grid needs at least one grid point");
    vf.values.reserve(vf.grid.size());
    for (double x : vf.grid) vf.values.push_back(estimate_values(problem, model, strategy, x, config, n_paths));

    const auto xs = vf.grid;
    std::vector<double> phis;
    std::vector<double> psis;
    for (const auto& v : vf.values) {
        phis.push_back(v.phi.estimate);
        psis.push_back(v.psi.estimate);
    }
    const auto c = strategy.continuation;
    auto interp = [xs, c](std::vector<double> ys, SmoothFn outside) {
        return [xs, ys = std::move(ys), c, outside](double x) {
            if (!c.contains(x)) return outside(x);
            if (x <= xs.front()) return ys.front();
            if (x >= xs.back()) return ys.back();
            const auto it = std::upper_bound(xs.begin(), xs.end(), x);
            const std::size_t i = static_cast<std::size_t>(it - xs.begin());
            const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            return ys[i - 1] + w * (ys[i] - ys[i - 1]);
        };
    };
    vf.phi = interp(std::move(phis), problem.f);
    vf.psi = interp(std::move(psis), problem.h);
    return vf;
}

}  // namespace tistop
