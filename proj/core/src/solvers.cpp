#include "tistop/solvers.hpp"

#include <array>
#include <cmath>

#include "tistop/error.hpp"

namespace tistop {

// ---------------------------------------------------------------- variance

VarianceSolution solve_variance_gbm(double mu, double sigma2) {
    if (!(sigma2 > 0.0)) throw ParameterError("variance problem requires sigma^2 > 0");
    if (!(2.0 * mu + sigma2 < 0.0))
        throw ParameterError("variance problem requires 2*mu + sigma^2 < 0 (otherwise the variance of X_t diverges)");
    VarianceSolution s;
    s.mu = mu;
    s.sigma2 = sigma2;
    s.lambda = std::sqrt(-mu * mu * (2.0 * mu + sigma2) / sigma2);
    const double r = std::sqrt(-(2.0 * mu + sigma2) / sigma2) + 1.0;
    s.j_coefficient = 1.0 / (r * r);
    s.psi_slope = s.lambda / (s.lambda - mu);
    s.phi_coefficient = s.lambda / (s.lambda - 2.0 * mu - sigma2);
    return s;
}

MixedStrategy VarianceSolution::strategy() const {
    return MixedStrategy::constant(lambda, ContinuationSet::whole({0.0, kInf}), "variance-equilibrium");
}

ValueFunctions VarianceSolution::values() const {
    const double a = phi_coefficient;
    const double c = psi_slope;
    ValueFunctions vf;
    vf.phi = [a](double x) { return a * x * x; };
    vf.psi = [c](double x) { return c * x; };
    vf.dphi = [a](double x, int) { return 2.0 * a * x; };
    vf.d2phi = [a](double, int) { return 2.0 * a; };
    vf.dpsi = [c](double, int) { return c; };
    vf.d2psi = [](double, int) { return 0.0; };
    return vf;
}

int count_constant_intensity_roots(double mu, double sigma2, double lambda_max, std::size_t n) {
    if (!(lambda_max > 0.0) || n < 2) throw DomainError("scan needs lambda_max > 0 and n >= 2");
    auto q = [&](double l) { return 2.0 * mu * mu * mu + mu * mu * sigma2 + sigma2 * l * l; };
    int roots = 0;
    double prev = q(lambda_max / static_cast<double>(n));
    for (std::size_t i = 2; i <= n; ++i) {
        const double cur = q(lambda_max * static_cast<double>(i) / static_cast<double>(n));
        if ((prev < 0.0 && cur >= 0.0) || (prev > 0.0 && cur <= 0.0)) ++roots;
        prev = cur;
    }
    return roots;
}

// ----------------------------------------------------------- mean-variance

std::string to_string(MeanVarianceRegime regime) {
    switch (regime) {
        case MeanVarianceRegime::StopImmediately: return "StopImmediately";
        case MeanVarianceRegime::Threshold: return "Threshold";
        case MeanVarianceRegime::NoEquilibrium: return "NoEquilibrium";
        case MeanVarianceRegime::ValueUnbounded: return "ValueUnbounded";
    }
    return "?";
}

MeanVarianceSolution solve_mean_variance_gbm(double mu, double sigma2, double gamma) {
    if (!(sigma2 > 0.0)) throw ParameterError("mean-variance problem requires sigma^2 > 0");
    if (!(gamma > 0.0)) throw ParameterError("mean-variance problem requires gamma > 0");
    MeanVarianceSolution s;
    s.mu = mu;
    s.sigma2 = sigma2;
    s.gamma = gamma;
    s.xi = 2.0 * mu / sigma2;
    if (mu <= 0.0) {
        s.regime = MeanVarianceRegime::StopImmediately;
    } else if (4.0 * mu <= sigma2) {
        s.regime = MeanVarianceRegime::Threshold;
        s.b = s.xi / (gamma * (1.0 - s.xi));
    } else if (2.0 * mu < sigma2) {
        s.regime = MeanVarianceRegime::NoEquilibrium;
    } else {
        s.regime = MeanVarianceRegime::ValueUnbounded;
    }
    return s;
}

double MeanVarianceSolution::j(double x) const {
    if (!(x > 0.0)) throw DomainError("GBM state must be positive");
    switch (regime) {
        case MeanVarianceRegime::StopImmediately: return x;
        case MeanVarianceRegime::Threshold: {
            const double bb = *b;
            if (x >= bb) return x;
            return std::pow(x, 1.0 - xi) * (std::pow(bb, xi) - gamma * std::pow(bb, 1.0 + xi)) +
                   gamma * std::pow(bb, 2.0 * xi) * std::pow(x, 2.0 - 2.0 * xi);
        }
        case MeanVarianceRegime::NoEquilibrium: throw ParameterError("no equilibrium exists for sigma^2/4 < mu < sigma^2/2");
        case MeanVarianceRegime::ValueUnbounded: throw ParameterError("value is unbounded for mu >= sigma^2/2");
    }
    return x;
}

MixedStrategy MeanVarianceSolution::strategy() const {
    if (regime == MeanVarianceRegime::StopImmediately) return MixedStrategy::pure(ContinuationSet::empty(), "stop-immediately");
    if (regime == MeanVarianceRegime::Threshold) return MixedStrategy::pure(ContinuationSet({{0.0, *b}}), "threshold");
    throw ParameterError("no equilibrium strategy in regime " + to_string(regime));
}

// ------------------------------------------------------- closed-form values

namespace {

/// (value, first, second derivative) at a point.
using Jet = std::array<double, 3>;
using JetFn = std::function<Jet(double)>;

Jet power_jet(double k, double e, double x) {
    if (e == 0.0) return {k, 0.0, 0.0};
    const double v = k * std::pow(x, e);
    return {v, e * v / x, e * (e - 1.0) * v / (x * x)};
}

/// Jet of sum_p coeffs[p] * M_p, with M_p the moment jet of order p.
JetFn combine(const std::vector<double>& coeffs, const std::function<Jet(int, double)>& moment) {
    return [coeffs, moment](double x) {
        Jet out{0.0, 0.0, 0.0};
        for (std::size_t p = 0; p < coeffs.size(); ++p) {
            if (coeffs[p] == 0.0) continue;
            const Jet m = moment(static_cast<int>(p), x);
            for (int k = 0; k < 3; ++k) out[k] += coeffs[p] * m[k];
        }
        return out;
    };
}

ValuePiece to_piece(const JetFn& j) {
    return {[j](double x) { return j(x)[0]; }, [j](double x) { return j(x)[1]; }, [j](double x) { return j(x)[2]; }};
}

ValueFunctions from_moments(const Problem& problem, const ContinuationSet& c, const std::function<Jet(int, double)>& moment) {
    return make_piecewise_values(problem, c, to_piece(combine(*problem.f_poly, moment)),
                                 to_piece(combine(*problem.h_poly, moment)));
}

/// Moments at the first exit of (c, d) for GBM with lambda = 0; c = 0 means the
/// lower end is never reached and non-hitting paths tend to 0.
std::function<Jet(int, double)> gbm_exit_moments(double xi, double c, double d) {
    if (c == 0.0) {
        if (xi >= 1.0) return [d](int p, double) { return Jet{std::pow(d, p), 0.0, 0.0}; };
        return [xi, d](int p, double x) {
            if (p == 0) return Jet{1.0, 0.0, 0.0};
            return power_jet(std::pow(d, p - 1.0 + xi), 1.0 - xi, x);
        };
    }
    return [xi, c, d](int p, double x) {
        // P(exit at d) = (s(x) - s(c)) / (s(d) - s(c)) with scale s(y) = y^(1-xi) or log y.
        Jet s;
        double sc = 0.0;
        double sd = 0.0;
        if (xi == 1.0) {
            s = {std::log(x), 1.0 / x, -1.0 / (x * x)};
            sc = std::log(c);
            sd = std::log(d);
        } else {
            s = power_jet(1.0, 1.0 - xi, x);
            sc = std::pow(c, 1.0 - xi);
            sd = std::pow(d, 1.0 - xi);
        }
        const double cp = std::pow(c, p);
        const double w = (std::pow(d, p) - cp) / (sd - sc);
        return Jet{cp + w * (s[0] - sc), w * s[1], w * s[2]};
    };
}

}  // namespace

ValueFunctions threshold_value_functions(const Problem& problem, double mu, double sigma2, double b) {
    if (!problem.f_poly || !problem.h_poly) throw DomainError("threshold values need polynomial f and h");
    if (!(sigma2 > 0.0) || !(b > 0.0)) throw DomainError("threshold values need sigma^2 > 0 and b > 0");
    const ContinuationSet c({{0.0, b}});
    return from_moments(problem, c, gbm_exit_moments(2.0 * mu / sigma2, 0.0, b));
}

std::optional<ValueFunctions> closed_form_value_functions(const Problem& problem, const DiffusionModel& model,
                                                          const MixedStrategy& strategy) {
    const auto& cs = strategy.continuation;
    if (cs.is_empty()) {
        ValueFunctions vf;
        vf.phi = problem.f.value;
        vf.psi = problem.h.value;
        if (problem.f.has(2) && problem.h.has(2)) {
            const auto f = problem.f;
            const auto h = problem.h;
            vf.dphi = [f](double x, int) { return f.deriv(1, x); };
            vf.d2phi = [f](double x, int) { return f.deriv(2, x); };
            vf.dpsi = [h](double x, int) { return h.deriv(1, x); };
            vf.d2psi = [h](double x, int) { return h.deriv(2, x); };
        }
        return vf;
    }
    if (cs.intervals().size() != 1 || !strategy.intensity.constant) return std::nullopt;
    const Interval iv = cs.intervals().front();
    const double lam = *strategy.intensity.constant;
    const bool poly = problem.f_poly && problem.h_poly;

    if (model.scheme() == Scheme::GBM) {
        if (!poly) return std::nullopt;
        const double mu = model.gbm_mu();
        const double s2 = model.gbm_sigma2();
        if (lam > 0.0) {
            if (!(iv == model.state_interval())) return std::nullopt;
            // Fail early on divergent moments rather than inside a closure.
            for (const auto* coeffs : {&*problem.f_poly, &*problem.h_poly})
                for (std::size_t p = 0; p < coeffs->size(); ++p)
                    if ((*coeffs)[p] != 0.0) closed_form_values_constant_lambda_gbm(mu, s2, lam, static_cast<double>(p), 1.0);
            return from_moments(problem, cs, [mu, s2, lam](int p, double x) {
                const double k = lam / (lam - p * mu - 0.5 * p * (p - 1.0) * s2);
                return power_jet(k, p, x);
            });
        }
        if (!std::isfinite(iv.hi)) return std::nullopt;
        return from_moments(problem, cs, gbm_exit_moments(2.0 * mu / s2, iv.lo, iv.hi));
    }
    if (model.scheme() == Scheme::Wiener && lam == 0.0 && std::isfinite(iv.lo) && std::isfinite(iv.hi)) {
        auto affine = [iv](const SmoothFn& k) -> JetFn {
            const double kl = k(iv.lo);
            const double slope = (k(iv.hi) - kl) / (iv.hi - iv.lo);
            return [kl, slope, lo = iv.lo](double x) { return Jet{kl + slope * (x - lo), slope, 0.0}; };
        };
        return make_piecewise_values(problem, cs, to_piece(affine(problem.f)), to_piece(affine(problem.h)));
    }
    return std::nullopt;
}

// ------------------------------------------------------------ intensity ODE

double intensity_numerator(const IntensityODEProblem& ode, double x, double psi, double dpsi) {
    const auto& p = ode.problem;
    const double h = p.h(x);
    const double h1 = p.h.deriv(1, x);
    const double h2 = p.h.deriv(2, x);
    const double g1 = p.g.deriv(1, psi);
    const double g2 = p.g.deriv(2, psi);
    const double g3 = p.g.deriv(3, psi);
    const double d = g3 * dpsi * dpsi * (h - psi) + 2.0 * g2 * dpsi * (h1 - dpsi) + g1 * h2;
    return ode.model.drift(x) * (p.f.deriv(1, x) + h1 * g1) + 0.5 * ode.model.variance(x) * (p.f.deriv(2, x) + d);
}

double intensity_from_psi(const IntensityODEProblem& ode, double x, double psi, double dpsi) {
    const double gap = ode.problem.h(x) - psi;
    const double denom = gap * gap * ode.problem.g.deriv(2, psi);
    if (denom == 0.0) throw SingularityError("(h - psi)^2 g''(psi) vanishes at x = " + std::to_string(x));
    return intensity_numerator(ode, x, psi, dpsi) / denom;
}

double psi_second_derivative(const IntensityODEProblem& ode, double x, double psi, double dpsi) {
    const double coeff = (ode.problem.h(x) - psi) * ode.problem.g.deriv(2, psi);
    const double s2 = ode.model.variance(x);
    if (coeff == 0.0 || !std::isfinite(coeff)) throw SingularityError("(h - psi) g''(psi) vanishes at x = " + std::to_string(x));
    const double rhs = intensity_numerator(ode, x, psi, dpsi);
    return -2.0 / s2 * (rhs / coeff + ode.model.drift(x) * dpsi);
}

PsiSolution integrate_psi_ode(const IntensityODEProblem& ode) {
    const Interval dom = ode.domain;
    if (!(std::isfinite(dom.lo) && std::isfinite(dom.hi) && dom.lo < dom.hi))
        throw DomainError("ODE domain must be a bounded interval");
    if (!(ode.anchor >= dom.lo && ode.anchor <= dom.hi)) throw DomainError("ODE anchor must lie in the domain");
    if (!(ode.step_fraction > 0.0 && ode.step_fraction < 1.0)) throw DomainError("step_fraction must lie in (0, 1)");
    // Singular anchor data is an error, not a partial result.
    psi_second_derivative(ode, ode.anchor, ode.psi_anchor, ode.dpsi_anchor);

    const double target_step = ode.step_fraction * (dom.hi - dom.lo);
    struct Node {
        double x, y, dy;
    };
    PsiSolution sol;

    auto sweep = [&](double end) {
        std::vector<Node> nodes;
        const double span = end - ode.anchor;
        if (span == 0.0) return nodes;
        const auto n = static_cast<std::size_t>(std::ceil(std::abs(span) / target_step));
        const double hstep = span / static_cast<double>(n);
        double x = ode.anchor;
        double y = ode.psi_anchor;
        double dy = ode.dpsi_anchor;
        auto acc = [&](double xx, double yy, double dd) { return psi_second_derivative(ode, xx, yy, dd); };
        for (std::size_t i = 1; i <= n; ++i) {
            try {
                const double k1y = dy;
                const double k1d = acc(x, y, dy);
                const double k2y = dy + 0.5 * hstep * k1d;
                const double k2d = acc(x + 0.5 * hstep, y + 0.5 * hstep * k1y, k2y);
                const double k3y = dy + 0.5 * hstep * k2d;
                const double k3d = acc(x + 0.5 * hstep, y + 0.5 * hstep * k2y, k3y);
                const double k4y = dy + hstep * k3d;
                const double k4d = acc(x + hstep, y + hstep * k3y, k4y);
                y += hstep / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
                dy += hstep / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
                x = i == n ? end : ode.anchor + hstep * static_cast<double>(i);
                if (!std::isfinite(y) || !std::isfinite(dy)) throw SingularityError("solution is not finite");
                nodes.push_back({x, y, dy});
            } catch (const SingularityError& e) {
                sol.complete = false;
                if (!sol.stop_location || std::abs(x - ode.anchor) < std::abs(*sol.stop_location - ode.anchor)) {
                    sol.stop_location = x;
                    sol.stop_reason = e.what();
                }
                break;
            }
        }
        return nodes;
    };

    auto left = sweep(dom.lo);
    const auto right = sweep(dom.hi);
    std::vector<Node> all(left.rbegin(), left.rend());
    all.push_back({ode.anchor, ode.psi_anchor, ode.dpsi_anchor});
    all.insert(all.end(), right.begin(), right.end());

    const std::size_t m = std::max<std::size_t>(1, std::min<std::size_t>(10, all.size() / 4));
    sol.x.reserve(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        sol.x.push_back(all[i].x);
        sol.psi.push_back(all[i].y);
        sol.dpsi.push_back(all[i].dy);
        double r = std::nan("");
        if (i >= m && i + m < all.size()) {
            const Node& a = all[i - m];
            const Node& o = all[i];
            const Node& c = all[i + m];
            const double hm = o.x - a.x;
            const double hp = c.x - o.x;
            const double d2 = 2.0 * ((c.y - o.y) / hp - (o.y - a.y) / hm) / (hm + hp);
            const auto& p = ode.problem;
            const double lhs = -(ode.model.drift(o.x) * o.dy + 0.5 * ode.model.variance(o.x) * d2) * (p.h(o.x) - o.y) *
                               p.g.deriv(2, o.y);
            r = lhs - intensity_numerator(ode, o.x, o.y, o.dy);
            sol.max_abs_residual = std::max(sol.max_abs_residual, std::abs(r));
        }
        sol.residual.push_back(r);
    }
    return sol;
}

// ---------------------------------------------------------- two equilibria

TwoEquilibriaExample two_equilibria_example() {
    return TwoEquilibriaExample{make_two_equilibria_problem(), DiffusionModel::wiener(),
                                MixedStrategy::pure(ContinuationSet::empty(), "stop-everywhere"),
                                MixedStrategy::pure(ContinuationSet({{-1.0, 1.0}}), "continue-on-(-1,1)")};
}

ValueFunctions TwoEquilibriaExample::immediate_values() const {
    return *closed_form_value_functions(problem, model, immediate);
}

ValueFunctions TwoEquilibriaExample::interval_values() const {
    return *closed_form_value_functions(problem, model, interval);
}

}  // namespace tistop
