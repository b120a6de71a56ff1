#include "tistop/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "path_engine.hpp"
#include "tistop/error.hpp"
#include "tistop/numerics.hpp"

namespace tistop {

std::string to_string(Condition c) {
    switch (c) {
        case Condition::I: return "I";
        case Condition::II: return "II";
        case Condition::III: return "III";
        case Condition::IV: return "IV";
        case Condition::V: return "V";
        case Condition::SmoothFit: return "SmoothFit";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

Verdict combine(std::span<const ConditionVerdict> verdicts) {
    bool inconclusive = false;
    for (const auto& v : verdicts) {
        if (v.overall == Verdict::Fail) return Verdict::Fail;
        if (v.overall == Verdict::Inconclusive) inconclusive = true;
    }
    return inconclusive ? Verdict::Inconclusive : Verdict::Pass;
}

namespace {

enum class Judged { Pass, Marginal, Fail };

/// Judge `excess` (amount by which the residual violates its bound; <= 0 is fine).
/// With a standard error, up to 3 se passes and up to 6 se is marginal.
Judged judge(double excess, double tol, bool statistical) {
    if (excess <= tol) return Judged::Pass;
    if (statistical && excess <= 2.0 * tol) return Judged::Marginal;
    return Judged::Fail;
}

struct VerdictBuilder {
    ConditionVerdict v;
    bool marginal = false;
    bool failed = false;

    explicit VerdictBuilder(Condition c) { v.condition = c; }

    void add(double x, double residual, double excess, double tol, bool statistical) {
        const Judged j = judge(excess, tol, statistical);
        v.points.push_back({x, residual, tol, j == Judged::Pass});
        if (j == Judged::Marginal) marginal = true;
        if (j == Judged::Fail) failed = true;
    }
    void inconclusive(double x, double residual, double tol, const std::string& why) {
        v.points.push_back({x, residual, tol, false});
        marginal = true;
        if (v.note.empty()) v.note = why;
    }
    ConditionVerdict finish() {
        v.overall = failed ? Verdict::Fail : marginal ? Verdict::Inconclusive : Verdict::Pass;
        return std::move(v);
    }
};

double mc_tol(double se) { return se > 0.0 ? 3.0 * se : kClosedFormTolerance; }

int side_toward(const ContinuationSet& c, double x, int side) {
    const double delta = 1e-9 * std::max(1.0, std::abs(x));
    return c.contains(x + (side > 0 ? delta : -delta)) ? 1 : 0;
}

}  // namespace

ConditionVerdict check_condition_I(const Problem& problem, const ValueFunctions& vf, std::span<const double> grid) {
    VerdictBuilder b(Condition::I);
    for (double x : grid) {
        const double base = problem.stop_reward(x);
        if (vf.mode == ValueMode::MCGrid) {
            const ValueTriple* t = vf.at(x);
            if (!t) {
                b.inconclusive(x, vf.phi(x) + problem.g(vf.psi(x)) - base, 0.0, "no Monte Carlo estimate at grid point");
                continue;
            }
            const double r = t->j - base;
            b.add(x, r, -r, mc_tol(t->j_se), true);
        } else {
            const double r = vf.phi(x) + problem.g(vf.psi(x)) - base;
            b.add(x, r, -r, kClosedFormTolerance, false);
        }
    }
    return b.finish();
}

ConditionVerdict check_condition_II(const Problem& problem, const DiffusionModel& model, std::span<const double> grid) {
    VerdictBuilder b(Condition::II);
    for (double x : grid) {
        const double r = generator_apply(model, problem.f, x) +
                         problem.g.deriv(1, problem.h(x)) * generator_apply(model, problem.h, x);
        b.add(x, r, r, kClosedFormTolerance, false);
    }
    return b.finish();
}

ConditionIIIIV check_condition_III_IV(const Problem& problem, const MixedStrategy& strategy, const ValueFunctions& vf,
                                      std::span<const double> grid) {
    VerdictBuilder b3(Condition::III);
    VerdictBuilder b4(Condition::IV);
    for (double x : grid) {
        const bool killing = strategy.lambda(x) > 0.0;
        VerdictBuilder& b = killing ? b3 : b4;
        const double f = problem.f(x);
        const double h = problem.h(x);
        double phi = 0.0;
        double psi = 0.0;
        double tol = kClosedFormTolerance;
        const bool mc = vf.mode == ValueMode::MCGrid;
        if (mc) {
            const ValueTriple* t = vf.at(x);
            if (!t) {
                b.inconclusive(x, f - vf.phi(x) + problem.g.deriv(1, vf.psi(x)) * (h - vf.psi(x)), 0.0,
                               "no Monte Carlo estimate at grid point");
                continue;
            }
            phi = t->phi.estimate;
            psi = t->psi.estimate;
            const double a = problem.g.deriv(2, psi) * (h - psi) - problem.g.deriv(1, psi);
            const double var = t->phi.std_error * t->phi.std_error + a * a * t->psi.std_error * t->psi.std_error -
                               2.0 * a * t->phi_psi_cov;
            tol = mc_tol(std::sqrt(std::max(var, 0.0)));
        } else {
            phi = vf.phi(x);
            psi = vf.psi(x);
        }
        const double r = f - phi + problem.g.deriv(1, psi) * (h - psi);
        b.add(x, r, killing ? std::abs(r) : r, tol, mc);
    }
    return {b3.finish(), b4.finish()};
}

namespace {

struct SmoothFitPoint {
    double residual = 0.0;
    double tol = 0.0;
};

SmoothFitPoint smooth_fit_at(const Problem& problem, const ContinuationSet& c, const ValueFunctions& vf, double x) {
    const double hx = problem.h(x);
    const double target = problem.f.deriv(1, x) + problem.g.deriv(1, hx) * problem.h.deriv(1, x);
    const double psi = vf.psi(x);
    const double gp = problem.g.deriv(1, psi);
    SmoothFitPoint out;
    out.tol = vf.closed_derivatives() ? kClosedFormTolerance : kFiniteDifferenceTolerance;
    bool any = false;
    for (int side : {-1, 1}) {
        if (!side_toward(c, x, side)) continue;
        const double jp = vf.derivative(false, 1, x, side) + gp * vf.derivative(true, 1, x, side);
        const double r = jp - target;
        if (!any || std::abs(r) > std::abs(out.residual)) out.residual = r;
        any = true;
    }
    if (!any) throw DomainError("smooth fit evaluated at a point that does not bound C");
    return out;
}

}  // namespace

ConditionVerdict check_smooth_fit(const Problem& problem, const ContinuationSet& continuation, const ValueFunctions& vf,
                                  std::span<const double> boundary) {
    VerdictBuilder b(Condition::SmoothFit);
    for (double x : boundary) {
        if (vf.mode == ValueMode::MCGrid && !vf.closed_derivatives()) {
            b.inconclusive(x, 0.0, 0.0, "one-sided derivatives are not available from Monte Carlo grid values");
            continue;
        }
        const auto p = smooth_fit_at(problem, continuation, vf, x);
        b.add(x, p.residual, std::abs(p.residual), p.tol, false);
    }
    return b.finish();
}

namespace {

double condition_v_value(const Problem& problem, const DiffusionModel& model, const ValueFunctions& vf, double x) {
    const double psi = vf.psi(x);
    const double g1 = problem.g.deriv(1, psi);
    const double g2 = problem.g.deriv(2, psi);
    const double mu = model.drift(x);
    const double s2 = model.variance(x);
    double total = 0.0;
    for (int side : {1, -1}) {
        const double a_phi = mu * vf.derivative(false, 1, x, side) + 0.5 * s2 * vf.derivative(false, 2, x, side);
        const double a_psi = mu * vf.derivative(true, 1, x, side) + 0.5 * s2 * vf.derivative(true, 2, x, side);
        total += a_phi + g1 * a_psi;
    }
    const double jump = 0.5 * (vf.derivative(true, 1, x, 1) - vf.derivative(true, 1, x, -1));
    return total + g2 * jump * jump * s2;
}

}  // namespace

ConditionVerdict check_condition_V_sufficient(const Problem& problem, const DiffusionModel& model,
                                              const ContinuationSet& continuation, const ValueFunctions& vf,
                                              std::span<const double> boundary) {
    VerdictBuilder b(Condition::V);
    for (double x : boundary) {
        if (vf.mode == ValueMode::MCGrid && !vf.closed_derivatives()) {
            b.inconclusive(x, 0.0, 0.0, "one-sided derivatives are not available from Monte Carlo grid values");
            continue;
        }
        const double tol = vf.closed_derivatives() ? kClosedFormTolerance : kFiniteDifferenceTolerance;
        const double r = condition_v_value(problem, model, vf, x);
        const auto sf = smooth_fit_at(problem, continuation, vf, x);
        if (std::abs(sf.residual) > sf.tol) {
            b.inconclusive(x, r, tol, "smooth fit fails, so the sufficient condition does not apply");
            continue;
        }
        b.add(x, r, r, tol, false);
    }
    return b.finish();
}

std::vector<Deviation> standard_deviation_family(const MixedStrategy& strategy, const DiffusionModel& model) {
    const SmoothFn lam = strategy.intensity;
    auto scaled = [&lam](double k) {
        if (lam.constant) return SmoothFn::constant_fn(k * *lam.constant);
        SmoothFn s;
        s.value = [lam, k](double x) { return k * lam(x); };
        return s;
    };
    struct Eta {
        SmoothFn fn;
        std::string label;
    };
    const std::vector<Eta> etas{{SmoothFn::constant_fn(0.0), "eta=0"},
                                {scaled(0.5), "eta=lambda/2"},
                                {scaled(2.0), "eta=2*lambda"},
                                {SmoothFn::constant_fn(5.0), "eta=5"}};
    struct Dom {
        ContinuationSet set;
        std::string label;
    };
    std::vector<Dom> doms{{ContinuationSet::empty(), "D=empty"}};
    const ContinuationSet whole = ContinuationSet::whole(model.state_interval());
    if (!strategy.continuation.is_empty() && strategy.continuation.intervals() != whole.intervals())
        doms.push_back({strategy.continuation, "D=C"});
    doms.push_back({whole, "D=E"});

    std::vector<Deviation> out;
    for (const auto& d : doms) {
        if (d.set.is_empty()) {
            out.push_back({SmoothFn::constant_fn(0.0), d.set, d.label});
            continue;
        }
        std::vector<std::optional<double>> seen;
        for (const auto& e : etas) {
            if (e.fn.constant) {
                if (std::find(seen.begin(), seen.end(), e.fn.constant) != seen.end()) continue;
                seen.push_back(e.fn.constant);
            }
            out.push_back({e.fn, d.set, e.label + "," + d.label});
        }
    }
    return out;
}

std::optional<double> deviation_limit(const Problem& problem, const DiffusionModel& model, const MixedStrategy& strategy,
                                      const ValueFunctions& vf, const Deviation& deviation, double x, std::string* which) {
    auto set_case = [which](const char* s) {
        if (which) *which = s;
    };
    const double psi = vf.psi(x);
    if (!deviation.domain.contains(x)) {
        set_case("x outside D: numerator J - f - g(h) does not depend on h");
        const double n = vf.phi(x) + problem.g(psi) - problem.stop_reward(x);
        if (std::abs(n) <= kClosedFormTolerance) return 0.0;
        return n > 0.0 ? kInf : -kInf;
    }
    switch (classify_point(strategy.continuation, x)) {
        case PointClass::InC: {
            set_case("x in C and D: (lambda - eta)(f - phi + g'(psi)(h - psi))");
            const double r = problem.f(x) - vf.phi(x) + problem.g.deriv(1, psi) * (problem.h(x) - psi);
            return (strategy.lambda(x) - deviation.eta(x)) * r;
        }
        case PointClass::IntComplement: {
            set_case("x in int(C^c) and D: -(A f + g'(h) A h)");
            return -(generator_apply(model, problem.f, x) +
                     problem.g.deriv(1, problem.h(x)) * generator_apply(model, problem.h, x));
        }
        case PointClass::Boundary: {
            set_case("x on the boundary of C and in D: -1/2 (V)");
            if (vf.mode == ValueMode::MCGrid && !vf.closed_derivatives()) return std::nullopt;
            return -0.5 * condition_v_value(problem, model, vf, x);
        }
    }
    return std::nullopt;
}

double exit_step(const DiffusionModel& model, double x, double h, double dt) {
    const double s2 = model.variance(x);
    if (!(s2 > 0.0)) throw DomainError("volatility must be positive");
    return std::min(dt, h * h / (100.0 * s2));
}

namespace {

PathConfig ball_config(const DiffusionModel& model, double x, double h, const PathConfig& config) {
    const Interval& e = model.state_interval();
    if (!(h > 0.0)) throw DomainError("h must be positive");
    if (!(x - h > e.lo && x + h < e.hi)) throw DomainError("[x-h, x+h] must lie inside the state interval");
    PathConfig c = config;
    c.dt = exit_step(model, x, h, config.dt);
    c.validate();
    return c;
}

}  // namespace

DeviationLadder deviation_gain(const Problem& problem, const DiffusionModel& model, const MixedStrategy& strategy,
                               const ValueFunctions& vf, const Deviation& deviation, double x,
                               std::span<const double> h_ladder, const PathConfig& config, std::size_t n_paths) {
    if (!model.in_state(x)) throw DomainError("deviation_gain: x outside the state interval");
    if (n_paths < 2) throw ParameterError("deviation_gain needs at least 2 paths");
    DeviationLadder ladder;
    ladder.label = deviation.label;
    ladder.x = x;
    ladder.limit = deviation_limit(problem, model, strategy, vf, deviation, x, &ladder.limit_case);

    const double j_x = vf.phi(x) + problem.g(vf.psi(x));
    const auto dcomp = deviation.domain.component(x);
    const detail::PathEngine engine(model);
    const SmoothFn& eta = deviation.eta;
    const bool eta_const = eta.constant.has_value();
    const double eta_c = eta_const ? *eta.constant : 0.0;

    for (double h : h_ladder) {
        const PathConfig cfg = ball_config(model, x, h, config);
        const double lo = x - h;
        const double hi = x + h;
        const detail::Barriers ball{engine.to_y(lo), engine.to_y(hi)};

        struct Row {
            double f, hv, tau;
        };
        const auto rows = parallel_map<Row>(n_paths, cfg.threads, [&](std::size_t i) {
            auto rng = PathStream::for_path(cfg.seed, i, cfg.antithetic);
            bool stopped = !dcomp;
            Row row{0.0, 0.0, 0.0};
            if (stopped) {
                row.f = problem.f(x);
                row.hv = problem.h(x);
            }
            const double dlo = dcomp ? std::max(lo, dcomp->lo) : lo;
            const double dhi = dcomp ? std::min(hi, dcomp->hi) : hi;
            const detail::Barriers inner{engine.to_y(dlo), engine.to_y(dhi)};
            const double threshold = stopped ? 0.0 : rng.exponential();
            double cum = 0.0;
            double y = engine.to_y(x);
            double lam0 = stopped ? 0.0 : (eta_const ? eta_c : eta(x));
            double t = 0.0;
            const detail::StepClock clock(cfg.dt);
            while (t < cfg.horizon) {
                const auto [dt, sq] = clock.step(std::min(cfg.dt, cfg.horizon - t));
                const auto step = engine.advance(y, dt, sq, stopped ? ball : inner, rng);
                const double x_end = step.crossed > 0 ? (stopped ? hi : dhi)
                                     : step.crossed < 0 ? (stopped ? lo : dlo)
                                                        : engine.to_x(step.y);
                if (!stopped) {
                    const double lam1 = eta_const ? eta_c : eta(x_end);
                    const double inc = 0.5 * (lam0 + lam1) * step.elapsed;
                    if (cum + inc >= threshold) {
                        const double c2[2] = {cum, cum + inc};
                        const double t2[2] = {0.0, step.elapsed};
                        const double s = integrated_intensity_invert(c2, t2, threshold);
                        const double theta = step.elapsed > 0.0 ? s / step.elapsed : 0.0;
                        const double xs =
                            std::clamp(engine.to_x(engine.interpolate(y, step.y, theta, step.elapsed, rng)), dlo, dhi);
                        stopped = true;
                        row.f = problem.f(xs);
                        row.hv = problem.h(xs);
                    }
                    cum += inc;
                    lam0 = lam1;
                    if (!stopped && step.crossed != 0) {
                        const bool at_d = step.crossed > 0 ? (dcomp->hi <= hi) : (dcomp->lo >= lo);
                        if (at_d) {
                            stopped = true;
                            row.f = problem.f(x_end);
                            row.hv = problem.h(x_end);
                        }
                    }
                }
                if (step.crossed != 0 && (x_end == lo || x_end == hi)) {
                    row.tau = t + step.elapsed;
                    if (!stopped) {
                        row.f = vf.phi(x_end);
                        row.hv = vf.psi(x_end);
                    }
                    return row;
                }
                // Either no crossing or a D exit strictly inside the ball: keep going.
                y = step.y;
                t += step.elapsed;
            }
            throw HorizonExceededError("deviation path did not leave [x-h, x+h] before the horizon");
        });

        const auto fs = mean_stat(rows, [](const Row& r) { return r.f; });
        const auto hs = mean_stat(rows, [](const Row& r) { return r.hv; });
        const auto ts = mean_stat(rows, [](const Row& r) { return r.tau; });
        const double g1 = problem.g.deriv(1, hs.mean);
        const double num = j_x - (fs.mean + problem.g(hs.mean));
        const double ratio = num / ts.mean;
        std::vector<double> u(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            u[i] = -((r.f - fs.mean) + g1 * (r.hv - hs.mean)) / ts.mean - ratio * (r.tau - ts.mean) / ts.mean;
        }
        const auto us = mean_stat(u, [](double v) { return v; }, cfg.antithetic);
        ladder.points.push_back({h, ratio, us.std_error, ts.mean, n_paths});
    }
    return ladder;
}

double LocalTimeReport::final_error() const {
    if (points.empty()) return kInf;
    const double e = points.back().estimate;
    return target != 0.0 ? std::abs(e - target) / std::abs(target) : std::abs(e);
}

LocalTimeReport local_time_limit_check(const DiffusionModel& model, const KinkedFn& k, double x,
                                       std::span<const double> h_ladder, const PathConfig& config,
                                       std::size_t n_paths) {
    if (!k.value) throw DomainError("local_time_limit_check needs a function value");
    if (n_paths < 2) throw ParameterError("local_time_limit_check needs at least 2 paths");
    LocalTimeReport rep;
    const double jump = 0.5 * (k.slope_right - k.slope_left);
    rep.target = jump * jump * model.variance(x);
    const double kx = k.value(x);
    for (double h : h_ladder) {
        const PathConfig cfg = ball_config(model, x, h, config);
        struct Row {
            double k, tau;
        };
        const auto rows = parallel_map<Row>(n_paths, cfg.threads, [&](std::size_t i) {
            auto rng = PathStream::for_path(cfg.seed, i, cfg.antithetic);
            const auto s = sample_symmetric_exit(model, x, h, cfg, rng);
            return Row{k.value(s.state), s.time};
        });
        const auto ks = mean_stat(rows, [](const Row& r) { return r.k; });
        const auto ts = mean_stat(rows, [](const Row& r) { return r.tau; });
        const double diff = ks.mean - kx;
        const double est = diff * diff / ts.mean;
        std::vector<double> u(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            u[i] = 2.0 * diff / ts.mean * (rows[i].k - ks.mean) - est / ts.mean * (rows[i].tau - ts.mean);
        const auto us = mean_stat(u, [](double v) { return v; }, cfg.antithetic);
        rep.points.push_back({h, est, us.std_error, ts.mean, cfg.dt});
    }
    return rep;
}

std::vector<double> report_grid(const GridSpec& spec, const DiffusionModel& model, const ContinuationSet& c) {
    if (!(spec.lo <= spec.hi)) throw DomainError("grid requires lo <= hi");
    if (spec.n == 0) throw DomainError("grid requires at least one point");
    if (!model.in_state(spec.lo) || !model.in_state(spec.hi)) throw DomainError("grid must lie inside the state interval");
    auto xs = linspace(spec.lo, spec.hi, spec.n);
    for (double b : c.boundary(model.state_interval()))
        if (b >= spec.lo && b <= spec.hi) xs.push_back(b);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a - b) <= kBoundaryTolerance; }),
             xs.end());
    // A grid point that matches a boundary within tolerance is replaced by the boundary itself.
    for (double& x : xs)
        for (double b : c.boundary(model.state_interval()))
            if (std::abs(x - b) <= kBoundaryTolerance) x = b;
    return xs;
}

EquilibriumReport run_full_report(const Problem& problem, const DiffusionModel& model, const MixedStrategy& strategy,
                                  const ValueFunctions& vf, const ReportOptions& options) {
    EquilibriumReport rep;
    rep.grid = options.grid;
    {
        std::ostringstream os;
        os << (strategy.label.empty() ? "strategy" : strategy.label) << ": C = " << strategy.continuation.describe();
        if (strategy.intensity.constant) os << ", lambda = " << *strategy.intensity.constant;
        rep.strategy = os.str();
    }
    strategy.continuation.check_inside(model.state_interval());
    const auto xs = report_grid(options.grid, model, strategy.continuation);
    std::vector<double> in_c;
    std::vector<double> outside;
    std::vector<double> boundary;
    for (double x : xs) {
        switch (classify_point(strategy.continuation, x)) {
            case PointClass::InC: in_c.push_back(x); break;
            case PointClass::IntComplement: outside.push_back(x); break;
            case PointClass::Boundary: boundary.push_back(x); break;
        }
    }
    if (!in_c.empty()) {
        rep.verdicts.push_back(check_condition_I(problem, vf, in_c));
        auto iii_iv = check_condition_III_IV(problem, strategy, vf, in_c);
        if (!iii_iv.iii.points.empty()) rep.verdicts.push_back(std::move(iii_iv.iii));
        if (!iii_iv.iv.points.empty()) rep.verdicts.push_back(std::move(iii_iv.iv));
    }
    if (!outside.empty()) rep.verdicts.push_back(check_condition_II(problem, model, outside));
    if (!boundary.empty()) {
        auto sf = check_smooth_fit(problem, strategy.continuation, vf, boundary);
        auto v = check_condition_V_sufficient(problem, model, strategy.continuation, vf, boundary);
        const bool need_evidence = sf.overall == Verdict::Inconclusive || v.overall == Verdict::Inconclusive;
        rep.verdicts.push_back(std::move(sf));
        rep.verdicts.push_back(std::move(v));
        const bool already_failed = combine(rep.verdicts) == Verdict::Fail;
        if (need_evidence && !already_failed && !options.evidence_h.empty() && options.evidence_paths >= 2) {
            for (double b : boundary) {
                for (const auto& dev : standard_deviation_family(strategy, model)) {
                    if (!dev.domain.contains(b)) continue;
                    try {
                        rep.evidence.push_back(deviation_gain(problem, model, strategy, vf, dev, b, options.evidence_h,
                                                              options.config, options.evidence_paths));
                    } catch (const DomainError&) {
                        // Ladder does not fit inside the state interval at this point.
                    }
                }
            }
        }
    }
    rep.summary = combine(rep.verdicts);
    return rep;
}

}  // namespace tistop
