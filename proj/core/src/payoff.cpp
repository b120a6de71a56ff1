#include "tistop/payoff.hpp"

#include <cmath>

#include "tistop/error.hpp"
#include "tistop/numerics.hpp"

namespace tistop {

Problem make_variance_problem() {
    Problem p;
    p.f = SmoothFn::polynomial({0.0, 0.0, 1.0});
    p.g = SmoothFn::polynomial({0.0, 0.0, -1.0});
    p.h = SmoothFn::polynomial({0.0, 1.0});
    p.name = "variance";
    p.f_poly = std::vector<double>{0.0, 0.0, 1.0};
    p.h_poly = std::vector<double>{0.0, 1.0};
    return p;
}

Problem make_mean_variance_problem(double gamma) {
    if (!(gamma > 0.0)) throw ParameterError("mean-variance problem requires gamma > 0");
    Problem p;
    p.f = SmoothFn::polynomial({0.0, 0.0, -gamma});
    p.g = SmoothFn::polynomial({0.0, 1.0, gamma});
    p.h = SmoothFn::polynomial({0.0, 1.0});
    p.name = "mean-variance";
    p.f_poly = std::vector<double>{0.0, 0.0, -gamma};
    p.h_poly = std::vector<double>{0.0, 1.0};
    return p;
}

Problem make_two_equilibria_problem() {
    Problem p;
    const std::vector<double> f{0.0, 0.0, 0.0, 0.0, -1.0 / 3.0, 0.0, 1.0 / 9.0};
    const std::vector<double> h{0.0, 0.0, 1.0};
    p.f = SmoothFn::polynomial(f);
    p.g = SmoothFn::polynomial({0.0, 0.0, 1.0, -5.0 / 9.0});
    p.h = SmoothFn::polynomial(h);
    p.name = "two-equilibria";
    p.f_poly = f;
    p.h_poly = h;
    return p;
}

void ValueTriple::recompute(const SmoothFn& g) {
    j = phi.estimate + g(psi.estimate);
    if (exact) {
        j_se = 0.0;
        return;
    }
    const double gp = g.has(1) ? g.deriv(1, psi.estimate) : 0.0;
    const double var = phi.std_error * phi.std_error + gp * gp * psi.std_error * psi.std_error + 2.0 * gp * phi_psi_cov;
    j_se = std::sqrt(std::max(var, 0.0));
}

ValueTriple exact_values(const Problem& problem, double phi, double psi) {
    ValueTriple v;
    v.phi.estimate = phi;
    v.psi.estimate = psi;
    v.exact = true;
    v.recompute(problem.g);
    return v;
}

ValueTriple estimate_values(const Problem& problem, const DiffusionModel& model, const MixedStrategy& strategy,
                            double x, const PathConfig& config, std::size_t n_paths) {
    if (!model.in_state(x)) throw DomainError("estimate_values: start outside the state interval");
    config.validate();
    if (!strategy.continuation.contains(x)) return exact_values(problem, problem.f(x), problem.h(x));
    if (n_paths < 2) throw ParameterError("estimate_values needs at least 2 paths");

    struct Row {
        double f;
        double h;
        bool censored;
    };
    const auto limit = model.limit_state();
    const auto rows = parallel_map<Row>(n_paths, config.threads, [&](std::size_t i) {
        auto rng = PathStream::for_path(config.seed, i, config.antithetic);
        const StopOutcome out = sample_stop(model, strategy, x, config, rng);
        const bool censored = out.kind == StopKind::Censored;
        const double s = censored && limit ? *limit : out.state;
        return Row{problem.f(s), problem.h(s), censored};
    });

    const bool paired = config.antithetic;
    const auto fs = mean_stat(rows, [](const Row& r) { return r.f; }, paired);
    const auto hs = mean_stat(rows, [](const Row& r) { return r.h; }, paired);
    const auto cs = mean_stat(rows, [](const Row& r) { return r.censored ? 1.0 : 0.0; });
    CompensatedSum cross;
    double n = static_cast<double>(n_paths);
    if (paired) {
        const std::size_t m = n_paths / 2;
        for (std::size_t k = 0; k < m; ++k) {
            const auto& a = rows[2 * k];
            const auto& c = rows[2 * k + 1];
            cross.add((0.5 * (a.f + c.f) - fs.mean) * (0.5 * (a.h + c.h) - hs.mean));
        }
        n = static_cast<double>(m);
    } else {
        for (const auto& r : rows) cross.add((r.f - fs.mean) * (r.h - hs.mean));
    }

    ValueTriple v;
    v.phi = {fs.mean, fs.std_error, n_paths, cs.mean, {}};
    v.psi = {hs.mean, hs.std_error, n_paths, cs.mean, {}};
    v.phi_psi_cov = n > 1.0 ? cross.value() / (n - 1.0) / n : 0.0;
    if (cs.mean > 0.01 && !limit) {
        const std::string w = "censored fraction above 1% with no limit state; terminal states used";
        v.phi.warning = w;
        v.psi.warning = w;
    }
    v.recompute(problem.g);
    return v;
}

double closed_form_values_constant_lambda_gbm(double mu, double sigma2, double lambda, double p, double x) {
    if (!(x > 0.0)) throw DomainError("GBM state must be positive");
    if (!(lambda > 0.0)) throw DomainError("intensity must be positive");
    const double denom = lambda - p * mu - 0.5 * p * (p - 1.0) * sigma2;
    if (!(denom > 0.0)) throw DivergentMomentError("lambda <= p mu + p(p-1) sigma^2 / 2: moment diverges");
    return lambda / denom * std::pow(x, p);
}

double closed_form_values_threshold_gbm(double mu, double sigma2, double b, double p, double x) {
    if (!(sigma2 > 0.0)) throw DomainError("sigma^2 must be positive");
    const double xi = 2.0 * mu / sigma2;
    if (!(xi > 0.0 && xi < 1.0)) throw DomainError("threshold moments require 0 < xi < 1");
    if (!(x > 0.0 && x <= b)) throw DomainError("threshold moments require 0 < x <= b");
    if (p == 0.0) return 1.0;
    if (!(p > 0.0)) throw DomainError("threshold moments require p >= 0");
    return std::pow(b, p - 1.0 + xi) * std::pow(x, 1.0 - xi);
}

}  // namespace tistop
