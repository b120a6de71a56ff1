#include "tistop/oracle.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "tistop/error.hpp"
#include "tistop/numerics.hpp"

namespace tistop {

OracleResult killed_gbm_moment(double mu, double sigma2, double lambda, double p, double x, std::size_t n_samples,
                               std::uint64_t seed) {
    if (!(sigma2 > 0.0) || !(lambda > 0.0) || !(x > 0.0)) throw DomainError("killed_gbm_moment needs sigma^2, lambda, x > 0");
    OracleResult r;
    r.method = "exponential time + lognormal state (mt19937_64)";
    r.size = n_samples;
    if (p == 0.0) {
        r.value = 1.0;
        return r;
    }
    if (n_samples < 2) throw DomainError("killed_gbm_moment needs at least 2 samples");
    if (!(lambda > p * mu + 0.5 * p * (p - 1.0) * sigma2)) r.warning = "moment diverges; sample mean is not meaningful";

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6f72u};
    std::mt19937_64 gen(seq);
    std::exponential_distribution<double> exp_dist(lambda);
    std::normal_distribution<double> normal;
    const double sigma = std::sqrt(sigma2);
    std::vector<double> samples(n_samples);
    for (auto& s : samples) {
        const double tau = exp_dist(gen);
        const double xt = x * std::exp((mu - 0.5 * sigma2) * tau + sigma * std::sqrt(tau) * normal(gen));
        s = std::pow(xt, p);
    }
    const auto st = mean_stat(samples, [](double v) { return v; });
    r.value = st.mean;
    r.std_error = st.std_error;
    return r;
}

ChainSpec chain_from_strategy(const MixedStrategy& strategy, double dx) {
    ChainSpec c;
    c.continuation = strategy.continuation;
    c.dx = dx;
    const SmoothFn lam = strategy.intensity;
    c.stop_probability = [lam](double x, double dt) { return -std::expm1(-lam(x) * dt); };
    return c;
}

namespace {

/// Thomas algorithm for a[i] v[i-1] + b[i] v[i] + c[i] v[i+1] = d[i].
std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                      std::vector<double> d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (b[i - 1] == 0.0) throw SolveError("tridiagonal solve hit a zero pivot");
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    std::vector<double> v(n);
    if (b[n - 1] == 0.0) throw SolveError("tridiagonal solve hit a zero pivot");
    v[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) v[i] = (d[i] - c[i] * v[i + 1]) / b[i];
    for (double e : v)
        if (!std::isfinite(e)) throw SolveError("tridiagonal solve produced a non-finite value");
    return v;
}

}  // namespace

ChainValues discrete_chain_value(const Problem& problem, const DiffusionModel& model, const ChainSpec& chain, double x) {
    if (!model.in_state(x)) throw DomainError("discrete_chain_value: start outside the state interval");
    if (!(chain.dx > 0.0)) throw DomainError("discrete_chain_value: dx must be positive");
    ChainValues out;
    out.phi.method = out.psi.method = "absorbing random walk, tridiagonal solve";
    const auto comp = chain.continuation.component(x);
    if (!comp) {
        out.phi.value = problem.f(x);
        out.psi.value = problem.h(x);
        out.phi.size = out.psi.size = 1;
        out.j = out.phi.value + problem.g(out.psi.value);
        return out;
    }
    if (!std::isfinite(comp->lo) || !std::isfinite(comp->hi))
        throw DomainError("discrete_chain_value needs a bounded component of C");

    // Nodes: x + k dx inside the component, plus both ends.
    const auto below = static_cast<long>(std::ceil((x - comp->lo) / chain.dx)) - 1;
    const auto above = static_cast<long>(std::ceil((comp->hi - x) / chain.dx)) - 1;
    const std::size_t n = static_cast<std::size_t>(below + above + 3);
    if (n > 10001) throw DomainError("discrete_chain_value: more than 10^4 states; increase dx");
    std::vector<double> nodes;
    nodes.reserve(n);
    nodes.push_back(comp->lo);
    for (long k = -below; k <= above; ++k) nodes.push_back(x + static_cast<double>(k) * chain.dx);
    nodes.push_back(comp->hi);
    const std::size_t ix = static_cast<std::size_t>(below + 1);

    auto end_state = [&](double e) {
        const Interval& s = model.state_interval();
        if ((e == s.lo || e == s.hi) && model.limit_state()) return *model.limit_state();
        return e;
    };
    std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), df(n, 0.0), dh(n, 0.0);
    df.front() = problem.f(end_state(nodes.front()));
    dh.front() = problem.h(end_state(nodes.front()));
    df.back() = problem.f(end_state(nodes.back()));
    dh.back() = problem.h(end_state(nodes.back()));
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double xi = nodes[i];
        const double hm = xi - nodes[i - 1];
        const double hp = nodes[i + 1] - xi;
        const double dt = hp * hm / model.variance(xi);
        const double up = (hm + model.drift(xi) * dt) / (hp + hm);
        const double ps = chain.stop_probability ? chain.stop_probability(xi, dt) : 0.0;
        if (!(up >= 0.0 && up <= 1.0) || !(ps >= 0.0 && ps <= 1.0))
            throw SolveError("chain transition probability outside [0, 1]; decrease dx");
        a[i] = -(1.0 - ps) * (1.0 - up);
        c[i] = -(1.0 - ps) * up;
        df[i] = ps * problem.f(xi);
        dh[i] = ps * problem.h(xi);
    }
    const auto vf = solve_tridiagonal(a, b, c, df);
    const auto vh = solve_tridiagonal(a, b, c, dh);
    out.phi.value = vf[ix];
    out.psi.value = vh[ix];
    out.phi.size = out.psi.size = n;
    out.j = out.phi.value + problem.g(out.psi.value);
    return out;
}

}  // namespace tistop
