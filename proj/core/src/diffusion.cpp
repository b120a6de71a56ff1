#include "tistop/diffusion.hpp"

#include <cmath>
#include <sstream>

#include "path_engine.hpp"
#include "tistop/error.hpp"
#include "tistop/numerics.hpp"

namespace tistop {

DiffusionModel DiffusionModel::gbm(double mu, double sigma2) {
    if (!(sigma2 > 0.0)) throw ParameterError("GBM requires sigma^2 > 0");
    DiffusionModel m;
    const double sigma = std::sqrt(sigma2);
    m.drift_ = [mu](double x) { return mu * x; };
    m.vol_ = [sigma](double x) { return sigma * x; };
    m.state_ = {0.0, kInf};
    m.scheme_ = Scheme::GBM;
    m.mu_ = mu;
    m.sigma2_ = sigma2;
    // log X has drift mu - sigma^2/2; negative drift sends X to 0.
    if (mu < 0.5 * sigma2) m.limit_state_ = 0.0;
    return m;
}

DiffusionModel DiffusionModel::wiener() {
    DiffusionModel m;
    m.drift_ = [](double) { return 0.0; };
    m.vol_ = [](double) { return 1.0; };
    m.state_ = {-kInf, kInf};
    m.scheme_ = Scheme::Wiener;
    m.sigma2_ = 1.0;
    return m;
}

DiffusionModel DiffusionModel::general(RealFn drift, RealFn vol, Interval state, std::optional<double> limit_state) {
    if (!drift || !vol) throw ParameterError("general diffusion needs drift and volatility");
    if (!(state.lo < state.hi)) throw ParameterError("state interval must satisfy lo < hi");
    DiffusionModel m;
    m.drift_ = std::move(drift);
    m.vol_ = std::move(vol);
    m.state_ = state;
    m.scheme_ = Scheme::GeneralEuler;
    m.limit_state_ = limit_state;
    return m;
}

std::string DiffusionModel::describe() const {
    std::ostringstream os;
    switch (scheme_) {
        case Scheme::GBM: os << "GBM(mu=" << mu_ << ", sigma2=" << sigma2_ << ")"; break;
        case Scheme::Wiener: os << "Wiener"; break;
        case Scheme::GeneralEuler: os << "Euler diffusion on (" << state_.lo << ", " << state_.hi << ")"; break;
    }
    return os.str();
}

void PathConfig::validate() const {
    if (!(dt > 0.0)) throw ParameterError("dt must be positive");
    if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
    if (dt > horizon) throw ParameterError("dt must not exceed the horizon");
}

double generator_apply(const DiffusionModel& model, const SmoothFn& k, double x) {
    if (!model.in_state(x)) throw DomainError("generator evaluated outside the state interval");
    const double k1 = k.deriv(1, x);
    const double k2 = k.deriv(2, x);
    return model.drift(x) * k1 + 0.5 * model.variance(x) * k2;
}

namespace {

double euler_advance(const DiffusionModel& model, double x, double dt, PathStream& rng, int depth) {
    const double proposal = x + model.drift(x) * dt + model.vol(x) * std::sqrt(dt) * rng.normal();
    if (model.in_state(proposal)) return proposal;
    if (depth >= 30) throw BoundaryEscapeError("Euler step left the state interval after 30 halvings");
    const double mid = euler_advance(model, x, 0.5 * dt, rng, depth + 1);
    return euler_advance(model, mid, 0.5 * dt, rng, depth + 1);
}

}  // namespace

double simulate_step(const DiffusionModel& model, double x, double dt, double noise, PathStream* rng) {
    if (!model.in_state(x)) throw DomainError("simulate_step: state outside the state interval");
    if (dt < 0.0) throw DomainError("simulate_step: negative dt");
    if (dt == 0.0) return x;
    const double sq = std::sqrt(dt);
    switch (model.scheme()) {
        case Scheme::GBM: {
            const double mu = model.gbm_mu();
            const double s2 = model.gbm_sigma2();
            return x * std::exp((mu - 0.5 * s2) * dt + std::sqrt(s2) * sq * noise);
        }
        case Scheme::Wiener: return x + sq * noise;
        case Scheme::GeneralEuler: {
            const double proposal = x + model.drift(x) * dt + model.vol(x) * sq * noise;
            if (model.in_state(proposal)) return proposal;
            if (rng == nullptr) throw BoundaryEscapeError("Euler step left the state interval");
            const double mid = euler_advance(model, x, 0.5 * dt, *rng, 1);
            return euler_advance(model, mid, 0.5 * dt, *rng, 1);
        }
    }
    return x;
}

namespace detail {

PathEngine::PathEngine(const DiffusionModel& model) : model_(model) {
    switch (model.scheme()) {
        case Scheme::GBM:
            log_space_ = true;
            drift_ = model.gbm_mu() - 0.5 * model.gbm_sigma2();
            vol_ = std::sqrt(model.gbm_sigma2());
            break;
        case Scheme::Wiener:
            drift_ = 0.0;
            vol_ = 1.0;
            break;
        case Scheme::GeneralEuler: break;
    }
}

Barriers PathEngine::barriers(double lo_x, double hi_x) const noexcept {
    const Interval& e = model_.state_interval();
    Barriers b;
    b.lo = lo_x > e.lo ? to_y(lo_x) : -kInf;
    b.hi = hi_x < e.hi ? to_y(hi_x) : kInf;
    return b;
}

StepResult PathEngine::advance_euler(double y, double dt, const Barriers& b, PathStream& rng) const {
    // Sub-steps pending on an explicit stack: (length, depth).
    struct Piece {
        double dt;
        int depth;
    };
    Piece stack[64];
    int top = 0;
    stack[top++] = {dt, 0};
    double elapsed = 0.0;
    double x = y;
    while (top > 0) {
        const Piece p = stack[--top];
        const double s = model_.vol(x);
        const double proposal = x + model_.drift(x) * p.dt + s * std::sqrt(p.dt) * rng.normal();
        if (!model_.in_state(proposal)) {
            if (p.depth >= 30) throw BoundaryEscapeError("Euler step left the state interval after 30 halvings");
            stack[top++] = {0.5 * p.dt, p.depth + 1};
            stack[top++] = {0.5 * p.dt, p.depth + 1};
            continue;
        }
        if (proposal >= b.hi) return {b.hi, elapsed + p.dt * (b.hi - x) / (proposal - x), 1};
        if (proposal <= b.lo) return {b.lo, elapsed + p.dt * (x - b.lo) / (x - proposal), -1};
        const int side = bridge_crossing(x, proposal, s * s * p.dt, b, rng);
        if (side > 0) return {b.hi, elapsed + 0.5 * p.dt, 1};
        if (side < 0) return {b.lo, elapsed + 0.5 * p.dt, -1};
        x = proposal;
        elapsed += p.dt;
    }
    return {x, elapsed, 0};
}

double PathEngine::interpolate(double y0, double y1, double theta, double dt, PathStream& rng) const {
    const double mean = y0 + theta * (y1 - y0);
    if (model_.scheme() == Scheme::GeneralEuler) return mean;
    return mean + vol_ * std::sqrt(theta * (1.0 - theta) * dt) * rng.normal();
}

}  // namespace detail

ExitSample sample_symmetric_exit(const DiffusionModel& model, double x, double h, const PathConfig& config,
                                 PathStream& rng) {
    if (!(h > 0.0)) throw DomainError("sample_symmetric_exit: h must be positive");
    const Interval& e = model.state_interval();
    if (!(x - h > e.lo && x + h < e.hi)) throw DomainError("sample_symmetric_exit: [x-h, x+h] must lie inside the state interval");
    config.validate();

    const detail::PathEngine engine(model);
    const detail::Barriers b{engine.to_y(x - h), engine.to_y(x + h)};
    const detail::StepClock clock(config.dt);
    double y = engine.to_y(x);
    double t = 0.0;
    for (std::uint64_t k = 0;; ++k) {
        const double t_next = std::min(static_cast<double>(k + 1) * config.dt, config.horizon);
        if (!(t_next > t)) break;
        const auto [dt, sq] = clock.step(t_next - t);
        const auto step = engine.advance(y, dt, sq, b, rng);
        if (step.crossed > 0) return {x + h, t + step.elapsed};
        if (step.crossed < 0) return {x - h, t + step.elapsed};
        y = step.y;
        t = t_next;
        if (t >= config.horizon) break;
    }
    throw HorizonExceededError("no exit of [x-h, x+h] before the horizon");
}

ExitStatistics exit_time_statistics(const DiffusionModel& model, double x, double h, const PathConfig& config,
                                    std::size_t n_paths) {
    struct Row {
        double tau;
        double up;
    };
    const auto rows = parallel_map<Row>(n_paths, config.threads, [&](std::size_t i) {
        auto rng = PathStream::for_path(config.seed, i, config.antithetic);
        const auto s = sample_symmetric_exit(model, x, h, config, rng);
        return Row{s.time, s.state > x ? 1.0 : 0.0};
    });
    const auto tau = mean_stat(rows, [](const Row& r) { return r.tau; }, config.antithetic);
    const auto tau2 = mean_stat(rows, [](const Row& r) { return r.tau * r.tau; }, config.antithetic);
    const auto up = mean_stat(rows, [](const Row& r) { return r.up; }, config.antithetic);
    ExitStatistics s;
    s.h = h;
    s.mean_time = tau.mean;
    s.mean_time_se = tau.std_error;
    s.mean_time_sq = tau2.mean;
    s.mean_time_sq_se = tau2.std_error;
    s.prob_up = up.mean;
    s.prob_up_se = up.std_error;
    s.n_paths = n_paths;
    return s;
}

double gbm_hitting_prob(double xi, double x, double b) {
    if (!(xi > 0.0 && xi < 1.0)) throw DomainError("gbm_hitting_prob requires 0 < xi < 1");
    if (!(x > 0.0 && x <= b)) throw DomainError("gbm_hitting_prob requires 0 < x <= b");
    return std::pow(b, xi - 1.0) * std::pow(x, 1.0 - xi);
}

double gbm_two_sided_exit(double xi, double x, double c, double d) {
    if (!(c > 0.0 && c <= x && x <= d && c < d)) throw DomainError("gbm_two_sided_exit requires 0 < c <= x <= d, c < d");
    if (x == c) return 0.0;
    if (x == d) return 1.0;
    // Scale function s(y) = y^(1-xi), or log y when xi = 1.
    auto scale = [xi](double y) { return xi == 1.0 ? std::log(y) : std::pow(y, 1.0 - xi); };
    return (scale(x) - scale(c)) / (scale(d) - scale(c));
}

}  // namespace tistop
