#include "tistop/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "path_engine.hpp"
#include "tistop/error.hpp"

namespace tistop {

ContinuationSet::ContinuationSet(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    std::sort(intervals_.begin(), intervals_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        if (!(intervals_[i].lo < intervals_[i].hi)) throw DomainError("continuation interval must satisfy lo < hi");
        if (i > 0 && intervals_[i].lo < intervals_[i - 1].hi) throw DomainError("continuation intervals overlap");
    }
}

bool ContinuationSet::contains(double x) const noexcept { return component(x).has_value(); }

std::optional<Interval> ContinuationSet::component(double x) const noexcept {
    for (const auto& iv : intervals_)
        if (iv.contains(x)) return iv;
    return std::nullopt;
}

std::vector<double> ContinuationSet::boundary(const Interval& state) const {
    std::vector<double> pts;
    for (const auto& iv : intervals_) {
        if (std::isfinite(iv.lo) && state.contains(iv.lo)) pts.push_back(iv.lo);
        if (std::isfinite(iv.hi) && state.contains(iv.hi)) pts.push_back(iv.hi);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

void ContinuationSet::check_inside(const Interval& state) const {
    for (const auto& iv : intervals_)
        if (iv.lo < state.lo || iv.hi > state.hi) throw DomainError("continuation set leaves the state interval");
}

std::string ContinuationSet::describe() const {
    if (intervals_.empty()) return "{}";
    std::ostringstream os;
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        if (i > 0) os << " U ";
        os << "(" << intervals_[i].lo << ", " << intervals_[i].hi << ")";
    }
    return os.str();
}

PointClass classify_point(const ContinuationSet& c, double x) {
    for (const auto& iv : c.intervals()) {
        if ((std::isfinite(iv.lo) && std::abs(x - iv.lo) <= kBoundaryTolerance) ||
            (std::isfinite(iv.hi) && std::abs(x - iv.hi) <= kBoundaryTolerance))
            return PointClass::Boundary;
    }
    return c.contains(x) ? PointClass::InC : PointClass::IntComplement;
}

MixedStrategy MixedStrategy::pure(ContinuationSet c, std::string label) {
    return {SmoothFn::constant_fn(0.0), std::move(c), std::move(label)};
}

MixedStrategy MixedStrategy::constant(double lambda, ContinuationSet c, std::string label) {
    if (lambda < 0.0) throw DomainError("intensity must be nonnegative");
    return {SmoothFn::constant_fn(lambda), std::move(c), std::move(label)};
}

std::string to_string(StopKind kind) {
    switch (kind) {
        case StopKind::CoxJump: return "CoxJump";
        case StopKind::ExitC: return "ExitC";
        case StopKind::ImmediateStop: return "ImmediateStop";
        case StopKind::Censored: return "Censored";
    }
    return "?";
}

double integrated_intensity_invert(std::span<const double> cumulative, std::span<const double> times, double target) {
    if (cumulative.size() != times.size() || cumulative.empty())
        throw DomainError("integrated_intensity_invert: grids must be nonempty and of equal length");
    if (target <= cumulative.front()) return times.front();
    for (std::size_t i = 1; i < cumulative.size(); ++i) {
        if (cumulative[i] < cumulative[i - 1]) throw DomainError("integrated intensity must be nondecreasing");
        if (cumulative[i] >= target) {
            const double w = (target - cumulative[i - 1]) / (cumulative[i] - cumulative[i - 1]);
            return times[i - 1] + w * (times[i] - times[i - 1]);
        }
    }
    throw TargetNotReachedError("integrated intensity never reaches the target");
}

StopOutcome sample_stop(const DiffusionModel& model, const MixedStrategy& strategy, double x, const PathConfig& config,
                        PathStream& rng) {
    if (!model.in_state(x)) throw DomainError("sample_stop: start outside the state interval");
    config.validate();
    const auto comp = strategy.continuation.component(x);
    if (!comp) return {x, 0.0, StopKind::ImmediateStop};

    const detail::PathEngine engine(model);
    const detail::Barriers b = engine.barriers(comp->lo, comp->hi);
    const auto& lam = strategy.intensity;
    const bool constant = lam.constant.has_value();
    const double lam_c = constant ? *lam.constant : 0.0;
    const bool killing = !constant || lam_c > 0.0;

    const double threshold = rng.exponential();
    double y = engine.to_y(x);
    double t = 0.0;
    const detail::StepClock clock(config.dt);

    if (constant) {
        // Lambda_t = lambda t, so the Cox jump happens at E1 / lambda exactly.
        const double t_star = killing ? threshold / lam_c : kInf;
        for (std::uint64_t k = 0;; ++k) {
            const double t_next = std::min(static_cast<double>(k + 1) * config.dt, config.horizon);
            if (!(t_next > t)) break;
            const auto [dt, sq] = clock.step(t_next - t);
            const auto step = engine.advance(y, dt, sq, b, rng);
            if (t + step.elapsed >= t_star) {
                const double theta = step.elapsed > 0.0 ? (t_star - t) / step.elapsed : 0.0;
                const double state = engine.to_x(engine.interpolate(y, step.y, theta, step.elapsed, rng));
                return {std::clamp(state, comp->lo, comp->hi), t_star, StopKind::CoxJump};
            }
            if (step.crossed != 0)
                return {step.crossed > 0 ? comp->hi : comp->lo, t + step.elapsed, StopKind::ExitC};
            y = step.y;
            t = t_next;
            if (t >= config.horizon) break;
        }
        return {engine.to_x(y), config.horizon, StopKind::Censored};
    }

    double cum = 0.0;
    double lam0 = lam(x);
    for (std::uint64_t k = 0;; ++k) {
        const double t_next = std::min(static_cast<double>(k + 1) * config.dt, config.horizon);
        if (!(t_next > t)) break;
        const auto [dt, sq] = clock.step(t_next - t);
        const auto step = engine.advance(y, dt, sq, b, rng);
        const double x_exit = step.crossed > 0 ? comp->hi : comp->lo;
        const double lam1 = lam(step.crossed != 0 ? x_exit : engine.to_x(step.y));
        const double inc = 0.5 * (lam0 + lam1) * step.elapsed;
        if (cum + inc >= threshold) {
            const double c2[2] = {cum, cum + inc};
            const double t2[2] = {0.0, step.elapsed};
            const double s = integrated_intensity_invert(c2, t2, threshold);
            const double theta = step.elapsed > 0.0 ? s / step.elapsed : 0.0;
            const double state = engine.to_x(engine.interpolate(y, step.y, theta, step.elapsed, rng));
            return {std::clamp(state, comp->lo, comp->hi), t + s, StopKind::CoxJump};
        }
        cum += inc;
        lam0 = lam1;
        if (step.crossed != 0) return {x_exit, t + step.elapsed, StopKind::ExitC};
        y = step.y;
        t = t_next;
        if (t >= config.horizon) break;
    }
    const double x_now = engine.to_x(y);
    return {x_now, config.horizon, StopKind::Censored};
}

}  // namespace tistop
