#pragma once

// Internal stepping machinery shared by the exit-time and stopping-time samplers.

#include <cmath>
#include <utility>

#include "tistop/diffusion.hpp"
#include "tistop/rng.hpp"

namespace tistop::detail {

/// Absorbing levels in model coordinates; +-inf when absent.
struct Barriers {
    double lo = -kInf;
    double hi = kInf;
};

struct StepResult {
    double y = 0.0;        // state in engine coordinates at the end of the step
    double elapsed = 0.0;  // time consumed (< dt when a barrier was hit)
    int crossed = 0;       // -1 lower, +1 upper, 0 none
};

/// Exact (GBM in log space, Wiener) or Euler stepping with barrier detection.
///
/// Besides endpoint crossings, each step checks the Brownian-bridge probability
/// of an excursion past a barrier between the two endpoints; for GBM and Wiener
/// this probability is exact, so hitting laws carry no discretization bias.
class PathEngine {
public:
    explicit PathEngine(const DiffusionModel& model);

    [[nodiscard]] double to_y(double x) const noexcept { return log_space_ ? std::log(x) : x; }
    [[nodiscard]] double to_x(double y) const noexcept { return log_space_ ? std::exp(y) : y; }
    /// Barrier in engine coordinates; a level at or beyond the state interval end maps to +-inf.
    [[nodiscard]] Barriers barriers(double lo_x, double hi_x) const noexcept;

    /// One step of length dt; `sqrt_dt` must equal std::sqrt(dt) (hoisted by callers).
    StepResult advance(double y, double dt, double sqrt_dt, const Barriers& b, PathStream& rng) const;

    /// State at fraction `theta` of a step of length `dt` from y0 to y1.
    double interpolate(double y0, double y1, double theta, double dt, PathStream& rng) const;

private:
    StepResult advance_exact(double y, double dt, double sqrt_dt, const Barriers& b, PathStream& rng) const;
    StepResult advance_euler(double y, double dt, const Barriers& b, PathStream& rng) const;
    int bridge_crossing(double y0, double y1, double s2dt, const Barriers& b, PathStream& rng) const;

    const DiffusionModel& model_;
    bool log_space_ = false;
    double drift_ = 0.0;  // exact schemes: drift of y
    double vol_ = 1.0;    // exact schemes: volatility of y
};

inline int PathEngine::bridge_crossing(double y0, double y1, double s2dt, const Barriers& b, PathStream& rng) const {
    // Skip the uniform draw when both barriers are far away (probability < e^-18).
    const double reach = 18.0 * s2dt;
    const double up = b.hi < kInf ? 2.0 * (b.hi - y0) * (b.hi - y1) : kInf;
    const double dn = b.lo > -kInf ? 2.0 * (y0 - b.lo) * (y1 - b.lo) : kInf;
    if (up > reach && dn > reach) return 0;
    const double p_up = up < kInf ? std::exp(-up / s2dt) : 0.0;
    const double p_dn = dn < kInf ? std::exp(-dn / s2dt) : 0.0;
    const double u = rng.uniform();
    if (u < p_up) return 1;
    if (u < p_up + p_dn) return -1;
    return 0;
}

inline StepResult PathEngine::advance_exact(double y, double dt, double sqrt_dt, const Barriers& b, PathStream& rng) const {
    const double y1 = y + drift_ * dt + vol_ * sqrt_dt * rng.normal();
    if (y1 >= b.hi) return {b.hi, dt * (b.hi - y) / (y1 - y), 1};
    if (y1 <= b.lo) return {b.lo, dt * (y - b.lo) / (y - y1), -1};
    const int side = bridge_crossing(y, y1, vol_ * vol_ * dt, b, rng);
    if (side > 0) return {b.hi, 0.5 * dt, 1};
    if (side < 0) return {b.lo, 0.5 * dt, -1};
    return {y1, dt, 0};
}

inline StepResult PathEngine::advance(double y, double dt, double sqrt_dt, const Barriers& b, PathStream& rng) const {
    if (model_.scheme() == Scheme::GeneralEuler) return advance_euler(y, dt, b, rng);
    return advance_exact(y, dt, sqrt_dt, b, rng);
}

/// sqrt(dt) for the regular step length, recomputed only for the final partial step.
class StepClock {
public:
    explicit StepClock(double dt) : dt_(dt), sqrt_dt_(std::sqrt(dt)) {}
    /// (length, sqrt(length)) of a step of nominal length `len`.
    [[nodiscard]] std::pair<double, double> step(double len) const {
        // Grid differences (k+1)dt - k dt carry rounding noise; treat them as dt.
        return std::abs(len - dt_) <= 1e-9 * dt_ ? std::pair{len, sqrt_dt_} : std::pair{len, std::sqrt(len)};
    }

private:
    double dt_;
    double sqrt_dt_;
};

}  // namespace tistop::detail
