#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "tistop/rng.hpp"
#include "tistop/smooth_fn.hpp"

namespace tistop {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open interval (lo, hi); either end may be infinite.
struct Interval {
    double lo = -kInf;
    double hi = kInf;

    [[nodiscard]] bool contains(double x) const noexcept { return x > lo && x < hi; }
    [[nodiscard]] double length() const noexcept { return hi - lo; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Scheme { GBM, Wiener, GeneralEuler };

/// One-dimensional Ito diffusion dX = mu(X) dt + sigma(X) dW on an open interval.
///
/// GBM and Wiener models are always simulated with exact transitions; general
/// models use Euler steps with step-halving rejection near the interval ends.
class DiffusionModel {
public:
    static DiffusionModel gbm(double mu, double sigma2);
    static DiffusionModel wiener();
    /// `limit_state`, if given, is the almost-sure limit of X_t as t -> infinity;
    /// it is used for paths that never stop.
    static DiffusionModel general(RealFn drift, RealFn vol, Interval state,
                                  std::optional<double> limit_state = std::nullopt);

    [[nodiscard]] double drift(double x) const { return drift_(x); }
    [[nodiscard]] double vol(double x) const { return vol_(x); }
    /// sigma^2(x)
    [[nodiscard]] double variance(double x) const {
        const double s = vol_(x);
        return s * s;
    }
    [[nodiscard]] const Interval& state_interval() const noexcept { return state_; }
    [[nodiscard]] bool in_state(double x) const noexcept { return state_.contains(x); }
    [[nodiscard]] Scheme scheme() const noexcept { return scheme_; }
    [[nodiscard]] double gbm_mu() const noexcept { return mu_; }
    [[nodiscard]] double gbm_sigma2() const noexcept { return sigma2_; }
    [[nodiscard]] std::optional<double> limit_state() const noexcept { return limit_state_; }
    [[nodiscard]] std::string describe() const;

private:
    DiffusionModel() = default;

    RealFn drift_;
    RealFn vol_;
    Interval state_;
    Scheme scheme_ = Scheme::GeneralEuler;
    double mu_ = 0.0;
    double sigma2_ = 0.0;
    std::optional<double> limit_state_;
};

struct PathConfig {
    double dt = 1e-3;
    double horizon = 200.0;
    std::uint64_t seed = 20190611;
    bool antithetic = false;
    /// 0 means one worker per hardware thread.
    unsigned threads = 0;

    void validate() const;
};

/// A_X k(x) = mu(x) k'(x) + 1/2 sigma^2(x) k''(x).
double generator_apply(const DiffusionModel& model, const SmoothFn& k, double x);

/// Advance the state by `dt` using standard normal draw `noise`.
///
/// For GeneralEuler, a proposal that leaves the state interval is retried as
/// two half steps with fresh draws from `rng` (up to 30 halvings); without an
/// rng the escape is reported immediately.
double simulate_step(const DiffusionModel& model, double x, double dt, double noise, PathStream* rng = nullptr);

struct ExitSample {
    double state;
    double time;
};

/// First exit of [x-h, x+h]; the exit state is exactly x-h or x+h.
ExitSample sample_symmetric_exit(const DiffusionModel& model, double x, double h, const PathConfig& config,
                                 PathStream& rng);

struct ExitStatistics {
    double h = 0.0;
    double mean_time = 0.0;
    double mean_time_se = 0.0;
    double mean_time_sq = 0.0;
    double mean_time_sq_se = 0.0;
    double prob_up = 0.0;
    double prob_up_se = 0.0;
    std::size_t n_paths = 0;
};

/// Monte Carlo moments of tau_h over `n_paths` independent paths.
ExitStatistics exit_time_statistics(const DiffusionModel& model, double x, double h, const PathConfig& config,
                                    std::size_t n_paths);

/// P_x(tau_b < infinity) = b^(xi-1) x^(1-xi) for a GBM with xi = 2 mu / sigma^2 in (0, 1), x <= b.
double gbm_hitting_prob(double xi, double x, double b);

/// P_x(exit of (c, d) at d) for a GBM with exponent xi != 1.
double gbm_two_sided_exit(double xi, double x, double c, double d);

}  // namespace tistop
