#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tistop/diffusion.hpp"
#include "tistop/rng.hpp"
#include "tistop/smooth_fn.hpp"

namespace tistop {

/// Finite union of disjoint open intervals, kept sorted.
class ContinuationSet {
public:
    ContinuationSet() = default;
    /// Throws DomainError if intervals are empty, overlap, or are not sorted after normalisation.
    explicit ContinuationSet(std::vector<Interval> intervals);

    static ContinuationSet empty() { return {}; }
    static ContinuationSet whole(const Interval& state) { return ContinuationSet({state}); }

    [[nodiscard]] const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    [[nodiscard]] bool is_empty() const noexcept { return intervals_.empty(); }
    [[nodiscard]] bool contains(double x) const noexcept;
    /// The interval of C that contains x, if any.
    [[nodiscard]] std::optional<Interval> component(double x) const noexcept;
    /// Finite endpoints lying strictly inside `state`, sorted and deduplicated.
    [[nodiscard]] std::vector<double> boundary(const Interval& state) const;
    /// Throws DomainError unless every interval lies in `state`.
    void check_inside(const Interval& state) const;
    [[nodiscard]] std::string describe() const;

private:
    std::vector<Interval> intervals_;
};

enum class PointClass { InC, IntComplement, Boundary };

inline constexpr double kBoundaryTolerance = 1e-12;

/// Where x sits relative to C; boundary matching uses absolute tolerance 1e-12.
PointClass classify_point(const ContinuationSet& c, double x);

/// Cox intensity lambda(.) >= 0 together with the continuation set C.
struct MixedStrategy {
    SmoothFn intensity;
    ContinuationSet continuation;
    std::string label;

    [[nodiscard]] double lambda(double x) const { return intensity.constant ? *intensity.constant : intensity(x); }

    static MixedStrategy pure(ContinuationSet c, std::string label = {});
    static MixedStrategy constant(double lambda, ContinuationSet c, std::string label = {});
};

enum class StopKind { CoxJump, ExitC, ImmediateStop, Censored };

std::string to_string(StopKind kind);

struct StopOutcome {
    double state = 0.0;
    double time = 0.0;
    StopKind kind = StopKind::ImmediateStop;
};

/// Draw one realisation of tau^{lambda,C} started at x.
///
/// A unit exponential threshold is drawn up front; the integrated intensity is
/// accumulated with the trapezoidal rule and the jump located inside its step by
/// linear interpolation. Exits of C are snapped to the boundary. Paths alive at
/// the horizon are reported as Censored.
StopOutcome sample_stop(const DiffusionModel& model, const MixedStrategy& strategy, double x, const PathConfig& config,
                        PathStream& rng);

/// First time the piecewise-linear cumulative curve (times, cumulative) reaches `target`.
double integrated_intensity_invert(std::span<const double> cumulative, std::span<const double> times, double target);

}  // namespace tistop
