#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "tistop/diffusion.hpp"
#include "tistop/payoff.hpp"
#include "tistop/strategy.hpp"

namespace tistop {

/// Reference value computed independently of the path simulators.
struct OracleResult {
    double value = 0.0;
    double std_error = 0.0;  // 0 for deterministic methods
    std::string method;
    std::size_t size = 0;  // samples drawn or chain states
    std::string warning;
};

/// E_x X^p at an Exp(lambda) time independent of a GBM, by direct sampling of
/// (tau, X_tau): two draws per sample from std::mt19937_64, no time stepping.
/// A divergent moment (lambda <= p mu + p(p-1) sigma^2/2) sets `warning`.
OracleResult killed_gbm_moment(double mu, double sigma2, double lambda, double p, double x, std::size_t n_samples,
                               std::uint64_t seed = 7);

/// Discrete-time random-walk approximation of a stopping rule.
///
/// On the component of C containing x the chain moves between grid nodes spaced
/// by about dx (x itself is a node); the step to the right has probability
/// (h_- + mu dt)/(h_+ + h_-) with dt = h_+ h_- / sigma^2(x). At each interior node
/// the walk stops with probability `stop_probability(x, dt)`.
struct ChainSpec {
    ContinuationSet continuation;
    std::function<double(double x, double dt)> stop_probability;
    double dx = 1e-3;
};

/// Chain for a mixed strategy: stop probability 1 - exp(-lambda(x) dt).
ChainSpec chain_from_strategy(const MixedStrategy& strategy, double dx);

struct ChainValues {
    OracleResult phi;
    OracleResult psi;
    double j = 0.0;
};

/// Exact expectations of f and h at absorption for the chain, by a tridiagonal
/// solve. An end of C at the edge of the state interval is absorbing with the
/// model's limit state. At most 10^4 states; throws SolveError if the system is singular
/// or a transition probability leaves [0, 1].
ChainValues discrete_chain_value(const Problem& problem, const DiffusionModel& model, const ChainSpec& chain, double x);

}  // namespace tistop
