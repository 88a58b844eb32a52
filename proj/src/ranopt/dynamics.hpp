#ifndef RANOPT_DYNAMICS_HPP
#define RANOPT_DYNAMICS_HPP

#include <functional>
#include <optional>
#include <span>

#include "chains.hpp"
#include "matrix.hpp"

namespace ranopt {

struct LogOptions {
    bool matrices = false; // memory: T matrices of n^2
    bool inputs = false;
    static LogOptions full() { return {true, true}; }
};

/// Time-indexed log of one sample path. states[k] holds x(t0 + k); diameter
/// logging is always on, matrices and inputs are opt-in.
struct Trajectory {
    std::int64_t t0 = 1;
    std::vector<StateBlock> states;
    std::vector<double> diameters;
    std::optional<std::vector<StochasticMatrix>> matrices; // W(t0+1) .. W(t0+T)
    std::optional<std::vector<StateBlock>> inputs;         // u(t0) .. u(t0+T-1)

    std::int64_t horizon() const { return static_cast<std::int64_t>(states.size()) - 1; }
    const StateBlock& state_at(std::int64_t t) const { return states[check_index(t)]; }
    double diameter_at(std::int64_t t) const { return diameters[check_index(t)]; }

private:
    size_t check_index(std::int64_t t) const;
};

/// Maps (t, x(t)) to the input u(t); output dimensions must match (n, m).
using InputPolicy = std::function<StateBlock(std::int64_t, const StateBlock&)>;

/// Autonomous averaging x(t+1) = W(t+1) x(t) along the sampled chain.
Trajectory run_autonomous(ChainGenerator& gen, const StateBlock& x0, std::int64_t T,
                          LogOptions log = {});

/// Controlled averaging x(t+1) = W(t+1) x(t) + u(t).
Trajectory run_controlled(ChainGenerator& gen, const StateBlock& x0,
                          const InputPolicy& policy, std::int64_t T, LogOptions log = {});

/// Ordered transition product Phi(t, tau) = W(t) ... W(tau+1), with
/// Phi(tau, tau) = I. `ws[k]` holds W(t0 + 1 + k).
StochasticMatrix transition_matrix(std::span<const StochasticMatrix> ws, std::int64_t t0,
                                   std::int64_t tau, std::int64_t t);

/// Max-entry deviation between the logged x(t) and the variation-of-constants
/// reconstruction Phi(t,tau) x(tau) + sum_s Phi(t,s+1) u(s) from the logs.
double variation_of_constants_check(const Trajectory& traj, std::int64_t tau, std::int64_t t);

} // namespace ranopt

#endif
