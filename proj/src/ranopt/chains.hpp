#ifndef RANOPT_CHAINS_HPP
#define RANOPT_CHAINS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "graph.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace ranopt {

/// One realized step of a weight-matrix chain. `cond_exp` is the analytic
/// E[W(t) | F(t-1)] evaluated at the state the generator was in before the
/// step, present only for chains with a closed form; it is doubly stochastic
/// for every chain satisfying the stochastic assumptions.
struct ChainStep {
    std::int64_t t;
    StochasticMatrix W;
    std::optional<StochasticMatrix> cond_exp;
};

/// Stateful sampler for an adapted chain {W(t)}. The generator's internal
/// state (token position, time index, RNG stream) is the implemented
/// filtration: conditional expectations are functions of that state only.
///
/// Replay is deterministic: the same seed and call sequence reproduce the
/// ChainStep sequence bit for bit. Generators are single-threaded; Monte
/// Carlo runs construct one generator per worker with distinct seeds.
class ChainGenerator {
public:
    virtual ~ChainGenerator() = default;

    virtual int n() const = 0;
    /// Time of the last emitted step; starts at t0, so the first step() call
    /// yields W(t0 + 1).
    std::int64_t time() const { return t_; }

    /// Advances the chain one step using the internal RNG stream.
    ChainStep step() { return advance(rng_); }
    /// Advances using caller-supplied randomness (used by resampling clones).
    ChainStep step_with(Pcg32& rng) { return advance(rng); }

    /// Deep copy, including the current state and RNG position.
    virtual std::unique_ptr<ChainGenerator> clone() const = 0;

    virtual bool analytic_cond_exp() const = 0;
    /// Whether W(t+1) can be re-drawn from the current state without
    /// advancing (all built-in chains support this via clone + step_with).
    virtual bool supports_conditional_resampling() const { return true; }

    /// E[W(time() + k) | current state] for k >= 1, when a closed form
    /// exists. k = 1 is the per-step conditional expectation; larger k gives
    /// the window-start conditioning used by the B-connectivity assumption.
    virtual std::optional<StochasticMatrix> cond_exp_ahead(int k) const = 0;

protected:
    ChainGenerator(std::int64_t t0, std::uint64_t seed, std::uint64_t stream)
        : t_(t0), rng_(seed, stream) {}

    /// Produces the step at time() + 1 and updates the chain state.
    virtual ChainStep do_step(Pcg32& rng) = 0;

private:
    ChainStep advance(Pcg32& rng) {
        ChainStep s = do_step(rng);
        t_ = s.t;
        return s;
    }

    std::int64_t t_;
    Pcg32 rng_;
};

using ChainFactory = std::function<std::unique_ptr<ChainGenerator>(std::uint64_t seed)>;

/// Token-passing chain: the holder picks a uniform neighbor, flips a fair
/// coin to either pass the token (sharing its value) or keep it (pulling the
/// neighbor's value). Exactly one row of W(t) differs from the identity.
std::unique_ptr<ChainGenerator> token_chain(const UndirectedGraph& graph,
                                            std::uint64_t seed,
                                            int initial_holder = 0,
                                            std::int64_t t0 = 1);

/// i.i.d. pairwise gossip: a uniformly random edge fires and both endpoints
/// move to their midpoint. Realized W(t) is symmetric doubly stochastic.
std::unique_ptr<ChainGenerator> pairwise_gossip_chain(const UndirectedGraph& graph,
                                                      std::uint64_t seed,
                                                      std::int64_t t0 = 1);

using FailureSchedule = std::function<double(std::int64_t)>;

/// Doubly stochastic base schedule (cycled) degraded by independent Bernoulli
/// link failures with P(fail at t) = p(t); lost off-diagonal mass folds back
/// onto the diagonal, keeping rows stochastic.
std::unique_ptr<ChainGenerator> link_failure_chain(std::vector<StochasticMatrix> base,
                                                   FailureSchedule p,
                                                   std::uint64_t seed,
                                                   std::int64_t t0 = 1);
std::unique_ptr<ChainGenerator> link_failure_chain(std::vector<StochasticMatrix> base,
                                                   double p,
                                                   std::uint64_t seed,
                                                   std::int64_t t0 = 1);

/// W(t) = A for all t. cond_exp is exposed only when A is doubly stochastic.
std::unique_ptr<ChainGenerator> static_chain(StochasticMatrix a, std::int64_t t0 = 1);

/// Negative-control fixture: like static_chain but reports cond_exp = A even
/// when A is not doubly stochastic, so conditional-stochasticity audits have
/// something to flag.
std::unique_ptr<ChainGenerator> negative_control_chain(StochasticMatrix a,
                                                       std::int64_t t0 = 1);

/// Metropolis weights on an undirected graph: w_uv = 1/(1 + max(deg u, deg v))
/// on edges, remainder on the diagonal. Always doubly stochastic.
StochasticMatrix metropolis_matrix(const UndirectedGraph& graph);

/// Monte Carlo estimate of E[W(time()+k) | state] by running `resamples`
/// clones forward k steps with fresh randomness.
struct McMatrixEstimate {
    StochasticMatrix mean;
    double max_col_dev = 0.0; // of the mean matrix
    double max_col_se = 0.0;  // largest standard error among column sums
};
McMatrixEstimate mc_cond_exp_ahead(const ChainGenerator& gen, int k, int resamples,
                                   Pcg32& scratch);

struct AssumptionReport {
    bool row_stochastic_ok = true;
    bool self_loops_ok = true;
    double cond_column_sums_max_dev = 0.0;
    bool cond_is_monte_carlo = false;
    double cond_mc_max_se = 0.0;
    bool b_connectivity_ok = true;
    /// True when every window-start conditional expectation came from a
    /// closed form rather than a Monte Carlo estimate.
    bool window_form_exact = true;
    /// True when the union used realized per-step conditional expectations
    /// (the sufficient condition from the remark) instead of window-start
    /// conditioning.
    bool per_step_variant = false;
    int B_used = 0;
    double gamma_used = 0.0;
    int trials = 0;
    std::int64_t horizon = 0;
    int windows_checked = 0;

    bool pass(double cond_tol = 1e-9) const;
    std::string to_json() const;
};

/// Samples `trials` independent paths from the factory and checks the
/// stochastic assumptions: row sums and self-loops of every realized W,
/// column sums of the conditional expectations, and per window the spanning
/// rooted tree of the union of threshold graphs of E[W(tau) | F(window start)].
/// Chains without closed forms are handled by conditional resampling
/// (`mc_resamples` clones per estimate); the report flags those estimates.
AssumptionReport verify_assumptions(const ChainFactory& factory, std::uint64_t base_seed,
                                    int B, double gamma, std::int64_t horizon, int trials,
                                    int mc_resamples = 200, bool per_step_variant = false);

} // namespace ranopt

#endif
