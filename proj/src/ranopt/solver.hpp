#ifndef RANOPT_SOLVER_HPP
#define RANOPT_SOLVER_HPP

#include <limits>
#include <memory>

#include "dynamics.hpp"
#include "objective.hpp"

namespace ranopt {

/// One solver run of x(t+1) = W(t+1) x(t) - alpha(t) g(t), with the mean
/// state xbar(t) = (1/n) e^T x(t) and objective series recorded per step.
/// Keeps a clone of the chain at its initial state so audits can replay and
/// resample the conditional law along the same path.
struct OptRun {
    Trajectory traj;
    std::vector<std::vector<double>> xbar;
    std::vector<double> f_bar;  // F(xbar(t))
    std::vector<double> f_gap;  // F(xbar(t)) - F_star; NaN when F_star unknown
    std::vector<double> alpha;  // alpha(t0) .. alpha(t0+T)
    double F_star = std::numeric_limits<double>::quiet_NaN();
    std::vector<Objective> objectives;
    StepSchedule schedule;
    std::unique_ptr<ChainGenerator> chain_at_start;
    /// Per-step residual of xbar(t+1) = Wbar(t+1) x(t) - alpha(t) gbar(t),
    /// recomputed from logs; present when matrices were logged.
    std::optional<std::vector<double>> mean_dynamics_residual;

    std::int64_t t0() const { return traj.t0; }
    std::int64_t horizon() const { return traj.horizon(); }
};

/// Sum of per-agent subgradient rows: g(t) with rows g_i = subgrad_i(x_i).
StateBlock subgradient_block(std::span<const Objective> objectives, const StateBlock& x);

/// F(z) = sum_i f_i(z) and the aggregate bound L = sum_i L_i.
double total_objective(std::span<const Objective> objectives, std::span<const double> z);
double total_bound(std::span<const Objective> objectives);

OptRun solve_distributed(ChainGenerator& gen, std::vector<Objective> objectives,
                         const StepSchedule& sched, const StateBlock& x0, std::int64_t T,
                         LogOptions log = {},
                         double F_star = std::numeric_limits<double>::quiet_NaN());

struct Box {
    std::vector<double> lo, hi;
};

struct OracleResult {
    double F_star = 0.0;
    std::vector<std::vector<double>> minimizers; // sample of the optimal set
    double error_bound = 0.0;
    bool exact = false;
};

/// Optimal-set oracle for verification. Sums of absolute deviations resolve
/// analytically to the coordinate-wise median interval; other objectives are
/// minimized on a grid over `box` (m <= 2), refined per coordinate by
/// bisection on subgradient sign changes when every term is separable.
/// Errors: OptimizerOnBoundary when the box clips the optimum.
OracleResult optimal_oracle(std::span<const Objective> objectives, const Box& box,
                            int grid_points);
/// Analytic-only variant for all-abs objective lists (no box needed).
OracleResult optimal_oracle(std::span<const Objective> objectives);

struct LyapunovMcCheck {
    std::int64_t t = 0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double rhs = 0.0;
    bool ok = true;
};

struct LyapunovReport {
    /// Largest RHS - LHS of the deterministic subgradient inequality
    /// n <gbar, xbar - v> >= F(xbar) - F(v) - 2 sum L_i |x_i - xbar|;
    /// positive values are violations.
    double max_subgrad_inequality_violation = -std::numeric_limits<double>::infinity();
    std::int64_t steps_checked = 0;
    std::vector<LyapunovMcCheck> mc_checks;

    bool subgrad_inequality_ok(double tol = 1e-9) const { return max_subgrad_inequality_violation <= tol; }
    bool mc_ok() const;
};

/// Per-step audit of the drift inequality behind the convergence proof.
/// Part (i) is deterministic and checked at every logged state. Part (ii)
/// resamples W(t+1) from the conditional law `resamples` times (skipped when
/// resamples == 0) and compares the estimated E[|xbar(t+1) - v|^2 | F(t)]
/// against the drift bound within 3 standard errors; `mc_stride` thins the
/// audited steps. Norms are linf throughout (exact for m = 1).
LyapunovReport lyapunov_audit(const OptRun& run, std::span<const double> v, int resamples,
                              std::uint64_t mc_seed = 1, std::int64_t mc_stride = 1);

} // namespace ranopt

#endif
