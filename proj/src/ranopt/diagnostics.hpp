#ifndef RANOPT_DIAGNOSTICS_HPP
#define RANOPT_DIAGNOSTICS_HPP

#include <string>
#include <utility>

#include "solver.hpp"
#include "util.hpp"

namespace ranopt {

/// Geometric-decay fit of E[diam(Phi(t, t0))]. mean_diam[k] estimates the
/// value at t = t0 + k + 1; the log-linear fit runs over steps past the
/// transient (t - t0 >= 5) whose mean sits above the floating-point noise
/// floor (1e-11).
struct DecayEstimate {
    std::int64_t horizon = 0;
    int trials = 0;
    std::vector<double> mean_diam;
    std::vector<double> se;
    double fitted_log_slope = 0.0;
    double fitted_lambda = 1.0;
    double c_tilde = 1.0; // exp(intercept), the fitted envelope constant
    double r_squared = 0.0;

    std::string to_json() const;
    std::string series_csv() const; // t, value, se
};

/// Errors: AllPathsDegenerate when the mean series is identically 0 or shows
/// no contraction at all (fit undefined).
DecayEstimate estimate_diam_decay(const ChainFactory& factory, std::uint64_t base_seed,
                                  std::int64_t t_max, int trials);

using Window = std::pair<std::int64_t, std::int64_t>; // (tau, t]

/// Monte Carlo estimate of E[diam(Phi(t2,tau2)) diam(Phi(t1,tau1))] over
/// possibly overlapping windows, for checking the two-window decay bound.
MeanSe joint_diam_decay(const ChainFactory& factory, std::uint64_t base_seed, Window w1,
                        Window w2, int trials, std::int64_t t0 = 1);

struct CondColumnReport {
    double max_dev = 0.0;
    bool monte_carlo = false;
    double max_se = 0.0;
    std::int64_t steps = 0;
};

/// Max column-sum deviation of E[W(t)|F(t-1)] over `steps` steps of one path
/// (exact when the chain has a closed form, resampled otherwise).
CondColumnReport conditional_column_check(ChainGenerator& gen, std::int64_t steps,
                                          int resamples, std::uint64_t mc_seed = 1);

struct RateStats {
    std::vector<double> series; // d(x(t)) t^beta
    double ratio = 0.0;         // last-decile mean over first-decile mean
    bool pass = false;          // ratio < 1
};

/// Errors: TooShort when the trajectory has fewer than 100 states.
RateStats consensus_rate_stats(const Trajectory& traj, double beta_rate);

struct StoppingTimeStats {
    double lambda_threshold = 0.0;
    double beta = 0.0;
    std::vector<std::int64_t> times;
    std::vector<double> gaps_scaled; // (t_{s+1} - t_s) t_s^{-beta}, s >= 1
    bool pass = false; // last-half running max below first-half max
};

/// Stopping times t_s = inf{t > t_{s-1} : a(t) <= lambda} with a(t) = a[t-1].
/// Errors: NoCrossings when the series never dips below lambda.
StoppingTimeStats stopping_time_gaps(std::span<const double> a, double lambda, double beta);

struct SumBoundResult {
    double M_hat = 0.0;
    bool ok = false;
    std::int64_t argmax_t = 0;
};

/// Deterministic finite-range check of sum_{s=tau}^{t-1} beta(s) theta^{t-s}
/// <= M beta(t): scans every (tau, t) pair up to t_max and reports the
/// largest ratio. ok means the running maximum grew by at most
/// stabilization_tol (relative) over the last quarter of the range.
SumBoundResult sum_bound_check(const std::function<double(std::int64_t)>& beta_fn,
                               double theta, std::int64_t t_max, std::int64_t t0 = 1,
                               double stabilization_tol = 1e-3);

/// Max over pairs of d(x(t)) - [diam(Phi(t,tau)) d(x(tau))
/// + sum_s diam(Phi(t,s+1)) d(u(s))], reconstructed from logs; positive
/// values are violations.
double path_inequality_audit(const Trajectory& traj, std::span<const Window> pairs);

struct SecondMomentResult {
    std::vector<double> series; // cross-run mean of d^2(x(t)) / alpha^2(t)
    double last_half_slope = 0.0;
    /// Standard error of the slope from the between-run dispersion of
    /// per-run slopes (the runs are the independent replicates here).
    double slope_se = 0.0;
    bool pass = false; // slope <= 0 within its standard error
};

/// Errors: TooFewRuns below 30 runs.
SecondMomentResult second_moment_ratio(std::span<const OptRun> runs);

struct MixingFloorResult {
    double mc_mean = 0.0;
    double se = 0.0;
    double theta_floor = 0.0; // nu^{n^2 B} p^{n^2}; underflows to 0 gracefully
    int trials = 0;
    bool pass = false; // mean >= floor - 3 se, with a strictly positive margin
};

/// Monte Carlo check of the mixing floor E[Lambda(Phi((n^2+s)B, sB))] >= theta
/// with theta = nu^{n^2 B} p^{n^2}, p = 1 - (1-gamma)/(1-nu), 0 < nu < gamma.
MixingFloorResult mixing_floor_check(const ChainFactory& factory, std::uint64_t base_seed,
                                     int B, double gamma, double nu, int trials,
                                     std::int64_t window_index = 0);

/// Tail increments over [t0 + T/2, t0 + T] of the two summability series from
/// the convergence proof: sum alpha(t) max_i |x_i - xbar| and
/// sum max_i |x_i - xbar|^2.
struct SummabilityTail {
    double weighted_dev_tail = 0.0;
    double dev_sq_tail = 0.0;
};
SummabilityTail summability_tail(const OptRun& run);

std::string series_to_csv(const std::vector<double>& values, const std::vector<double>& se,
                          std::int64_t t_first);

} // namespace ranopt

#endif
