#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace ranopt {

std::string DecayEstimate::to_json() const {
    nlohmann::json j{
        {"horizon", horizon},
        {"trials", trials},
        {"fitted_log_slope", fitted_log_slope},
        {"fitted_lambda", fitted_lambda},
        {"c_tilde", c_tilde},
        {"r_squared", r_squared},
        {"mean_diam", mean_diam},
        {"se", se},
    };
    return j.dump(2);
}

std::string DecayEstimate::series_csv() const {
    return series_to_csv(mean_diam, se, 1);
}

std::string series_to_csv(const std::vector<double>& values, const std::vector<double>& se,
                          std::int64_t t_first) {
    std::string out = "t,value,se\n";
    for (size_t k = 0; k < values.size(); ++k) {
        out += std::to_string(t_first + static_cast<std::int64_t>(k));
        out += ",";
        out += format_real(values[k]);
        out += ",";
        out += k < se.size() ? format_real(se[k]) : std::string();
        out += "\n";
    }
    return out;
}

DecayEstimate estimate_diam_decay(const ChainFactory& factory, std::uint64_t base_seed,
                                  std::int64_t t_max, int trials) {
    if (trials < 30) fail(ErrorCode::InvalidArgument, "need trials >= 30");
    if (t_max < 10) fail(ErrorCode::InvalidArgument, "need t_max >= 10");

    auto paths = parallel_trials(trials, [&](int trial) {
        auto gen = factory(mix_seed(base_seed, static_cast<std::uint64_t>(trial)));
        std::vector<double> diams;
        diams.reserve(static_cast<size_t>(t_max));
        StochasticMatrix phi = StochasticMatrix::identity(gen->n());
        for (std::int64_t t = 0; t < t_max; ++t) {
            phi = compose(gen->step().W, phi);
            diams.push_back(diam(phi));
        }
        return diams;
    });

    DecayEstimate est;
    est.horizon = t_max;
    est.trials = trials;
    est.mean_diam.resize(static_cast<size_t>(t_max));
    est.se.resize(static_cast<size_t>(t_max));
    std::vector<double> column(static_cast<size_t>(trials));
    for (std::int64_t t = 0; t < t_max; ++t) {
        for (int r = 0; r < trials; ++r)
            column[static_cast<size_t>(r)] = paths[static_cast<size_t>(r)][static_cast<size_t>(t)];
        MeanSe ms = mean_se(column);
        est.mean_diam[static_cast<size_t>(t)] = ms.mean;
        est.se[static_cast<size_t>(t)] = ms.se;
    }

    // Log-linear fit past the transient and above the noise floor.
    std::vector<double> xs, ys;
    bool any_contraction = false;
    for (std::int64_t t = 5; t <= t_max; ++t) {
        double v = est.mean_diam[static_cast<size_t>(t - 1)];
        if (v <= 1e-11) continue;
        if (v < 1.0 - kExactTol) any_contraction = true;
        xs.push_back(static_cast<double>(t));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 2 || !any_contraction)
        fail(ErrorCode::AllPathsDegenerate,
             "mean diameter identically 0 or 1; decay fit undefined");
    LineFit fit = fit_line(xs, ys);
    est.fitted_log_slope = fit.slope;
    est.fitted_lambda = std::exp(fit.slope);
    est.c_tilde = std::exp(fit.intercept);
    est.r_squared = fit.r_squared;
    return est;
}

MeanSe joint_diam_decay(const ChainFactory& factory, std::uint64_t base_seed, Window w1,
                        Window w2, int trials, std::int64_t t0) {
    auto [tau1, t1] = w1;
    auto [tau2, t2] = w2;
    if (!(t0 <= tau1 && tau1 <= t1 && tau1 <= tau2 && tau2 <= t2))
        fail(ErrorCode::WindowOrderViolation,
             "need t0 <= tau1 <= t1, tau1 <= tau2 <= t2");
    if (trials < 2) fail(ErrorCode::InvalidArgument, "need trials >= 2");

    std::int64_t t_end = std::max(t1, t2);
    auto products = parallel_trials(trials, [&](int trial) {
        auto gen = factory(mix_seed(base_seed, static_cast<std::uint64_t>(trial)));
        StochasticMatrix phi1 = StochasticMatrix::identity(gen->n());
        StochasticMatrix phi2 = StochasticMatrix::identity(gen->n());
        for (std::int64_t t = t0 + 1; t <= t_end; ++t) {
            StochasticMatrix w = gen->step().W;
            if (t > tau1 && t <= t1) phi1 = compose(w, phi1);
            if (t > tau2 && t <= t2) phi2 = compose(w, phi2);
        }
        return diam(phi2) * diam(phi1);
    });
    return mean_se(products);
}

CondColumnReport conditional_column_check(ChainGenerator& gen, std::int64_t steps,
                                          int resamples, std::uint64_t mc_seed) {
    if (steps < 1) fail(ErrorCode::InvalidArgument, "need steps >= 1");
    CondColumnReport report;
    report.steps = steps;
    Pcg32 scratch(mc_seed, 0x636f6cULL);
    for (std::int64_t s = 0; s < steps; ++s) {
        if (gen.analytic_cond_exp()) {
            ChainStep step = gen.step();
            if (!step.cond_exp)
                fail(ErrorCode::ConditionalLawUnavailable,
                     "chain claims analytic cond_exp but produced none");
            report.max_dev = std::max(report.max_dev,
                                      step.cond_exp->max_column_sum_deviation());
        } else {
            auto mc = mc_cond_exp_ahead(gen, 1, resamples, scratch);
            report.monte_carlo = true;
            report.max_dev = std::max(report.max_dev, mc.max_col_dev);
            report.max_se = std::max(report.max_se, mc.max_col_se);
            gen.step();
        }
    }
    return report;
}

RateStats consensus_rate_stats(const Trajectory& traj, double beta_rate) {
    size_t len = traj.diameters.size();
    if (len < 100) fail(ErrorCode::TooShort, "need at least 100 logged states");
    RateStats stats;
    stats.series.reserve(len);
    for (size_t k = 0; k < len; ++k) {
        double t = static_cast<double>(traj.t0 + static_cast<std::int64_t>(k));
        stats.series.push_back(traj.diameters[k] * std::pow(t, beta_rate));
    }
    size_t decile = len / 10;
    double first = 0.0, last = 0.0;
    for (size_t k = 0; k < decile; ++k) {
        first += stats.series[k];
        last += stats.series[len - decile + k];
    }
    stats.ratio = first > 0.0 ? last / first
                              : (last > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    stats.pass = stats.ratio < 1.0;
    return stats;
}

StoppingTimeStats stopping_time_gaps(std::span<const double> a, double lambda, double beta) {
    if (a.empty()) fail(ErrorCode::InvalidArgument, "empty series");
    if (!(lambda > 0.0 && lambda < 1.0))
        fail(ErrorCode::InvalidArgument, "lambda must lie in (0, 1)");
    if (!(beta > 0.0)) fail(ErrorCode::InvalidArgument, "beta must be positive");

    StoppingTimeStats stats;
    stats.lambda_threshold = lambda;
    stats.beta = beta;
    for (size_t idx = 0; idx < a.size(); ++idx)
        if (a[idx] <= lambda) stats.times.push_back(static_cast<std::int64_t>(idx) + 1);
    if (stats.times.empty())
        fail(ErrorCode::NoCrossings, "series never reaches the threshold");

    for (size_t s = 0; s + 1 < stats.times.size(); ++s) {
        double gap = static_cast<double>(stats.times[s + 1] - stats.times[s]);
        stats.gaps_scaled.push_back(gap * std::pow(static_cast<double>(stats.times[s]), -beta));
    }
    size_t half = stats.gaps_scaled.size() / 2;
    if (half == 0) {
        stats.pass = true; // too few gaps to show a trend
        return stats;
    }
    double first_max = 0.0, last_max = 0.0;
    for (size_t k = 0; k < stats.gaps_scaled.size(); ++k) {
        if (k < half)
            first_max = std::max(first_max, stats.gaps_scaled[k]);
        else
            last_max = std::max(last_max, stats.gaps_scaled[k]);
    }
    stats.pass = last_max < first_max;
    return stats;
}

SumBoundResult sum_bound_check(const std::function<double(std::int64_t)>& beta_fn,
                               double theta, std::int64_t t_max, std::int64_t t0,
                               double stabilization_tol) {
    if (!(theta >= 0.0 && theta < 1.0))
        fail(ErrorCode::ThetaOutOfRange, "theta must lie in [0, 1)");
    if (t_max <= t0) fail(ErrorCode::InvalidArgument, "need t_max > t0");

    std::vector<double> beta(static_cast<size_t>(t_max - t0 + 1));
    for (std::int64_t t = t0; t <= t_max; ++t) {
        double b = beta_fn(t);
        if (!(b > 0.0) || !std::isfinite(b))
            fail(ErrorCode::InvalidArgument, "beta(t) must be positive and finite");
        beta[static_cast<size_t>(t - t0)] = b;
    }

    SumBoundResult res;
    std::int64_t three_quarters = t0 + (3 * (t_max - t0)) / 4;
    double max_at_three_quarters = 0.0;
    for (std::int64_t t = t0; t <= t_max; ++t) {
        // Walk tau from t down to t0, extending the sum one term at a time.
        double sum = 0.0, power = 1.0;
        double bt = beta[static_cast<size_t>(t - t0)];
        for (std::int64_t tau = t - 1; tau >= t0; --tau) {
            power *= theta;
            sum += beta[static_cast<size_t>(tau - t0)] * power;
            double ratio = sum / bt;
            if (ratio > res.M_hat) {
                res.M_hat = ratio;
                res.argmax_t = t;
            }
        }
        if (t == three_quarters) max_at_three_quarters = res.M_hat;
    }
    res.ok = (res.M_hat - max_at_three_quarters) <=
             stabilization_tol * std::max(1.0, res.M_hat);
    return res;
}

double path_inequality_audit(const Trajectory& traj, std::span<const Window> pairs) {
    if (!traj.matrices || !traj.inputs)
        fail(ErrorCode::MissingLogs, "audit needs logged matrices and inputs");
    const auto& ws = *traj.matrices;
    const auto& us = *traj.inputs;

    double worst = -std::numeric_limits<double>::infinity();
    for (auto [tau, t] : pairs) {
        if (tau > t) fail(ErrorCode::IndexOutOfRange, "need tau <= t");
        double lhs = traj.diameter_at(t);
        int n = traj.states[0].agents();
        StochasticMatrix phi = StochasticMatrix::identity(n); // Phi(t, t)
        double input_terms = 0.0;
        for (std::int64_t s = t - 1; s >= tau; --s) {
            input_terms +=
                diam(phi) * state_diameter(us[static_cast<size_t>(s - traj.t0)]);
            phi = compose(phi, ws[static_cast<size_t>(s - traj.t0)]); // Phi(t, s)
        }
        double rhs = diam(phi) * traj.diameter_at(tau) + input_terms;
        worst = std::max(worst, lhs - rhs);
    }
    return worst;
}

SecondMomentResult second_moment_ratio(std::span<const OptRun> runs) {
    if (runs.size() < 30) fail(ErrorCode::TooFewRuns, "need at least 30 runs");
    size_t len = runs[0].traj.diameters.size();
    for (const auto& run : runs)
        if (run.traj.diameters.size() != len || run.t0() != runs[0].t0())
            fail(ErrorCode::DimensionMismatch, "runs must share config and horizon");

    SecondMomentResult res;
    res.series.resize(len, 0.0);
    size_t half = len / 2;
    std::vector<double> xs;
    xs.reserve(len - half);
    for (size_t k = half; k < len; ++k) xs.push_back(static_cast<double>(k));

    // The mean-series slope equals the mean of per-run slopes, and the runs
    // are independent, so the between-run dispersion gives the slope's
    // standard error. (The plain OLS residual formula is invalid here: each
    // run is one strongly autocorrelated path, not i.i.d. noise per t.)
    std::vector<double> slopes;
    slopes.reserve(runs.size());
    std::vector<double> ys(len - half);
    for (const auto& run : runs) {
        for (size_t k = 0; k < len; ++k) {
            double d = run.traj.diameters[k];
            double a = run.alpha[k];
            double ratio = (d * d) / (a * a);
            res.series[k] += ratio;
            if (k >= half) ys[k - half] = ratio;
        }
        slopes.push_back(fit_line(xs, ys).slope);
    }
    for (double& v : res.series) v /= static_cast<double>(runs.size());

    MeanSe slope_stats = mean_se(slopes);
    res.last_half_slope = slope_stats.mean;
    res.slope_se = slope_stats.se;
    res.pass = res.last_half_slope <= res.slope_se;
    return res;
}

MixingFloorResult mixing_floor_check(const ChainFactory& factory, std::uint64_t base_seed,
                                     int B, double gamma, double nu, int trials,
                                     std::int64_t window_index) {
    if (!(nu > 0.0 && nu < gamma))
        fail(ErrorCode::InvalidArgument, "need 0 < nu < gamma");
    if (trials < 2) fail(ErrorCode::InvalidArgument, "need trials >= 2");

    auto lambdas = parallel_trials(trials, [&](int trial) {
        auto gen = factory(mix_seed(base_seed, static_cast<std::uint64_t>(trial)));
        std::int64_t n_sq = static_cast<std::int64_t>(gen->n()) * gen->n();
        for (std::int64_t s = 0; s < window_index * B; ++s) gen->step();
        StochasticMatrix phi = StochasticMatrix::identity(gen->n());
        for (std::int64_t s = 0; s < n_sq * B; ++s) phi = compose(gen->step().W, phi);
        return mixing(phi);
    });

    MixingFloorResult res;
    res.trials = trials;
    MeanSe ms = mean_se(lambdas);
    res.mc_mean = ms.mean;
    res.se = ms.se;
    auto probe = factory(base_seed);
    double n_sq = static_cast<double>(probe->n()) * probe->n();
    double p = 1.0 - (1.0 - gamma) / (1.0 - nu);
    // theta is astronomically small for realistic parameters; computing it in
    // log space lets it underflow to zero instead of blowing up.
    res.theta_floor = std::exp(n_sq * B * std::log(nu) + n_sq * std::log(p));
    res.pass = res.mc_mean >= res.theta_floor - 3.0 * res.se &&
               res.mc_mean - 3.0 * res.se > 0.0;
    return res;
}

SummabilityTail summability_tail(const OptRun& run) {
    SummabilityTail tail;
    std::int64_t T = run.horizon();
    for (std::int64_t k = T / 2; k <= T; ++k) {
        const StateBlock& x = run.traj.states[static_cast<size_t>(k)];
        const std::vector<double>& xbar = run.xbar[static_cast<size_t>(k)];
        double worst = 0.0;
        for (int i = 0; i < x.agents(); ++i)
            worst = std::max(worst, linf_dist(x.agent_row(i), xbar));
        tail.weighted_dev_tail += run.alpha[static_cast<size_t>(k)] * worst;
        tail.dev_sq_tail += worst * worst;
    }
    return tail;
}

} // namespace ranopt
