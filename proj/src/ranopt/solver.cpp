#include "solver.hpp"

#include <algorithm>
#include <cmath>

namespace ranopt {

StateBlock subgradient_block(std::span<const Objective> objectives, const StateBlock& x) {
    StateBlock g = StateBlock::zeros(x.agents(), x.dim());
    for (int i = 0; i < x.agents(); ++i) {
        std::vector<double> gi = objectives[static_cast<size_t>(i)].subgrad(x.agent_row(i));
        for (int k = 0; k < x.dim(); ++k) g.at(i, k) = gi[static_cast<size_t>(k)];
    }
    return g;
}

double total_objective(std::span<const Objective> objectives, std::span<const double> z) {
    double sum = 0.0;
    for (const auto& f : objectives) sum += f.eval(z);
    return sum;
}

double total_bound(std::span<const Objective> objectives) {
    double sum = 0.0;
    for (const auto& f : objectives) sum += f.bound;
    return sum;
}

OptRun solve_distributed(ChainGenerator& gen, std::vector<Objective> objectives,
                         const StepSchedule& sched, const StateBlock& x0, std::int64_t T,
                         LogOptions log, double F_star) {
    if (static_cast<int>(objectives.size()) != gen.n() || gen.n() != x0.agents())
        fail(ErrorCode::DimensionMismatch, "need one objective per agent");
    for (const auto& f : objectives)
        if (f.dim != x0.dim())
            fail(ErrorCode::DimensionMismatch, "objective dimension differs from state");
    if (gen.time() != sched.t0)
        fail(ErrorCode::InvalidArgument, "chain must start at the schedule's t0");

    OptRun run;
    run.objectives = std::move(objectives);
    run.schedule = sched;
    run.F_star = F_star;
    run.chain_at_start = gen.clone();

    InputPolicy policy = [&run](std::int64_t t, const StateBlock& x) {
        StateBlock g = subgradient_block(run.objectives, x);
        double a = run.schedule.alpha(t);
        StateBlock u = StateBlock::zeros(x.agents(), x.dim());
        for (int i = 0; i < x.agents(); ++i)
            for (int k = 0; k < x.dim(); ++k) u.at(i, k) = -a * g(i, k);
        return u;
    };
    run.traj = run_controlled(gen, x0, policy, T, log);

    run.xbar.reserve(run.traj.states.size());
    run.f_bar.reserve(run.traj.states.size());
    for (const auto& x : run.traj.states) {
        run.xbar.push_back(column_mean(x));
        run.f_bar.push_back(total_objective(run.objectives, run.xbar.back()));
    }
    run.f_gap.reserve(run.f_bar.size());
    for (double v : run.f_bar) run.f_gap.push_back(v - F_star);
    run.alpha.reserve(run.traj.states.size());
    for (std::int64_t t = run.t0(); t <= run.t0() + T; ++t)
        run.alpha.push_back(sched.alpha(t));

    if (run.traj.matrices) {
        run.mean_dynamics_residual.emplace();
        for (std::int64_t k = 0; k < T; ++k) {
            const StateBlock& x = run.traj.states[static_cast<size_t>(k)];
            const StochasticMatrix& w = (*run.traj.matrices)[static_cast<size_t>(k)];
            std::vector<double> pred = column_mean(apply(w, x));
            StateBlock g = subgradient_block(run.objectives, x);
            std::vector<double> gbar = column_mean(g);
            double a = run.alpha[static_cast<size_t>(k)];
            double worst = 0.0;
            for (int c = 0; c < x.dim(); ++c) {
                double expect = pred[static_cast<size_t>(c)] - a * gbar[static_cast<size_t>(c)];
                worst = std::max(worst,
                                 std::abs(expect - run.xbar[static_cast<size_t>(k) + 1]
                                                           [static_cast<size_t>(c)]));
            }
            run.mean_dynamics_residual->push_back(worst);
        }
    }
    return run;
}

namespace {

bool all_abs(std::span<const Objective> objectives) {
    return std::all_of(objectives.begin(), objectives.end(), [](const Objective& f) {
        return f.kind == ObjectiveKind::AbsDeviation;
    });
}

OracleResult median_oracle(std::span<const Objective> objectives) {
    int m = objectives[0].dim;
    int n = static_cast<int>(objectives.size());
    std::vector<double> lo(static_cast<size_t>(m)), hi(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) {
        std::vector<double> anchors;
        anchors.reserve(static_cast<size_t>(n));
        for (const auto& f : objectives) anchors.push_back(f.anchor[static_cast<size_t>(k)]);
        std::sort(anchors.begin(), anchors.end());
        // The minimizer set per coordinate is the median interval.
        if (n % 2 == 1) {
            lo[static_cast<size_t>(k)] = hi[static_cast<size_t>(k)] =
                anchors[static_cast<size_t>(n / 2)];
        } else {
            lo[static_cast<size_t>(k)] = anchors[static_cast<size_t>(n / 2 - 1)];
            hi[static_cast<size_t>(k)] = anchors[static_cast<size_t>(n / 2)];
        }
    }
    OracleResult res;
    res.exact = true;
    res.F_star = total_objective(objectives, lo);
    res.minimizers.push_back(lo);
    if (hi != lo) {
        std::vector<double> mid(static_cast<size_t>(m));
        for (int k = 0; k < m; ++k)
            mid[static_cast<size_t>(k)] =
                0.5 * (lo[static_cast<size_t>(k)] + hi[static_cast<size_t>(k)]);
        res.minimizers.push_back(mid);
        res.minimizers.push_back(hi);
    }
    return res;
}

// Coordinate subgradient of F at z, component k.
double coord_subgrad(std::span<const Objective> objectives, std::span<const double> z, int k) {
    double sum = 0.0;
    for (const auto& f : objectives) sum += f.subgrad(z)[static_cast<size_t>(k)];
    return sum;
}

} // namespace

OracleResult optimal_oracle(std::span<const Objective> objectives) {
    if (objectives.empty()) fail(ErrorCode::InvalidArgument, "oracle needs objectives");
    if (!all_abs(objectives))
        fail(ErrorCode::InvalidArgument,
             "analytic oracle only covers absolute-deviation objectives; pass a box");
    return median_oracle(objectives);
}

OracleResult optimal_oracle(std::span<const Objective> objectives, const Box& box,
                            int grid_points) {
    if (objectives.empty()) fail(ErrorCode::InvalidArgument, "oracle needs objectives");
    if (all_abs(objectives)) return median_oracle(objectives);

    int m = objectives[0].dim;
    if (m > 2)
        fail(ErrorCode::InvalidArgument, "grid oracle supports m <= 2 at desk scale");
    if (grid_points < 3) fail(ErrorCode::InvalidArgument, "need grid_points >= 3");
    if (static_cast<int>(box.lo.size()) != m || static_cast<int>(box.hi.size()) != m)
        fail(ErrorCode::DimensionMismatch, "box dimension differs from objectives");
    for (int k = 0; k < m; ++k)
        if (!(box.lo[static_cast<size_t>(k)] < box.hi[static_cast<size_t>(k)]))
            fail(ErrorCode::InvalidArgument, "box must have positive extent");

    std::vector<double> h(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k)
        h[static_cast<size_t>(k)] = (box.hi[static_cast<size_t>(k)] -
                                     box.lo[static_cast<size_t>(k)]) /
                                    (grid_points - 1);

    auto grid_point = [&](int i, int j) {
        std::vector<double> z(static_cast<size_t>(m));
        z[0] = box.lo[0] + i * h[0];
        if (m == 2) z[1] = box.lo[1] + j * h[1];
        return z;
    };

    double best = std::numeric_limits<double>::infinity();
    int best_i = 0, best_j = 0;
    int jmax = m == 2 ? grid_points : 1;
    for (int i = 0; i < grid_points; ++i) {
        for (int j = 0; j < jmax; ++j) {
            double v = total_objective(objectives, grid_point(i, j));
            if (v < best) {
                best = v;
                best_i = i;
                best_j = j;
            }
        }
    }
    bool on_boundary = best_i == 0 || best_i == grid_points - 1 ||
                       (m == 2 && (best_j == 0 || best_j == grid_points - 1));
    if (on_boundary)
        fail(ErrorCode::OptimizerOnBoundary,
             "grid minimum sits on the box boundary; enlarge the box");

    OracleResult res;
    bool separable = std::all_of(objectives.begin(), objectives.end(),
                                 [](const Objective& f) { return f.separable; });
    std::vector<double> z = grid_point(best_i, best_j);
    if (separable) {
        // Per-coordinate bisection on the (monotone) subgradient sign change.
        for (int k = 0; k < m; ++k) {
            double lo = z[static_cast<size_t>(k)] - h[static_cast<size_t>(k)];
            double hi = z[static_cast<size_t>(k)] + h[static_cast<size_t>(k)];
            for (int it = 0; it < 100; ++it) {
                double mid = 0.5 * (lo + hi);
                z[static_cast<size_t>(k)] = mid;
                if (coord_subgrad(objectives, z, k) < 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            z[static_cast<size_t>(k)] = 0.5 * (lo + hi);
        }
        res.F_star = total_objective(objectives, z);
        res.minimizers.push_back(z);
        res.error_bound = 1e-10 * total_bound(objectives) * m;
    } else {
        res.F_star = best;
        for (int i = 0; i < grid_points; ++i)
            for (int j = 0; j < jmax; ++j)
                if (total_objective(objectives, grid_point(i, j)) <= best + 1e-12)
                    res.minimizers.push_back(grid_point(i, j));
        double hmax = *std::max_element(h.begin(), h.end());
        res.error_bound = total_bound(objectives) * hmax * m;
    }
    return res;
}

bool LyapunovReport::mc_ok() const {
    return std::all_of(mc_checks.begin(), mc_checks.end(),
                       [](const LyapunovMcCheck& c) { return c.ok; });
}

LyapunovReport lyapunov_audit(const OptRun& run, std::span<const double> v, int resamples,
                              std::uint64_t mc_seed, std::int64_t mc_stride) {
    if (static_cast<int>(v.size()) != run.traj.states[0].dim())
        fail(ErrorCode::DimensionMismatch, "audit point dimension differs from run");
    if (resamples > 0 &&
        (!run.chain_at_start || !run.chain_at_start->supports_conditional_resampling()))
        fail(ErrorCode::ConditionalLawUnavailable,
             "run's chain does not support conditional resampling");
    if (mc_stride < 1) fail(ErrorCode::InvalidArgument, "mc_stride must be >= 1");

    const auto& objectives = run.objectives;
    int n = run.traj.states[0].agents();
    double L = total_bound(objectives);
    double f_v = total_objective(objectives, v);

    LyapunovReport report;
    std::unique_ptr<ChainGenerator> replay;
    Pcg32 scratch(mc_seed, 0x6c7961ULL);
    if (resamples > 0) replay = run.chain_at_start->clone();

    std::int64_t T = run.horizon();
    for (std::int64_t k = 0; k <= T; ++k) {
        const StateBlock& x = run.traj.states[static_cast<size_t>(k)];
        const std::vector<double>& xbar = run.xbar[static_cast<size_t>(k)];
        StateBlock g = subgradient_block(objectives, x);
        std::vector<double> gbar = column_mean(g);

        double inner = 0.0;
        for (size_t c = 0; c < v.size(); ++c) inner += gbar[c] * (xbar[c] - v[c]);
        double sum_dev = 0.0, dev_sq_total = 0.0;
        for (int i = 0; i < n; ++i) {
            double dev = linf_dist(x.agent_row(i), xbar);
            sum_dev += objectives[static_cast<size_t>(i)].bound * dev;
            dev_sq_total += dev * dev;
        }
        double lhs = n * inner;
        double rhs = run.f_bar[static_cast<size_t>(k)] - f_v - 2.0 * sum_dev;
        report.max_subgrad_inequality_violation = std::max(report.max_subgrad_inequality_violation, rhs - lhs);
        ++report.steps_checked;

        if (resamples > 0 && k < T && k % mc_stride == 0) {
            double a = run.alpha[static_cast<size_t>(k)];
            // Drift bound from the conditional expectation of |xbar(t+1)-v|^2.
            double dist_sq = 0.0;
            for (size_t c = 0; c < v.size(); ++c)
                dist_sq = std::max(dist_sq, (xbar[c] - v[c]) * (xbar[c] - v[c]));
            double drift_rhs = dist_sq + a * a * L * L / (static_cast<double>(n) * n) +
                               dev_sq_total -
                               (2.0 * a / n) * (run.f_bar[static_cast<size_t>(k)] - f_v) +
                               (4.0 * a / n) * sum_dev;

            double acc = 0.0, acc_sq = 0.0;
            for (int r = 0; r < resamples; ++r) {
                auto replica = replay->clone();
                ChainStep s = replica->step_with(scratch);
                std::vector<double> next = column_mean(apply(s.W, x));
                double dist = 0.0;
                for (size_t c = 0; c < v.size(); ++c)
                    dist = std::max(dist, std::abs(next[c] - a * gbar[c] - v[c]));
                double sq = dist * dist;
                acc += sq;
                acc_sq += sq * sq;
            }
            double mean = acc / resamples;
            double var = std::max(0.0, acc_sq / resamples - mean * mean);
            double se = std::sqrt(var / resamples);
            report.mc_checks.push_back(
                {run.t0() + k, mean, se, drift_rhs, mean <= drift_rhs + 3.0 * se});
        }
        if (resamples > 0 && k < T) replay->step();
    }
    return report;
}

} // namespace ranopt
