#include "dynamics.hpp"

#include <cmath>

namespace ranopt {

size_t Trajectory::check_index(std::int64_t t) const {
    if (t < t0 || t > t0 + horizon())
        fail(ErrorCode::IndexOutOfRange, "time outside the logged trajectory");
    return static_cast<size_t>(t - t0);
}

Trajectory run_controlled(ChainGenerator& gen, const StateBlock& x0,
                          const InputPolicy& policy, std::int64_t T, LogOptions log) {
    if (gen.n() != x0.agents())
        fail(ErrorCode::DimensionMismatch, "chain and initial state disagree on n");
    if (T < 0) fail(ErrorCode::InvalidArgument, "horizon must be >= 0");

    Trajectory traj;
    traj.t0 = gen.time();
    traj.states.reserve(static_cast<size_t>(T) + 1);
    traj.diameters.reserve(static_cast<size_t>(T) + 1);
    if (log.matrices) traj.matrices.emplace();
    if (log.inputs) traj.inputs.emplace();

    StateBlock x = x0;
    traj.states.push_back(x);
    traj.diameters.push_back(state_diameter(x));
    for (std::int64_t k = 0; k < T; ++k) {
        std::int64_t t = traj.t0 + k;
        StateBlock u = policy(t, x);
        if (u.agents() != x.agents() || u.dim() != x.dim())
            fail(ErrorCode::DimensionMismatch, "input policy returned wrong dimensions");
        ChainStep step = gen.step();
        x = add(apply(step.W, x), u);
        traj.states.push_back(x);
        traj.diameters.push_back(state_diameter(x));
        if (log.matrices) traj.matrices->push_back(std::move(step.W));
        if (log.inputs) traj.inputs->push_back(std::move(u));
    }
    return traj;
}

Trajectory run_autonomous(ChainGenerator& gen, const StateBlock& x0, std::int64_t T,
                          LogOptions log) {
    // u = 0 logged explicitly so reconstruction audits work on autonomous runs.
    StateBlock zero = StateBlock::zeros(x0.agents(), x0.dim());
    return run_controlled(
        gen, x0, [&zero](std::int64_t, const StateBlock&) { return zero; }, T, log);
}

StochasticMatrix transition_matrix(std::span<const StochasticMatrix> ws, std::int64_t t0,
                                   std::int64_t tau, std::int64_t t) {
    if (ws.empty()) fail(ErrorCode::InvalidArgument, "no logged matrices");
    if (tau > t || tau < t0 || t > t0 + static_cast<std::int64_t>(ws.size()))
        fail(ErrorCode::IndexOutOfRange, "transition window outside the logged range");
    StochasticMatrix phi = StochasticMatrix::identity(ws[0].dim());
    for (std::int64_t s = tau + 1; s <= t; ++s)
        phi = compose(ws[static_cast<size_t>(s - t0 - 1)], phi);
    return phi;
}

double variation_of_constants_check(const Trajectory& traj, std::int64_t tau, std::int64_t t) {
    if (!traj.matrices || !traj.inputs)
        fail(ErrorCode::MissingLogs, "reconstruction needs logged matrices and inputs");
    if (tau > t)
        fail(ErrorCode::IndexOutOfRange, "need tau <= t");
    const auto& ws = *traj.matrices;
    const auto& us = *traj.inputs;
    const StateBlock& x_tau = traj.state_at(tau);
    const StateBlock& x_t = traj.state_at(t);
    int n = x_tau.agents(), m = x_tau.dim();

    // Walk s from t-1 down to tau, growing Phi(t, s+1) one factor at a time.
    StateBlock acc = StateBlock::zeros(n, m);
    StochasticMatrix phi = StochasticMatrix::identity(n); // Phi(t, t)
    for (std::int64_t s = t - 1; s >= tau; --s) {
        acc = add(acc, apply(phi, us[static_cast<size_t>(s - traj.t0)]));
        phi = compose(phi, ws[static_cast<size_t>(s - traj.t0)]); // now Phi(t, s)
    }
    StateBlock recon = add(apply(phi, x_tau), acc);

    double worst = 0.0;
    for (size_t idx = 0; idx < recon.data().size(); ++idx)
        worst = std::max(worst, std::abs(recon.data()[idx] - x_t.data()[idx]));
    return worst;
}

} // namespace ranopt
