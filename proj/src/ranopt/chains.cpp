#include "chains.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <json.hpp>

namespace ranopt {

namespace {

std::vector<double> identity_entries(int n) {
    std::vector<double> e(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) e[static_cast<size_t>(i) * n + i] = 1.0;
    return e;
}

class TokenChain final : public ChainGenerator {
public:
    TokenChain(UndirectedGraph graph, std::uint64_t seed, int holder, std::int64_t t0)
        : ChainGenerator(t0, seed, 0x746f6b656eULL),
          graph_(std::move(graph)),
          holder_(holder) {
        if (graph_.vertices() < 2 || !graph_.connected())
            fail(ErrorCode::DisconnectedGraph, "token chain needs a connected graph, n >= 2");
        if (holder_ < 0 || holder_ >= graph_.vertices())
            fail(ErrorCode::IndexOutOfRange, "initial token holder outside [n]");
    }

    int n() const override { return graph_.vertices(); }
    std::unique_ptr<ChainGenerator> clone() const override {
        return std::make_unique<TokenChain>(*this);
    }
    bool analytic_cond_exp() const override { return true; }

    std::optional<StochasticMatrix> cond_exp_ahead(int k) const override {
        if (k < 1) fail(ErrorCode::InvalidArgument, "cond_exp_ahead needs k >= 1");
        // E[W(t+k) | F(t)] = sum_h P(holder at t+k-1 = h | holder at t) V(h).
        int size = n();
        std::vector<double> dist(size, 0.0);
        dist[holder_] = 1.0;
        for (int s = 1; s < k; ++s) dist = holder_kernel_step(dist);
        std::vector<double> mix(static_cast<size_t>(size) * size, 0.0);
        for (int h = 0; h < size; ++h) {
            if (dist[h] == 0.0) continue;
            StochasticMatrix vh = expected_step_matrix(h);
            for (size_t idx = 0; idx < mix.size(); ++idx)
                mix[idx] += dist[h] * vh.data()[idx];
        }
        return StochasticMatrix::make(size, std::move(mix));
    }

    /// V(h): the conditional expectation of W given the holder h. Diagonal
    /// 3/4 at h, 1/(4 deg h) between h and each neighbor (both directions),
    /// and the complementary mass 1 - 1/(4 deg h) on neighbor diagonals so
    /// the matrix is doubly stochastic.
    StochasticMatrix expected_step_matrix(int h) const {
        int size = n();
        std::vector<double> e = identity_entries(size);
        double w = 1.0 / (4.0 * graph_.degree(h));
        e[static_cast<size_t>(h) * size + h] = 0.75;
        for (int j : graph_.neighbors(h)) {
            e[static_cast<size_t>(h) * size + j] = w;
            e[static_cast<size_t>(j) * size + h] = w;
            e[static_cast<size_t>(j) * size + j] = 1.0 - w;
        }
        return StochasticMatrix::make(size, std::move(e));
    }

protected:
    ChainStep do_step(Pcg32& rng) override {
        StochasticMatrix cond = expected_step_matrix(holder_);
        const auto& nbrs = graph_.neighbors(holder_);
        int chosen = nbrs[rng.next_below(static_cast<std::uint32_t>(nbrs.size()))];
        bool pass_token = rng.coin();
        int receiver = pass_token ? chosen : holder_;
        int other = pass_token ? holder_ : chosen;

        int size = n();
        std::vector<double> e = identity_entries(size);
        e[static_cast<size_t>(receiver) * size + receiver] = 0.5;
        e[static_cast<size_t>(receiver) * size + other] = 0.5;
        holder_ = receiver;
        return {time() + 1, StochasticMatrix::make(size, std::move(e)), std::move(cond)};
    }

private:
    std::vector<double> holder_kernel_step(const std::vector<double>& dist) const {
        // Holder Markov kernel: stay w.p. 1/2, else move to a uniform neighbor.
        std::vector<double> next(dist.size(), 0.0);
        for (int i = 0; i < n(); ++i) {
            if (dist[i] == 0.0) continue;
            next[i] += 0.5 * dist[i];
            double share = 0.5 * dist[i] / graph_.degree(i);
            for (int j : graph_.neighbors(i)) next[j] += share;
        }
        return next;
    }

    UndirectedGraph graph_;
    int holder_;
};

class GossipChain final : public ChainGenerator {
public:
    GossipChain(UndirectedGraph graph, std::uint64_t seed, std::int64_t t0)
        : ChainGenerator(t0, seed, 0x676f73ULL),
          graph_(std::move(graph)),
          mean_(StochasticMatrix::identity(1)) {
        if (graph_.vertices() < 2 || !graph_.connected())
            fail(ErrorCode::DisconnectedGraph, "gossip chain needs a connected graph, n >= 2");
        int size = graph_.vertices();
        std::vector<double> acc(static_cast<size_t>(size) * size, 0.0);
        for (const auto& [u, v] : graph_.edges()) {
            std::vector<double> e = identity_entries(size);
            set_pair(e, size, u, v);
            for (size_t idx = 0; idx < acc.size(); ++idx) acc[idx] += e[idx];
        }
        double scale = 1.0 / static_cast<double>(graph_.edges().size());
        for (double& v : acc) v *= scale;
        mean_ = StochasticMatrix::make(size, std::move(acc));
    }

    int n() const override { return graph_.vertices(); }
    std::unique_ptr<ChainGenerator> clone() const override {
        return std::make_unique<GossipChain>(*this);
    }
    bool analytic_cond_exp() const override { return true; }
    std::optional<StochasticMatrix> cond_exp_ahead(int k) const override {
        if (k < 1) fail(ErrorCode::InvalidArgument, "cond_exp_ahead needs k >= 1");
        return mean_; // i.i.d. chain
    }

protected:
    ChainStep do_step(Pcg32& rng) override {
        const auto& edges = graph_.edges();
        auto [u, v] = edges[rng.next_below(static_cast<std::uint32_t>(edges.size()))];
        int size = n();
        std::vector<double> e = identity_entries(size);
        set_pair(e, size, u, v);
        return {time() + 1, StochasticMatrix::make(size, std::move(e)), mean_};
    }

private:
    static void set_pair(std::vector<double>& e, int size, int u, int v) {
        e[static_cast<size_t>(u) * size + u] = 0.5;
        e[static_cast<size_t>(u) * size + v] = 0.5;
        e[static_cast<size_t>(v) * size + v] = 0.5;
        e[static_cast<size_t>(v) * size + u] = 0.5;
    }

    UndirectedGraph graph_;
    StochasticMatrix mean_;
};

class LinkFailureChain final : public ChainGenerator {
public:
    LinkFailureChain(std::vector<StochasticMatrix> base, FailureSchedule p,
                     std::uint64_t seed, std::int64_t t0)
        : ChainGenerator(t0, seed, 0x6661696cULL),
          base_(std::move(base)),
          p_(std::move(p)),
          t0_(t0) {
        if (base_.empty())
            fail(ErrorCode::InvalidArgument, "link-failure chain needs at least one base matrix");
        for (const auto& a : base_) {
            if (a.dim() != base_[0].dim())
                fail(ErrorCode::DimensionMismatch, "base matrices must share dimensions");
            if (!a.is_doubly_stochastic())
                fail(ErrorCode::BaseNotDoublyStochastic,
                     "base matrix is not doubly stochastic");
        }
    }

    int n() const override { return base_[0].dim(); }
    std::unique_ptr<ChainGenerator> clone() const override {
        return std::make_unique<LinkFailureChain>(*this);
    }
    bool analytic_cond_exp() const override { return true; }

    std::optional<StochasticMatrix> cond_exp_ahead(int k) const override {
        if (k < 1) fail(ErrorCode::InvalidArgument, "cond_exp_ahead needs k >= 1");
        return expected_at(time() + k); // failures are independent of history
    }

protected:
    ChainStep do_step(Pcg32& rng) override {
        std::int64_t t = time() + 1;
        const StochasticMatrix& a = base_at(t);
        double q = 1.0 - failure_prob(t);
        int size = n();
        std::vector<double> e(static_cast<size_t>(size) * size, 0.0);
        for (int i = 0; i < size; ++i) {
            double diag = 1.0;
            for (int j = 0; j < size; ++j) {
                if (j == i || a(i, j) == 0.0) continue;
                if (rng.bernoulli(q)) {
                    e[static_cast<size_t>(i) * size + j] = a(i, j);
                    diag -= a(i, j);
                }
            }
            e[static_cast<size_t>(i) * size + i] = diag;
        }
        return {t, StochasticMatrix::make(size, std::move(e)), expected_at(t)};
    }

private:
    const StochasticMatrix& base_at(std::int64_t t) const {
        return base_[static_cast<size_t>((t - t0_ - 1) % static_cast<std::int64_t>(base_.size()))];
    }

    double failure_prob(std::int64_t t) const {
        double p = p_(t);
        if (!(p >= 0.0 && p < 1.0))
            fail(ErrorCode::POutOfRange, "failure probability must lie in [0, 1)");
        return p;
    }

    StochasticMatrix expected_at(std::int64_t t) const {
        const StochasticMatrix& a = base_at(t);
        double q = 1.0 - failure_prob(t);
        int size = n();
        std::vector<double> e(static_cast<size_t>(size) * size, 0.0);
        for (int i = 0; i < size; ++i) {
            double off = 0.0;
            for (int j = 0; j < size; ++j) {
                if (j == i) continue;
                double w = q * a(i, j);
                e[static_cast<size_t>(i) * size + j] = w;
                off += w;
            }
            e[static_cast<size_t>(i) * size + i] = 1.0 - off;
        }
        return StochasticMatrix::make(size, std::move(e));
    }

    std::vector<StochasticMatrix> base_;
    FailureSchedule p_;
    std::int64_t t0_;
};

class StaticChain final : public ChainGenerator {
public:
    StaticChain(StochasticMatrix a, bool expose_cond_exp_always, std::int64_t t0)
        : ChainGenerator(t0, 0, 0x737461ULL),
          a_(std::move(a)),
          expose_(expose_cond_exp_always || a_.is_doubly_stochastic()) {}

    int n() const override { return a_.dim(); }
    std::unique_ptr<ChainGenerator> clone() const override {
        return std::make_unique<StaticChain>(*this);
    }
    bool analytic_cond_exp() const override { return expose_; }
    std::optional<StochasticMatrix> cond_exp_ahead(int k) const override {
        if (k < 1) fail(ErrorCode::InvalidArgument, "cond_exp_ahead needs k >= 1");
        if (!expose_) return std::nullopt;
        return a_;
    }

protected:
    ChainStep do_step(Pcg32&) override {
        return {time() + 1, a_, expose_ ? std::optional<StochasticMatrix>(a_) : std::nullopt};
    }

private:
    StochasticMatrix a_;
    bool expose_;
};

} // namespace

std::unique_ptr<ChainGenerator> token_chain(const UndirectedGraph& graph, std::uint64_t seed,
                                            int initial_holder, std::int64_t t0) {
    return std::make_unique<TokenChain>(graph, seed, initial_holder, t0);
}

std::unique_ptr<ChainGenerator> pairwise_gossip_chain(const UndirectedGraph& graph,
                                                      std::uint64_t seed, std::int64_t t0) {
    return std::make_unique<GossipChain>(graph, seed, t0);
}

std::unique_ptr<ChainGenerator> link_failure_chain(std::vector<StochasticMatrix> base,
                                                   FailureSchedule p, std::uint64_t seed,
                                                   std::int64_t t0) {
    return std::make_unique<LinkFailureChain>(std::move(base), std::move(p), seed, t0);
}

std::unique_ptr<ChainGenerator> link_failure_chain(std::vector<StochasticMatrix> base,
                                                   double p, std::uint64_t seed,
                                                   std::int64_t t0) {
    if (!(p >= 0.0 && p < 1.0))
        fail(ErrorCode::POutOfRange, "failure probability must lie in [0, 1)");
    return link_failure_chain(std::move(base), [p](std::int64_t) { return p; }, seed, t0);
}

std::unique_ptr<ChainGenerator> static_chain(StochasticMatrix a, std::int64_t t0) {
    return std::make_unique<StaticChain>(std::move(a), false, t0);
}

std::unique_ptr<ChainGenerator> negative_control_chain(StochasticMatrix a, std::int64_t t0) {
    return std::make_unique<StaticChain>(std::move(a), true, t0);
}

StochasticMatrix metropolis_matrix(const UndirectedGraph& graph) {
    int n = graph.vertices();
    std::vector<double> e(static_cast<size_t>(n) * n, 0.0);
    for (const auto& [u, v] : graph.edges()) {
        double w = 1.0 / (1.0 + std::max(graph.degree(u), graph.degree(v)));
        e[static_cast<size_t>(u) * n + v] = w;
        e[static_cast<size_t>(v) * n + u] = w;
    }
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += e[static_cast<size_t>(i) * n + j];
        e[static_cast<size_t>(i) * n + i] = 1.0 - off;
    }
    return StochasticMatrix::make(n, std::move(e));
}

McMatrixEstimate mc_cond_exp_ahead(const ChainGenerator& gen, int k, int resamples,
                                   Pcg32& scratch) {
    if (k < 1 || resamples < 2)
        fail(ErrorCode::InvalidArgument, "mc_cond_exp_ahead needs k >= 1, resamples >= 2");
    if (!gen.supports_conditional_resampling())
        fail(ErrorCode::ConditionalLawUnavailable,
             "chain exposes neither analytic cond_exp nor conditional resampling");
    int n = gen.n();
    std::vector<double> acc(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> col_sum(n, 0.0), col_sumsq(n, 0.0);
    for (int r = 0; r < resamples; ++r) {
        auto replica = gen.clone();
        ChainStep last = replica->step_with(scratch);
        for (int s = 1; s < k; ++s) last = replica->step_with(scratch);
        for (size_t idx = 0; idx < acc.size(); ++idx) acc[idx] += last.W.data()[idx];
        for (int j = 0; j < n; ++j) {
            double c = 0.0;
            for (int i = 0; i < n; ++i) c += last.W(i, j);
            col_sum[j] += c;
            col_sumsq[j] += c * c;
        }
    }
    for (double& v : acc) v /= resamples;
    McMatrixEstimate est{StochasticMatrix::make(n, std::move(acc)), 0.0, 0.0};
    est.max_col_dev = est.mean.max_column_sum_deviation();
    for (int j = 0; j < n; ++j) {
        double mean = col_sum[j] / resamples;
        double var = std::max(0.0, col_sumsq[j] / resamples - mean * mean);
        est.max_col_se = std::max(est.max_col_se, std::sqrt(var / resamples));
    }
    return est;
}

bool AssumptionReport::pass(double cond_tol) const {
    double tol = cond_is_monte_carlo ? std::max(cond_tol, 3.0 * cond_mc_max_se) : cond_tol;
    return row_stochastic_ok && self_loops_ok && b_connectivity_ok &&
           cond_column_sums_max_dev <= tol;
}

std::string AssumptionReport::to_json() const {
    nlohmann::json j{
        {"row_stochastic_ok", row_stochastic_ok},
        {"self_loops_ok", self_loops_ok},
        {"cond_column_sums_max_dev", cond_column_sums_max_dev},
        {"cond_is_monte_carlo", cond_is_monte_carlo},
        {"cond_mc_max_se", cond_mc_max_se},
        {"b_connectivity_ok", b_connectivity_ok},
        {"window_form_exact", window_form_exact},
        {"per_step_variant", per_step_variant},
        {"B_used", B_used},
        {"gamma_used", gamma_used},
        {"trials", trials},
        {"horizon", horizon},
        {"windows_checked", windows_checked},
        {"pass", pass()},
    };
    return j.dump(2);
}

AssumptionReport verify_assumptions(const ChainFactory& factory, std::uint64_t base_seed,
                                    int B, double gamma, std::int64_t horizon, int trials,
                                    int mc_resamples, bool per_step_variant) {
    if (B < 1) fail(ErrorCode::InvalidArgument, "B must be >= 1");
    if (horizon < B) fail(ErrorCode::InvalidArgument, "horizon must be >= B");
    if (trials < 1) fail(ErrorCode::InvalidArgument, "trials must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0))
        fail(ErrorCode::GammaOutOfRange, "gamma must lie in (0, 1)");

    AssumptionReport report;
    report.B_used = B;
    report.gamma_used = gamma;
    report.trials = trials;
    report.horizon = horizon;
    report.per_step_variant = per_step_variant;

    for (int trial = 0; trial < trials; ++trial) {
        auto gen = factory(mix_seed(base_seed, static_cast<std::uint64_t>(trial)));
        Pcg32 scratch(mix_seed(base_seed ^ 0x5ca1ab1eULL, static_cast<std::uint64_t>(trial)),
                      0x7665ULL);
        std::int64_t windows = horizon / B;
        for (std::int64_t w = 0; w < windows; ++w) {
            std::vector<DirectedGraph> window_graphs;
            if (!per_step_variant) {
                // Union of E^gamma(E[W(tau) | F(window start)]) over the window.
                for (int k = 1; k <= B; ++k) {
                    auto ce = gen->cond_exp_ahead(k);
                    if (!ce) {
                        auto mc = mc_cond_exp_ahead(*gen, k, mc_resamples, scratch);
                        report.window_form_exact = false;
                        ce = std::move(mc.mean);
                    }
                    window_graphs.push_back(graph_of(*ce, gamma));
                }
            }
            for (int k = 1; k <= B; ++k) {
                std::optional<McMatrixEstimate> mc;
                if (!gen->analytic_cond_exp()) {
                    mc = mc_cond_exp_ahead(*gen, 1, mc_resamples, scratch);
                    report.cond_is_monte_carlo = true;
                }
                ChainStep step = gen->step();

                for (int i = 0; i < gen->n(); ++i) {
                    double row = 0.0;
                    for (int j = 0; j < gen->n(); ++j) row += step.W(i, j);
                    if (std::abs(row - 1.0) > kExactTol) report.row_stochastic_ok = false;
                    if (!(step.W(i, i) > gamma)) report.self_loops_ok = false;
                }
                if (step.cond_exp) {
                    report.cond_column_sums_max_dev =
                        std::max(report.cond_column_sums_max_dev,
                                 step.cond_exp->max_column_sum_deviation());
                } else if (mc) {
                    report.cond_column_sums_max_dev =
                        std::max(report.cond_column_sums_max_dev, mc->max_col_dev);
                    report.cond_mc_max_se = std::max(report.cond_mc_max_se, mc->max_col_se);
                    if (per_step_variant) window_graphs.push_back(graph_of(mc->mean, gamma));
                } else {
                    fail(ErrorCode::ConditionalLawUnavailable,
                         "chain exposes neither analytic cond_exp nor conditional resampling");
                }
                if (per_step_variant && step.cond_exp)
                    window_graphs.push_back(graph_of(*step.cond_exp, gamma));
            }
            if (!has_spanning_rooted_tree(union_graphs(window_graphs)))
                report.b_connectivity_ok = false;
        }
        if (trial == 0)
            report.windows_checked = static_cast<int>(windows);
    }
    return report;
}

} // namespace ranopt
