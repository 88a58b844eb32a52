#include "ranopt.h"

#include <cstring>
#include <new>
#include <string>

#include "ranopt/chains.hpp"
#include "ranopt/experiments.hpp"
#include "ranopt/graph.hpp"
#include "ranopt/matrix.hpp"

using namespace ranopt;

struct ranopt_matrix {
    StochasticMatrix value;
};
struct ranopt_state {
    StateBlock value;
};
struct ranopt_graph {
    DirectedGraph value;
};
struct ranopt_chain {
    std::unique_ptr<ChainGenerator> value;
};

namespace {

thread_local std::string g_last_error;

ranopt_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonSquare: return RANOPT_ERR_NON_SQUARE;
        case ErrorCode::NegativeEntry: return RANOPT_ERR_NEGATIVE_ENTRY;
        case ErrorCode::RowSumOutOfTolerance: return RANOPT_ERR_ROW_SUM_OUT_OF_TOLERANCE;
        case ErrorCode::DimensionMismatch: return RANOPT_ERR_DIMENSION_MISMATCH;
        case ErrorCode::GammaOutOfRange: return RANOPT_ERR_GAMMA_OUT_OF_RANGE;
        case ErrorCode::DisconnectedGraph: return RANOPT_ERR_DISCONNECTED_GRAPH;
        case ErrorCode::BaseNotDoublyStochastic: return RANOPT_ERR_BASE_NOT_DOUBLY_STOCHASTIC;
        case ErrorCode::POutOfRange: return RANOPT_ERR_P_OUT_OF_RANGE;
        case ErrorCode::ConditionalLawUnavailable:
            return RANOPT_ERR_CONDITIONAL_LAW_UNAVAILABLE;
        case ErrorCode::IndexOutOfRange: return RANOPT_ERR_INDEX_OUT_OF_RANGE;
        case ErrorCode::MissingLogs: return RANOPT_ERR_MISSING_LOGS;
        case ErrorCode::AllPathsDegenerate: return RANOPT_ERR_ALL_PATHS_DEGENERATE;
        case ErrorCode::WindowOrderViolation: return RANOPT_ERR_WINDOW_ORDER_VIOLATION;
        case ErrorCode::TooShort: return RANOPT_ERR_TOO_SHORT;
        case ErrorCode::NoCrossings: return RANOPT_ERR_NO_CROSSINGS;
        case ErrorCode::ThetaOutOfRange: return RANOPT_ERR_THETA_OUT_OF_RANGE;
        case ErrorCode::TooFewRuns: return RANOPT_ERR_TOO_FEW_RUNS;
        case ErrorCode::OptimizerOnBoundary: return RANOPT_ERR_OPTIMIZER_ON_BOUNDARY;
        case ErrorCode::DeltaNonpositive: return RANOPT_ERR_DELTA_NONPOSITIVE;
        case ErrorCode::EmptyPieces: return RANOPT_ERR_EMPTY_PIECES;
        case ErrorCode::BetaOutOfRange: return RANOPT_ERR_BETA_OUT_OF_RANGE;
        case ErrorCode::KNonpositive: return RANOPT_ERR_K_NONPOSITIVE;
        case ErrorCode::InvalidArgument: return RANOPT_ERR_INVALID_ARGUMENT;
        case ErrorCode::ConfigError: return RANOPT_ERR_CONFIG;
        case ErrorCode::IoError: return RANOPT_ERR_IO;
    }
    return RANOPT_ERR_UNKNOWN;
}

template <typename F>
ranopt_status guarded(F&& body) {
    try {
        body();
        return RANOPT_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RANOPT_ERR_UNKNOWN;
    } catch (...) {
        g_last_error = "unknown error";
        return RANOPT_ERR_UNKNOWN;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int run_command(CommandResult (*cmd)(const std::string&, const std::string&, int,
                                     std::uint64_t),
                const char* config_json, const char* out_dir, int trials,
                uint64_t seed_offset) {
    if (!config_json || !out_dir) {
        g_last_error = "NULL argument";
        return 2;
    }
    try {
        CommandResult res = cmd(config_json, out_dir, trials, seed_offset);
        g_last_error = res.message;
        return res.exit_code;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return 2;
    }
}

} // namespace

extern "C" {

const char* ranopt_version(void) { return "0.1.0"; }

const char* ranopt_last_error(void) { return g_last_error.c_str(); }

void ranopt_string_free(char* s) { delete[] s; }

ranopt_status ranopt_matrix_create(int n, const double* entries, ranopt_matrix** out) {
    if (!entries || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        std::vector<double> data(entries, entries + static_cast<size_t>(n) * n);
        *out = new ranopt_matrix{StochasticMatrix::make(n, std::move(data))};
    });
}

void ranopt_matrix_free(ranopt_matrix* a) { delete a; }

int ranopt_matrix_dim(const ranopt_matrix* a) { return a ? a->value.dim() : 0; }

double ranopt_matrix_get(const ranopt_matrix* a, int i, int j) { return a->value(i, j); }

double ranopt_matrix_diam(const ranopt_matrix* a) { return diam(a->value); }

double ranopt_matrix_mixing(const ranopt_matrix* a) { return mixing(a->value); }

ranopt_status ranopt_matrix_compose(const ranopt_matrix* a, const ranopt_matrix* b,
                                    ranopt_matrix** out) {
    if (!a || !b || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] { *out = new ranopt_matrix{compose(a->value, b->value)}; });
}

ranopt_status ranopt_matrix_apply(const ranopt_matrix* a, const ranopt_state* x,
                                  ranopt_state** out) {
    if (!a || !x || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] { *out = new ranopt_state{apply(a->value, x->value)}; });
}

ranopt_status ranopt_matrix_to_json(const ranopt_matrix* a, char** out) {
    if (!a || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] { *out = dup_string(matrix_to_json(a->value)); });
}

ranopt_status ranopt_matrix_from_json(const char* text, ranopt_matrix** out) {
    if (!text || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] { *out = new ranopt_matrix{matrix_from_json(text)}; });
}

ranopt_status ranopt_matrix_to_csv(const ranopt_matrix* a, char** out) {
    if (!a || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] { *out = dup_string(matrix_to_csv(a->value)); });
}

ranopt_status ranopt_state_create(int n, int m, const double* values, ranopt_state** out) {
    if (!values || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        std::vector<double> data(values, values + static_cast<size_t>(n) * m);
        *out = new ranopt_state{StateBlock(n, m, std::move(data))};
    });
}

void ranopt_state_free(ranopt_state* x) { delete x; }

int ranopt_state_agents(const ranopt_state* x) { return x ? x->value.agents() : 0; }

int ranopt_state_dim(const ranopt_state* x) { return x ? x->value.dim() : 0; }

double ranopt_state_get(const ranopt_state* x, int i, int k) { return x->value(i, k); }

double ranopt_state_diameter(const ranopt_state* x) { return state_diameter(x->value); }

ranopt_status ranopt_state_to_json(const ranopt_state* x, char** out) {
    if (!x || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] { *out = dup_string(state_to_json(x->value)); });
}

ranopt_status ranopt_state_from_json(const char* text, ranopt_state** out) {
    if (!text || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] { *out = new ranopt_state{state_from_json(text)}; });
}

ranopt_status ranopt_graph_of(const ranopt_matrix* a, double gamma, ranopt_graph** out) {
    if (!a || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] { *out = new ranopt_graph{graph_of(a->value, gamma)}; });
}

ranopt_status ranopt_graph_union(const ranopt_graph* g, const ranopt_graph* h,
                                 ranopt_graph** out) {
    if (!g || !h || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        DirectedGraph parts[] = {g->value, h->value};
        *out = new ranopt_graph{union_graphs(parts)};
    });
}

void ranopt_graph_free(ranopt_graph* g) { delete g; }

int ranopt_graph_vertices(const ranopt_graph* g) { return g ? g->value.vertices() : 0; }

int ranopt_graph_edge_count(const ranopt_graph* g) {
    return g ? static_cast<int>(g->value.edges().size()) : 0;
}

int ranopt_graph_has_edge(const ranopt_graph* g, int from, int to) {
    return g && g->value.has_edge(from, to) ? 1 : 0;
}

int ranopt_graph_has_spanning_rooted_tree(const ranopt_graph* g) {
    return g && has_spanning_rooted_tree(g->value) ? 1 : 0;
}

ranopt_status ranopt_chain_create(const char* config_json, uint64_t seed,
                                  ranopt_chain** out) {
    if (!config_json || !out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] { *out = new ranopt_chain{make_chain(config_json, seed)}; });
}

void ranopt_chain_free(ranopt_chain* c) { delete c; }

int ranopt_chain_agents(const ranopt_chain* c) { return c ? c->value->n() : 0; }

int64_t ranopt_chain_time(const ranopt_chain* c) { return c ? c->value->time() : 0; }

ranopt_status ranopt_chain_step(ranopt_chain* c, int64_t* t_out, ranopt_matrix** w_out,
                                ranopt_matrix** cond_out) {
    if (!c || !w_out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        ChainStep step = c->value->step();
        if (t_out) *t_out = step.t;
        *w_out = new ranopt_matrix{std::move(step.W)};
        if (cond_out)
            *cond_out = step.cond_exp ? new ranopt_matrix{std::move(*step.cond_exp)} : nullptr;
    });
}

ranopt_status ranopt_verify_assumptions(const char* chain_config_json, uint64_t seed,
                                        int B, double gamma, int64_t horizon, int trials,
                                        char** report_json_out) {
    if (!chain_config_json || !report_json_out) return RANOPT_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        ChainConfig cfg = parse_chain_config(chain_config_json);
        AssumptionReport report =
            verify_assumptions(cfg.factory(), seed, B, gamma, horizon, trials);
        *report_json_out = dup_string(report.to_json());
    });
}

int ranopt_cmd_verify_chain(const char* config_json, const char* out_dir, int trials,
                            uint64_t seed_offset) {
    return run_command(cmd_verify_chain, config_json, out_dir, trials, seed_offset);
}

int ranopt_cmd_consensus(const char* config_json, const char* out_dir, int trials,
                         uint64_t seed_offset) {
    return run_command(cmd_consensus, config_json, out_dir, trials, seed_offset);
}

int ranopt_cmd_optimize(const char* config_json, const char* out_dir, int trials,
                        uint64_t seed_offset) {
    return run_command(cmd_optimize, config_json, out_dir, trials, seed_offset);
}

int ranopt_cmd_estimate_rate(const char* config_json, const char* out_dir, int trials,
                             uint64_t seed_offset) {
    return run_command(cmd_estimate_rate, config_json, out_dir, trials, seed_offset);
}

} // extern "C"
