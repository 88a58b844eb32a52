/*
 * ranopt — simulation and verification toolkit for distributed averaging and
 * averaging-based distributed subgradient optimization over random networks.
 *
 * C API over the C++ core. All handles are opaque; functions that can fail
 * return a ranopt_status (or a process-style exit code for the command
 * entry points) and leave a human-readable message in ranopt_last_error().
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with ranopt_string_free().
 */
#ifndef RANOPT_H
#define RANOPT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ranopt_status {
    RANOPT_OK = 0,
    RANOPT_ERR_NON_SQUARE,
    RANOPT_ERR_NEGATIVE_ENTRY,
    RANOPT_ERR_ROW_SUM_OUT_OF_TOLERANCE,
    RANOPT_ERR_DIMENSION_MISMATCH,
    RANOPT_ERR_GAMMA_OUT_OF_RANGE,
    RANOPT_ERR_DISCONNECTED_GRAPH,
    RANOPT_ERR_BASE_NOT_DOUBLY_STOCHASTIC,
    RANOPT_ERR_P_OUT_OF_RANGE,
    RANOPT_ERR_CONDITIONAL_LAW_UNAVAILABLE,
    RANOPT_ERR_INDEX_OUT_OF_RANGE,
    RANOPT_ERR_MISSING_LOGS,
    RANOPT_ERR_ALL_PATHS_DEGENERATE,
    RANOPT_ERR_WINDOW_ORDER_VIOLATION,
    RANOPT_ERR_TOO_SHORT,
    RANOPT_ERR_NO_CROSSINGS,
    RANOPT_ERR_THETA_OUT_OF_RANGE,
    RANOPT_ERR_TOO_FEW_RUNS,
    RANOPT_ERR_OPTIMIZER_ON_BOUNDARY,
    RANOPT_ERR_DELTA_NONPOSITIVE,
    RANOPT_ERR_EMPTY_PIECES,
    RANOPT_ERR_BETA_OUT_OF_RANGE,
    RANOPT_ERR_K_NONPOSITIVE,
    RANOPT_ERR_INVALID_ARGUMENT,
    RANOPT_ERR_CONFIG,
    RANOPT_ERR_IO,
    RANOPT_ERR_UNKNOWN
} ranopt_status;

typedef struct ranopt_matrix ranopt_matrix;
typedef struct ranopt_state ranopt_state;
typedef struct ranopt_graph ranopt_graph;
typedef struct ranopt_chain ranopt_chain;

const char* ranopt_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* ranopt_last_error(void);

void ranopt_string_free(char* s);

/* ---- stochastic matrices -------------------------------------------- */

/* Validates an n-by-n row-major array: entries nonnegative, row sums within
 * 1e-9 of one (rows are renormalized exactly). */
ranopt_status ranopt_matrix_create(int n, const double* entries, ranopt_matrix** out);
void ranopt_matrix_free(ranopt_matrix* a);
int ranopt_matrix_dim(const ranopt_matrix* a);
double ranopt_matrix_get(const ranopt_matrix* a, int i, int j);
/* diam(A): half the worst l1 distance between rows, in [0, 1]. */
double ranopt_matrix_diam(const ranopt_matrix* a);
/* Mixing coefficient Lambda(A) = 1 - diam(A). */
double ranopt_matrix_mixing(const ranopt_matrix* a);
ranopt_status ranopt_matrix_compose(const ranopt_matrix* a, const ranopt_matrix* b,
                                    ranopt_matrix** out);
ranopt_status ranopt_matrix_apply(const ranopt_matrix* a, const ranopt_state* x,
                                  ranopt_state** out);
/* JSON array-of-arrays (row-major). */
ranopt_status ranopt_matrix_to_json(const ranopt_matrix* a, char** out);
ranopt_status ranopt_matrix_from_json(const char* text, ranopt_matrix** out);
/* CSV body with header `row,col,value`. */
ranopt_status ranopt_matrix_to_csv(const ranopt_matrix* a, char** out);

/* ---- state blocks ---------------------------------------------------- */

ranopt_status ranopt_state_create(int n, int m, const double* values, ranopt_state** out);
void ranopt_state_free(ranopt_state* x);
int ranopt_state_agents(const ranopt_state* x);
int ranopt_state_dim(const ranopt_state* x);
double ranopt_state_get(const ranopt_state* x, int i, int k);
/* d(x): max pairwise linf distance between agent rows. */
double ranopt_state_diameter(const ranopt_state* x);
ranopt_status ranopt_state_to_json(const ranopt_state* x, char** out);
ranopt_status ranopt_state_from_json(const char* text, ranopt_state** out);

/* ---- threshold graphs ------------------------------------------------ */

/* Edge (j, i) present iff a_ij > gamma strictly, gamma in (0, 1). */
ranopt_status ranopt_graph_of(const ranopt_matrix* a, double gamma, ranopt_graph** out);
ranopt_status ranopt_graph_union(const ranopt_graph* g, const ranopt_graph* h,
                                 ranopt_graph** out);
void ranopt_graph_free(ranopt_graph* g);
int ranopt_graph_vertices(const ranopt_graph* g);
int ranopt_graph_edge_count(const ranopt_graph* g);
int ranopt_graph_has_edge(const ranopt_graph* g, int from, int to);
/* 1 iff some vertex reaches every vertex along directed edges. */
int ranopt_graph_has_spanning_rooted_tree(const ranopt_graph* g);

/* ---- weight-matrix chains -------------------------------------------- */

/* config_json is a chain document, e.g.
 *   {"type":"token","graph":{"n":5,"edges":[[0,1],[1,2],[2,3],[3,4],[4,0]]}}
 * Types: "token", "gossip", "link_failure", "static", "negative_control". */
ranopt_status ranopt_chain_create(const char* config_json, uint64_t seed,
                                  ranopt_chain** out);
void ranopt_chain_free(ranopt_chain* c);
int ranopt_chain_agents(const ranopt_chain* c);
int64_t ranopt_chain_time(const ranopt_chain* c);

/* Advances one step. w_out receives the realized W(t); cond_out (optional,
 * may be NULL) receives the analytic E[W(t)|F(t-1)] or NULL when the chain
 * has no closed form. */
ranopt_status ranopt_chain_step(ranopt_chain* c, int64_t* t_out, ranopt_matrix** w_out,
                                ranopt_matrix** cond_out);

/* Runs the assumption verifier over `trials` sample paths and returns the
 * report as JSON. */
ranopt_status ranopt_verify_assumptions(const char* chain_config_json, uint64_t seed,
                                        int B, double gamma, int64_t horizon, int trials,
                                        char** report_json_out);

/* ---- command entry points -------------------------------------------- */

/* Full command bodies backing the CLI: parse the experiment config, run, and
 * write CSV/JSON artifacts under out_dir. Return the CLI exit code contract:
 * 0 success, 1 audit/assumption failure, 2 usage/config error. trials == 0
 * means "use the config value". */
int ranopt_cmd_verify_chain(const char* config_json, const char* out_dir, int trials,
                            uint64_t seed_offset);
int ranopt_cmd_consensus(const char* config_json, const char* out_dir, int trials,
                         uint64_t seed_offset);
int ranopt_cmd_optimize(const char* config_json, const char* out_dir, int trials,
                        uint64_t seed_offset);
int ranopt_cmd_estimate_rate(const char* config_json, const char* out_dir, int trials,
                             uint64_t seed_offset);

#ifdef __cplusplus
}
#endif

#endif /* RANOPT_H */
