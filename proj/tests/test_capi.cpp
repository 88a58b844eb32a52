#include <doctest.h>

#include <filesystem>
#include <string>

#include "ranopt.h"

namespace fs = std::filesystem;

namespace {

std::string take_string(char* s) {
    REQUIRE(s != nullptr);
    std::string out = s;
    ranopt_string_free(s);
    return out;
}

} // namespace

TEST_CASE("c api: matrix lifecycle, functionals, errors") {
    const double entries[] = {1.0, 0.0, 0.5, 0.5};
    ranopt_matrix* a = nullptr;
    REQUIRE(ranopt_matrix_create(2, entries, &a) == RANOPT_OK);
    CHECK(ranopt_matrix_dim(a) == 2);
    CHECK(ranopt_matrix_get(a, 1, 0) == 0.5);
    CHECK(ranopt_matrix_diam(a) == doctest::Approx(0.5));
    CHECK(ranopt_matrix_mixing(a) == doctest::Approx(0.5));

    ranopt_matrix* sq = nullptr;
    REQUIRE(ranopt_matrix_compose(a, a, &sq) == RANOPT_OK);
    CHECK(ranopt_matrix_get(sq, 1, 0) == doctest::Approx(0.75));

    const double bad[] = {0.5, 0.6, 1.0, 0.0};
    ranopt_matrix* reject = nullptr;
    CHECK(ranopt_matrix_create(2, bad, &reject) == RANOPT_ERR_ROW_SUM_OUT_OF_TOLERANCE);
    CHECK(std::string(ranopt_last_error()).find("row") != std::string::npos);

    std::string json;
    {
        char* text = nullptr;
        REQUIRE(ranopt_matrix_to_json(a, &text) == RANOPT_OK);
        json = take_string(text);
    }
    ranopt_matrix* back = nullptr;
    REQUIRE(ranopt_matrix_from_json(json.c_str(), &back) == RANOPT_OK);
    CHECK(ranopt_matrix_get(back, 0, 0) == 1.0);

    char* csv = nullptr;
    REQUIRE(ranopt_matrix_to_csv(a, &csv) == RANOPT_OK);
    CHECK(take_string(csv).rfind("row,col,value\n", 0) == 0);

    ranopt_matrix_free(a);
    ranopt_matrix_free(sq);
    ranopt_matrix_free(back);
}

TEST_CASE("c api: states and application") {
    const double xs[] = {2.0, 0.0};
    ranopt_state* x = nullptr;
    REQUIRE(ranopt_state_create(2, 1, xs, &x) == RANOPT_OK);
    CHECK(ranopt_state_agents(x) == 2);
    CHECK(ranopt_state_diameter(x) == doctest::Approx(2.0));

    const double entries[] = {1.0, 0.0, 0.5, 0.5};
    ranopt_matrix* a = nullptr;
    REQUIRE(ranopt_matrix_create(2, entries, &a) == RANOPT_OK);
    ranopt_state* y = nullptr;
    REQUIRE(ranopt_matrix_apply(a, x, &y) == RANOPT_OK);
    CHECK(ranopt_state_get(y, 1, 0) == doctest::Approx(1.0));

    char* json = nullptr;
    REQUIRE(ranopt_state_to_json(x, &json) == RANOPT_OK);
    ranopt_state* back = nullptr;
    REQUIRE(ranopt_state_from_json(json, &back) == RANOPT_OK);
    CHECK(ranopt_state_get(back, 0, 0) == 2.0);
    ranopt_string_free(json);
    ranopt_state_free(back);

    ranopt_state_free(x);
    ranopt_state_free(y);
    ranopt_matrix_free(a);
}

TEST_CASE("c api: threshold graphs and reachability") {
    const double entries[] = {0.6, 0.4, 0.4, 0.6};
    ranopt_matrix* a = nullptr;
    REQUIRE(ranopt_matrix_create(2, entries, &a) == RANOPT_OK);

    ranopt_graph* g = nullptr;
    REQUIRE(ranopt_graph_of(a, 0.5, &g) == RANOPT_OK);
    CHECK(ranopt_graph_edge_count(g) == 2); // diagonals only
    CHECK(ranopt_graph_has_edge(g, 0, 0) == 1);
    CHECK(ranopt_graph_has_spanning_rooted_tree(g) == 0);

    ranopt_graph* h = nullptr;
    REQUIRE(ranopt_graph_of(a, 0.3, &h) == RANOPT_OK);
    CHECK(ranopt_graph_has_spanning_rooted_tree(h) == 1);

    ranopt_graph* u = nullptr;
    REQUIRE(ranopt_graph_union(g, h, &u) == RANOPT_OK);
    CHECK(ranopt_graph_edge_count(u) == 4);

    ranopt_graph* bad = nullptr;
    CHECK(ranopt_graph_of(a, 1.5, &bad) == RANOPT_ERR_GAMMA_OUT_OF_RANGE);

    ranopt_graph_free(g);
    ranopt_graph_free(h);
    ranopt_graph_free(u);
    ranopt_matrix_free(a);
}

TEST_CASE("c api: chains step and verify") {
    const char* config =
        R"({"type":"token","graph":{"n":5,"edges":[[0,1],[1,2],[2,3],[3,4],[4,0]]}})";
    ranopt_chain* chain = nullptr;
    REQUIRE(ranopt_chain_create(config, 7, &chain) == RANOPT_OK);
    CHECK(ranopt_chain_agents(chain) == 5);
    CHECK(ranopt_chain_time(chain) == 1);

    int64_t t = 0;
    ranopt_matrix* w = nullptr;
    ranopt_matrix* cond = nullptr;
    REQUIRE(ranopt_chain_step(chain, &t, &w, &cond) == RANOPT_OK);
    CHECK(t == 2);
    REQUIRE(w != nullptr);
    REQUIRE(cond != nullptr); // token chain has the analytic V(h)
    CHECK(ranopt_matrix_diam(w) <= 1.0);
    ranopt_matrix_free(w);
    ranopt_matrix_free(cond);
    ranopt_chain_free(chain);

    char* report = nullptr;
    REQUIRE(ranopt_verify_assumptions(config, 1, 5, 0.01, 50, 5, &report) == RANOPT_OK);
    CHECK(take_string(report).find("\"pass\": true") != std::string::npos);

    ranopt_chain* nope = nullptr;
    CHECK(ranopt_chain_create("{\"type\":\"nope\"}", 1, &nope) == RANOPT_ERR_CONFIG);
}

TEST_CASE("c api: command exit codes") {
    std::string out =
        (fs::temp_directory_path() / "ranopt_capi_cmd").string();
    fs::remove_all(out);
    const char* config =
        R"({"chain":{"type":"token","graph":{"n":5,"edges":[[0,1],[1,2],[2,3],[3,4],[4,0]]},
                     "B":5,"gamma":0.01},"horizon":50,"trials":5})";
    CHECK(ranopt_cmd_verify_chain(config, out.c_str(), 0, 0) == 0);
    CHECK(fs::exists(fs::path(out) / "assumptions.json"));

    const char* identity =
        R"({"chain":{"type":"static","matrix":[[1,0],[0,1]]},"horizon":4,"trials":2})";
    CHECK(ranopt_cmd_verify_chain(identity, out.c_str(), 0, 0) == 1);

    CHECK(ranopt_cmd_verify_chain("{", out.c_str(), 0, 0) == 2);
    CHECK(ranopt_cmd_consensus("{\"oops\":1}", out.c_str(), 0, 0) == 2);
    CHECK(ranopt_cmd_optimize("[]", out.c_str(), 0, 0) == 2);
    CHECK(ranopt_cmd_estimate_rate("{}", out.c_str(), 0, 0) == 2);
    CHECK(ranopt_cmd_verify_chain(nullptr, out.c_str(), 0, 0) == 2);
}
