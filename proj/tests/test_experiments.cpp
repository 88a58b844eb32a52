#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ranopt/experiments.hpp"

using namespace ranopt;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("ranopt_test_" + name);
    fs::remove_all(dir);
    return dir;
}

const char* kTokenC5Chain =
    R"({"type":"token","graph":{"n":5,"edges":[[0,1],[1,2],[2,3],[3,4],[4,0]]},"seed":1,"gamma":0.01,"B":5})";

std::string median_config(std::int64_t T, const std::string& seeds) {
    std::ostringstream cfg;
    cfg << R"({"chain":)" << kTokenC5Chain
        << R"(,"objectives":[{"type":"abs","a":[-2]},{"type":"abs","a":[-1]},)"
        << R"({"type":"abs","a":[0]},{"type":"abs","a":[1]},{"type":"abs","a":[2]}],)"
        << R"("schedule":{"K":1.0,"beta":0.75},"T":)" << T << R"(,"seeds":)" << seeds
        << R"(,"x0":[[-2],[-1],[0],[1],[2]],)"
        << R"("success":{"x_tol":0.1,"f_tol":0.2,"min_seeds":2}})";
    return cfg.str();
}

} // namespace

TEST_CASE("chain config parsing") {
    ChainConfig cfg = parse_chain_config(kTokenC5Chain);
    CHECK(cfg.n() == 5);
    CHECK(cfg.B == 5);
    CHECK(cfg.gamma == 0.01);
    auto gen = cfg.instantiate(3);
    CHECK(gen->n() == 5);

    CHECK_THROWS_AS(parse_chain_config("{}"), Error);
    CHECK_THROWS_AS(parse_chain_config(R"({"type":"warp"})"), Error);
    CHECK_THROWS_AS(parse_chain_config(R"({"type":"token"})"), Error);
    CHECK_THROWS_AS(
        parse_chain_config(
            R"({"type":"token","graph":{"n":2,"edges":[[0,1]]},"surprise":1})"),
        Error);
    try {
        parse_chain_config(R"({"type":"static","matrix":[[1,0],[0,1]],"zzz":0})");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
    }
}

TEST_CASE("make_chain builds generators from JSON") {
    auto gossip = make_chain(
        R"({"type":"gossip","graph":{"n":3,"edges":[[0,1],[1,2],[2,0]]}})", 5);
    CHECK(gossip->n() == 3);
    CHECK(gossip->step().W.is_doubly_stochastic());

    auto fixture = make_chain(
        R"({"type":"negative_control","matrix":[[1.0,0.0],[0.5,0.5]]})", 1);
    CHECK(fixture->step().cond_exp.has_value());
}

TEST_CASE("cmd_verify_chain exit codes and report") {
    fs::path out = fresh_dir("verify");
    std::string config = std::string(R"({"chain":)") + kTokenC5Chain +
                         R"(,"horizon":50,"trials":5})";
    CommandResult ok = cmd_verify_chain(config, out.string(), 0, 0);
    CHECK(ok.exit_code == 0);
    std::string report = slurp(out / "assumptions.json");
    CHECK(report.find("\"pass\": true") != std::string::npos);
    CHECK(fs::exists(out / "run_meta.json"));

    std::string identity_cfg =
        R"({"chain":{"type":"static","matrix":[[1,0],[0,1]]},"horizon":4,"trials":2})";
    CHECK(cmd_verify_chain(identity_cfg, fresh_dir("verify_id").string(), 0, 0).exit_code ==
          1);

    CHECK(cmd_verify_chain("{not json", out.string(), 0, 0).exit_code == 2);
    CHECK(cmd_verify_chain(R"({"chain":{"type":"token"}})", out.string(), 0, 0).exit_code ==
          2);
    std::string unknown = std::string(R"({"chain":)") + kTokenC5Chain + R"(,"blip":1})";
    CHECK(cmd_verify_chain(unknown, out.string(), 0, 0).exit_code == 2);
}

TEST_CASE("cmd_consensus writes summaries and pooled series") {
    fs::path out = fresh_dir("consensus");
    // identical rows, so one application lands every agent on the same value
    std::string config =
        R"({"chain":{"type":"static","matrix":[[0.3333333333333333,0.3333333333333333,0.3333333333333333],
                                               [0.3333333333333333,0.3333333333333333,0.3333333333333333],
                                               [0.3333333333333333,0.3333333333333333,0.3333333333333333]]},
            "T":10,"seeds":[1],"m":1})";
    CommandResult res = cmd_consensus(config, out.string(), 0, 0);
    CHECK(res.exit_code == 0);

    std::string summary = slurp(out / "seed_1_summary.csv");
    CHECK(summary.rfind("t,d_x,alpha\n", 0) == 0);
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 12); // header + 11 states
    // the averaging chain reaches consensus after one step
    CHECK(summary.find("\n2,0,") != std::string::npos);
    CHECK(slurp(out / "mean_diameter.csv").rfind("t,value,se\n", 0) == 0);

    // objectives are not a consensus key
    std::string with_obj =
        R"({"chain":{"type":"static","matrix":[[1]]},"T":5,"seeds":[1],
            "objectives":[{"type":"abs","a":[0]}]})";
    CHECK(cmd_consensus(with_obj, out.string(), 0, 0).exit_code == 2);
}

TEST_CASE("cmd_consensus token chain diameters are positive and non-increasing") {
    fs::path out = fresh_dir("consensus_token");
    std::string config = std::string(R"({"chain":)") + kTokenC5Chain +
                         R"(,"T":50,"seeds":[3],"m":1,"audits":{"write_states":true}})";
    CHECK(cmd_consensus(config, out.string(), 0, 0).exit_code == 0);
    std::istringstream summary(slurp(out / "seed_3_summary.csv"));
    std::string line;
    std::getline(summary, line); // header
    double prev = std::numeric_limits<double>::infinity();
    while (std::getline(summary, line)) {
        size_t c1 = line.find(',');
        size_t c2 = line.find(',', c1 + 1);
        double d = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        CHECK(d > 0.0);
        CHECK(d <= prev + 1e-12);
        prev = d;
    }
    std::string states = slurp(out / "seed_3_trajectory.csv");
    CHECK(states.rfind("t,agent,coord,value\n", 0) == 0);
}

TEST_CASE("cmd_optimize median experiment") {
    fs::path out = fresh_dir("optimize");
    CommandResult res = cmd_optimize(median_config(3000, "[1,2,3]"), out.string(), 0, 0);
    CHECK(res.exit_code == 0);
    std::string summary = slurp(out / "summary.json");
    CHECK(summary.find("\"pass\": true") != std::string::npos);
    CHECK(summary.find("\"F_star\": 6.0") != std::string::npos);
    std::string seed_csv = slurp(out / "seed_1_summary.csv");
    CHECK(seed_csv.rfind("t,d_x,f_gap,alpha,dist_to_opt\n", 0) == 0);

    // T = 0 still yields the initial-state row
    fs::path out0 = fresh_dir("optimize_t0");
    CHECK(cmd_optimize(median_config(0, "[1]"), out0.string(), 0, 0).exit_code == 1);
    std::string initial = slurp(out0 / "seed_1_summary.csv");
    CHECK(std::count(initial.begin(), initial.end(), '\n') == 2);

    // wrong objective count
    std::string bad =
        std::string(R"({"chain":)") + kTokenC5Chain +
        R"(,"objectives":[{"type":"abs","a":[0]}],"schedule":{"K":1,"beta":0.75},
           "T":10,"seeds":[1]})";
    CHECK(cmd_optimize(bad, out.string(), 0, 0).exit_code == 2);
}

TEST_CASE("cmd_optimize trials override truncates the seed list") {
    fs::path out = fresh_dir("optimize_trunc");
    CHECK(cmd_optimize(median_config(500, "[1,2,3]"), out.string(), 2, 0).exit_code == 1);
    CHECK(fs::exists(out / "seed_1_summary.csv"));
    CHECK(fs::exists(out / "seed_2_summary.csv"));
    CHECK_FALSE(fs::exists(out / "seed_3_summary.csv"));
    CHECK(cmd_optimize(median_config(500, "[1,2]"), out.string(), 9, 0).exit_code == 2);
}

TEST_CASE("cmd_optimize reruns are byte-identical") {
    fs::path a = fresh_dir("optimize_a"), b = fresh_dir("optimize_b");
    std::string config = median_config(800, "[5,6]");
    CHECK(cmd_optimize(config, a.string(), 0, 0).exit_code == cmd_optimize(config, b.string(), 0, 0).exit_code);
    for (const char* name : {"seed_5_summary.csv", "seed_6_summary.csv", "summary.json"})
        CHECK(slurp(a / name) == slurp(b / name));

    // a seed offset changes the sampled paths
    fs::path c = fresh_dir("optimize_c");
    cmd_optimize(config, c.string(), 0, 1000);
    CHECK(slurp(a / "seed_5_summary.csv") != slurp(c / "seed_5_summary.csv"));
}

TEST_CASE("cmd_estimate_rate") {
    fs::path out = fresh_dir("rate");
    std::string config = std::string(R"({"chain":)") + kTokenC5Chain +
                         R"(,"t_max":80,"trials":40,"windows":[[1,30],[15,45]]})";
    CommandResult res = cmd_estimate_rate(config, out.string(), 0, 0);
    CHECK(res.exit_code == 0);
    std::string decay = slurp(out / "decay.json");
    CHECK(decay.find("fitted_lambda") != std::string::npos);
    CHECK(slurp(out / "mean_diam.csv").rfind("t,value,se\n", 0) == 0);
    CHECK(slurp(out / "joint.json").find("within_3se") != std::string::npos);

    std::string degenerate =
        R"({"chain":{"type":"static","matrix":[[1,0],[0,1]]},"t_max":40,"trials":30})";
    CHECK(cmd_estimate_rate(degenerate, fresh_dir("rate_deg").string(), 0, 0).exit_code ==
          1);

    std::string too_few = std::string(R"({"chain":)") + kTokenC5Chain +
                          R"(,"t_max":40,"trials":5})";
    CHECK(cmd_estimate_rate(too_few, fresh_dir("rate_few").string(), 0, 0).exit_code == 2);
}
