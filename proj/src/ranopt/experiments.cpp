#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "diagnostics.hpp"
#include "dynamics.hpp"
#include "solver.hpp"
#include "util.hpp"

namespace ranopt {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, std::initializer_list<const char*> allowed,
                 const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = std::any_of(allowed.begin(), allowed.end(),
                                 [&](const char* k) { return it.key() == k; });
        if (!known)
            fail(ErrorCode::ConfigError,
                 std::string("unknown key \"") + it.key() + "\" in " + where);
    }
}

json parse_object(const std::string& text, const char* what) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::ConfigError, std::string(what) + " must be an object");
    return j;
}

template <typename T>
T require(const json& obj, const char* key, const char* where) {
    if (!obj.contains(key))
        fail(ErrorCode::ConfigError,
             std::string("missing key \"") + key + "\" in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::ConfigError, std::string("bad value for \"") + key + "\" in " + where);
    }
}

template <typename T>
T optional_or(const json& obj, const char* key, T fallback, const char* where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::ConfigError, std::string("bad value for \"") + key + "\" in " + where);
    }
}

UndirectedGraph parse_graph(const json& g) {
    if (!g.is_object()) fail(ErrorCode::ConfigError, "\"graph\" must be an object");
    expect_keys(g, {"n", "edges"}, "graph");
    int n = require<int>(g, "n", "graph");
    auto edge_rows = require<std::vector<std::vector<int>>>(g, "edges", "graph");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : edge_rows) {
        if (e.size() != 2) fail(ErrorCode::ConfigError, "each edge must be a pair");
        edges.emplace_back(e[0], e[1]);
    }
    return UndirectedGraph(n, std::move(edges));
}

StochasticMatrix parse_matrix(const json& rows, const char* where) {
    std::vector<std::vector<double>> entries;
    try {
        entries = rows.get<std::vector<std::vector<double>>>();
    } catch (const json::exception&) {
        fail(ErrorCode::ConfigError, std::string("bad matrix in ") + where);
    }
    return StochasticMatrix::make(entries);
}

ChainConfig parse_chain_section(const json& c) {
    if (!c.is_object()) fail(ErrorCode::ConfigError, "\"chain\" must be an object");
    expect_keys(c, {"type", "graph", "holder", "matrix", "base", "p", "seed", "gamma", "B"},
                "chain");
    ChainConfig cfg;
    std::string type = require<std::string>(c, "type", "chain");
    cfg.seed = optional_or<std::uint64_t>(c, "seed", 0, "chain");
    cfg.gamma = optional_or<double>(c, "gamma", 0.01, "chain");
    cfg.B = optional_or<int>(c, "B", 1, "chain");

    if (type == "token" || type == "gossip") {
        if (!c.contains("graph"))
            fail(ErrorCode::ConfigError, type + " chain needs a \"graph\"");
        cfg.graph = parse_graph(c.at("graph"));
        cfg.holder = optional_or<int>(c, "holder", 0, "chain");
        cfg.type = type == "token" ? ChainConfig::Type::Token : ChainConfig::Type::Gossip;
    } else if (type == "link_failure") {
        if (!c.contains("base"))
            fail(ErrorCode::ConfigError, "link_failure chain needs \"base\" matrices");
        for (const auto& rows : c.at("base")) cfg.base.push_back(parse_matrix(rows, "base"));
        cfg.p = require<double>(c, "p", "chain");
        cfg.type = ChainConfig::Type::LinkFailure;
    } else if (type == "static" || type == "negative_control") {
        if (!c.contains("matrix"))
            fail(ErrorCode::ConfigError, type + " chain needs a \"matrix\"");
        cfg.matrix = parse_matrix(c.at("matrix"), "chain");
        cfg.type = type == "static" ? ChainConfig::Type::Static
                                    : ChainConfig::Type::NegativeControl;
    } else {
        fail(ErrorCode::ConfigError, "unknown chain type \"" + type + "\"");
    }
    return cfg;
}

std::vector<Objective> parse_objectives(const json& arr) {
    if (!arr.is_array() || arr.empty())
        fail(ErrorCode::ConfigError, "\"objectives\" must be a non-empty array");
    std::vector<Objective> out;
    for (const auto& o : arr) {
        if (!o.is_object()) fail(ErrorCode::ConfigError, "objective must be an object");
        std::string type = require<std::string>(o, "type", "objective");
        if (type == "abs") {
            expect_keys(o, {"type", "a"}, "objective");
            out.push_back(abs_deviation(require<std::vector<double>>(o, "a", "objective")));
        } else if (type == "huber") {
            expect_keys(o, {"type", "a", "delta"}, "objective");
            out.push_back(huber(require<std::vector<double>>(o, "a", "objective"),
                                require<double>(o, "delta", "objective")));
        } else if (type == "max_affine") {
            expect_keys(o, {"type", "slopes", "offsets"}, "objective");
            out.push_back(max_affine(
                require<std::vector<std::vector<double>>>(o, "slopes", "objective"),
                require<std::vector<double>>(o, "offsets", "objective")));
        } else {
            fail(ErrorCode::ConfigError, "unknown objective type \"" + type + "\"");
        }
    }
    return out;
}

StepSchedule parse_schedule(const json& s) {
    if (!s.is_object()) fail(ErrorCode::ConfigError, "\"schedule\" must be an object");
    expect_keys(s, {"K", "beta", "t0"}, "schedule");
    return make_schedule(require<double>(s, "K", "schedule"),
                         require<double>(s, "beta", "schedule"),
                         optional_or<std::int64_t>(s, "t0", 1, "schedule"));
}

StateBlock parse_x0(const json& cfg, int n, int m) {
    if (!cfg.contains("x0") || (cfg.at("x0").is_string() && cfg.at("x0") == "spread"))
        return StateBlock::spread(n, m);
    const json& x0 = cfg.at("x0");
    std::vector<double> flat;
    if (x0.is_array() && !x0.empty() && x0.at(0).is_array()) {
        for (const auto& row : x0)
            for (const auto& v : row) flat.push_back(v.get<double>());
    } else if (x0.is_array()) {
        for (const auto& v : x0) flat.push_back(v.get<double>());
    } else {
        fail(ErrorCode::ConfigError, "\"x0\" must be \"spread\" or an array");
    }
    if (flat.size() != static_cast<size_t>(n) * m)
        fail(ErrorCode::ConfigError, "\"x0\" does not match (n, m)");
    return StateBlock(n, m, std::move(flat));
}

struct AuditToggles {
    bool write_states = false;
    std::optional<double> rate_beta;
};

AuditToggles parse_audits(const json& cfg) {
    AuditToggles toggles;
    if (!cfg.contains("audits")) return toggles;
    const json& a = cfg.at("audits");
    expect_keys(a, {"write_states", "rate_beta"}, "audits");
    toggles.write_states = optional_or<bool>(a, "write_states", false, "audits");
    if (a.contains("rate_beta"))
        toggles.rate_beta = require<double>(a, "rate_beta", "audits");
    return toggles;
}

std::vector<std::uint64_t> parse_seeds(const json& cfg, int trials_override) {
    auto seeds = require<std::vector<std::uint64_t>>(cfg, "seeds", "config");
    if (seeds.empty()) fail(ErrorCode::ConfigError, "\"seeds\" must be non-empty");
    if (trials_override > 0) {
        if (static_cast<size_t>(trials_override) > seeds.size())
            fail(ErrorCode::ConfigError, "--trials exceeds the configured seed list");
        seeds.resize(static_cast<size_t>(trials_override));
    }
    return seeds;
}

std::string trajectory_states_csv(const Trajectory& traj) {
    std::string out = "t,agent,coord,value\n";
    for (size_t k = 0; k < traj.states.size(); ++k) {
        const StateBlock& x = traj.states[k];
        std::int64_t t = traj.t0 + static_cast<std::int64_t>(k);
        for (int i = 0; i < x.agents(); ++i)
            for (int c = 0; c < x.dim(); ++c)
                out += std::to_string(t) + "," + std::to_string(i) + "," +
                       std::to_string(c) + "," + format_real(x(i, c)) + "\n";
    }
    return out;
}

json quantiles(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        size_t idx = static_cast<size_t>(
            std::llround(q * static_cast<double>(values.size() - 1)));
        return values[idx];
    };
    return json{{"q0", at(0.0)}, {"q25", at(0.25)}, {"q50", at(0.5)},
                {"q75", at(0.75)}, {"q100", at(1.0)}};
}

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_run_meta(const std::string& out_dir, const char* command, int trials_override,
                    std::uint64_t seed_offset, const json& extra = json::object()) {
    json meta{{"command", command},
              {"timestamp_utc", iso_timestamp()},
              {"trials_override", trials_override},
              {"seed_offset", seed_offset}};
    for (const auto& [key, value] : extra.items()) meta[key] = value;
    atomic_write(out_dir + "/run_meta.json", meta.dump(2) + "\n");
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create output directory " + out_dir);
}

CommandResult config_failure(const Error& e) {
    return {2, e.what()};
}

} // namespace

void atomic_write(const std::string& path, const std::string& content) {
    static std::atomic<unsigned> counter{0};
    std::string tmp = path + ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, "cannot open " + tmp + " for writing");
        out << content;
        if (!out.good()) fail(ErrorCode::IoError, "short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::IoError, "cannot rename " + tmp + " to " + path);
}

int ChainConfig::n() const {
    switch (type) {
        case Type::Token:
        case Type::Gossip:
            return graph->vertices();
        case Type::LinkFailure:
            return base[0].dim();
        case Type::Static:
        case Type::NegativeControl:
            return matrix->dim();
    }
    return 0;
}

std::unique_ptr<ChainGenerator> ChainConfig::instantiate(std::uint64_t seed_value,
                                                         std::int64_t t0) const {
    switch (type) {
        case Type::Token:
            return token_chain(*graph, seed_value, holder, t0);
        case Type::Gossip:
            return pairwise_gossip_chain(*graph, seed_value, t0);
        case Type::LinkFailure:
            return link_failure_chain(base, p, seed_value, t0);
        case Type::Static:
            return static_chain(*matrix, t0);
        case Type::NegativeControl:
            return negative_control_chain(*matrix, t0);
    }
    fail(ErrorCode::ConfigError, "unreachable chain type");
}

ChainFactory ChainConfig::factory(std::int64_t t0) const {
    ChainConfig copy = *this;
    return [copy, t0](std::uint64_t seed_value) { return copy.instantiate(seed_value, t0); };
}

ChainConfig parse_chain_config(const std::string& json_text) {
    return parse_chain_section(parse_object(json_text, "chain config"));
}

std::unique_ptr<ChainGenerator> make_chain(const std::string& config_json,
                                           std::uint64_t seed, std::int64_t t0) {
    return parse_chain_config(config_json).instantiate(seed, t0);
}

CommandResult cmd_verify_chain(const std::string& config_json, const std::string& out_dir,
                               int trials_override, std::uint64_t seed_offset) {
    try {
        json cfg = parse_object(config_json, "config");
        expect_keys(cfg, {"chain", "horizon", "trials"}, "config");
        ChainConfig chain = parse_chain_section(require<json>(cfg, "chain", "config"));
        std::int64_t horizon =
            optional_or<std::int64_t>(cfg, "horizon", 10LL * chain.B, "config");
        int trials = trials_override > 0
                         ? trials_override
                         : optional_or<int>(cfg, "trials", 20, "config");

        ensure_out_dir(out_dir);
        AssumptionReport report = verify_assumptions(
            chain.factory(), chain.seed + seed_offset, chain.B, chain.gamma, horizon, trials);
        atomic_write(out_dir + "/assumptions.json", report.to_json() + "\n");
        write_run_meta(out_dir, "verify-chain", trials_override, seed_offset,
                       json{{"chain", cfg.at("chain")},
                            {"B", chain.B},
                            {"gamma", chain.gamma},
                            {"horizon", horizon},
                            {"trials", trials}});
        if (report.pass()) return {0, "assumptions hold"};
        return {1, "assumption check failed; see " + out_dir + "/assumptions.json"};
    } catch (const Error& e) {
        return config_failure(e);
    }
}

CommandResult cmd_consensus(const std::string& config_json, const std::string& out_dir,
                            int trials_override, std::uint64_t seed_offset) {
    try {
        json cfg = parse_object(config_json, "config");
        expect_keys(cfg, {"chain", "T", "seeds", "x0", "m", "audits"}, "config");
        ChainConfig chain = parse_chain_section(require<json>(cfg, "chain", "config"));
        std::int64_t T = require<std::int64_t>(cfg, "T", "config");
        if (T < 0) fail(ErrorCode::ConfigError, "\"T\" must be >= 0");
        auto seeds = parse_seeds(cfg, trials_override);
        int m = optional_or<int>(cfg, "m", 1, "config");
        AuditToggles toggles = parse_audits(cfg);
        StateBlock x0 = parse_x0(cfg, chain.n(), m);

        struct SeedOutput {
            std::string summary_csv;
            std::string states_csv;
            std::vector<double> diameters;
        };
        auto outputs = parallel_trials(static_cast<int>(seeds.size()), [&](int i) {
            auto gen = chain.instantiate(seeds[static_cast<size_t>(i)] + seed_offset);
            Trajectory traj = run_autonomous(*gen, x0, T);
            SeedOutput out;
            out.summary_csv = "t,d_x,alpha\n";
            for (size_t k = 0; k < traj.diameters.size(); ++k)
                out.summary_csv += std::to_string(traj.t0 + static_cast<std::int64_t>(k)) +
                                   "," + format_real(traj.diameters[k]) + ",\n";
            if (toggles.write_states) out.states_csv = trajectory_states_csv(traj);
            out.diameters = std::move(traj.diameters);
            return out;
        });

        ensure_out_dir(out_dir);
        std::vector<double> pooled_mean, pooled_se, column(seeds.size());
        for (size_t k = 0; k < outputs[0].diameters.size(); ++k) {
            for (size_t s = 0; s < seeds.size(); ++s) column[s] = outputs[s].diameters[k];
            MeanSe ms = mean_se(column);
            pooled_mean.push_back(ms.mean);
            pooled_se.push_back(ms.se);
        }
        for (size_t s = 0; s < seeds.size(); ++s) {
            std::string stem = out_dir + "/seed_" + std::to_string(seeds[s]);
            atomic_write(stem + "_summary.csv", outputs[s].summary_csv);
            if (toggles.write_states)
                atomic_write(stem + "_trajectory.csv", outputs[s].states_csv);
        }
        atomic_write(out_dir + "/mean_diameter.csv", series_to_csv(pooled_mean, pooled_se, 1));
        write_run_meta(out_dir, "consensus", trials_override, seed_offset,
                       json{{"chain", cfg.at("chain")},
                            {"seeds", seeds},
                            {"policy", "autonomous"},
                            {"T", T}});
        return {0, "wrote " + std::to_string(seeds.size()) + " consensus runs"};
    } catch (const Error& e) {
        return config_failure(e);
    }
}

CommandResult cmd_optimize(const std::string& config_json, const std::string& out_dir,
                           int trials_override, std::uint64_t seed_offset) {
    try {
        json cfg = parse_object(config_json, "config");
        expect_keys(cfg,
                    {"chain", "objectives", "schedule", "T", "seeds", "x0", "oracle",
                     "success", "audits"},
                    "config");
        ChainConfig chain = parse_chain_section(require<json>(cfg, "chain", "config"));
        std::vector<Objective> objectives =
            parse_objectives(require<json>(cfg, "objectives", "config"));
        if (static_cast<int>(objectives.size()) != chain.n())
            fail(ErrorCode::ConfigError, "need exactly one objective per agent");
        StepSchedule sched = parse_schedule(require<json>(cfg, "schedule", "config"));
        std::int64_t T = require<std::int64_t>(cfg, "T", "config");
        if (T < 0) fail(ErrorCode::ConfigError, "\"T\" must be >= 0");
        auto seeds = parse_seeds(cfg, trials_override);
        AuditToggles toggles = parse_audits(cfg);
        int m = objectives[0].dim;
        for (const auto& f : objectives)
            if (f.dim != m) fail(ErrorCode::ConfigError, "objective dimensions differ");
        StateBlock x0 = parse_x0(cfg, chain.n(), m);

        OracleResult oracle;
        if (cfg.contains("oracle")) {
            const json& o = cfg.at("oracle");
            expect_keys(o, {"box", "grid"}, "oracle");
            const json& b = require<json>(o, "box", "oracle");
            expect_keys(b, {"lo", "hi"}, "box");
            Box box{require<std::vector<double>>(b, "lo", "box"),
                    require<std::vector<double>>(b, "hi", "box")};
            oracle = optimal_oracle(objectives, box, require<int>(o, "grid", "oracle"));
        } else {
            oracle = optimal_oracle(objectives); // analytic (all-abs) path
        }

        auto dist_to_opt = [&](std::span<const double> z) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& zstar : oracle.minimizers)
                best = std::min(best, linf_dist(z, zstar));
            return best;
        };

        struct SeedOutput {
            std::string summary_csv;
            std::string states_csv;
            double final_f_gap = 0.0;
            double final_max_dist = 0.0;
            double rate_ratio = std::numeric_limits<double>::quiet_NaN();
        };
        auto outputs = parallel_trials(static_cast<int>(seeds.size()), [&](int i) {
            auto gen = chain.instantiate(seeds[static_cast<size_t>(i)] + seed_offset, sched.t0);
            OptRun run =
                solve_distributed(*gen, objectives, sched, x0, T, {}, oracle.F_star);
            SeedOutput out;
            out.summary_csv.reserve(run.traj.diameters.size() * 64);
            out.summary_csv = "t,d_x,f_gap,alpha,dist_to_opt\n";
            for (size_t k = 0; k < run.traj.diameters.size(); ++k) {
                out.summary_csv += std::to_string(run.t0() + static_cast<std::int64_t>(k));
                out.summary_csv += ",";
                out.summary_csv += format_real(run.traj.diameters[k]);
                out.summary_csv += ",";
                out.summary_csv += format_real(run.f_gap[k]);
                out.summary_csv += ",";
                out.summary_csv += format_real(run.alpha[k]);
                out.summary_csv += ",";
                out.summary_csv += format_real(dist_to_opt(run.xbar[k]));
                out.summary_csv += "\n";
            }
            if (toggles.write_states) out.states_csv = trajectory_states_csv(run.traj);
            out.final_f_gap = run.f_gap.back();
            const StateBlock& last = run.traj.states.back();
            for (int agent = 0; agent < last.agents(); ++agent)
                out.final_max_dist =
                    std::max(out.final_max_dist, dist_to_opt(last.agent_row(agent)));
            if (toggles.rate_beta)
                out.rate_ratio = consensus_rate_stats(run.traj, *toggles.rate_beta).ratio;
            return out;
        });

        ensure_out_dir(out_dir);
        json per_seed = json::array();
        std::vector<double> gaps, dists;
        int passed = 0;
        bool have_success = cfg.contains("success");
        double x_tol = 0.0, f_tol = 0.0;
        int min_seeds = 0;
        if (have_success) {
            const json& s = cfg.at("success");
            expect_keys(s, {"x_tol", "f_tol", "min_seeds"}, "success");
            x_tol = require<double>(s, "x_tol", "success");
            f_tol = require<double>(s, "f_tol", "success");
            min_seeds = require<int>(s, "min_seeds", "success");
        }
        for (size_t s = 0; s < seeds.size(); ++s) {
            std::string stem = out_dir + "/seed_" + std::to_string(seeds[s]);
            atomic_write(stem + "_summary.csv", outputs[s].summary_csv);
            if (toggles.write_states)
                atomic_write(stem + "_trajectory.csv", outputs[s].states_csv);
            gaps.push_back(outputs[s].final_f_gap);
            dists.push_back(outputs[s].final_max_dist);
            json row{{"seed", seeds[s]},
                     {"final_f_gap", outputs[s].final_f_gap},
                     {"final_max_dist", outputs[s].final_max_dist}};
            if (toggles.rate_beta) row["rate_ratio"] = outputs[s].rate_ratio;
            if (have_success) {
                bool ok = outputs[s].final_max_dist <= x_tol &&
                          outputs[s].final_f_gap <= f_tol;
                row["pass"] = ok;
                if (ok) ++passed;
            }
            per_seed.push_back(row);
        }
        json summary{{"F_star", oracle.F_star},
                     {"oracle_exact", oracle.exact},
                     {"oracle_error_bound", oracle.error_bound},
                     {"final_f_gap", quantiles(gaps)},
                     {"final_max_dist", quantiles(dists)},
                     {"per_seed", per_seed}};
        bool pass = true;
        if (have_success) {
            pass = passed >= min_seeds;
            summary["seeds_passed"] = passed;
            summary["pass"] = pass;
        }
        atomic_write(out_dir + "/summary.json", summary.dump(2) + "\n");
        write_run_meta(out_dir, "optimize", trials_override, seed_offset,
                       json{{"chain", cfg.at("chain")},
                            {"seeds", seeds},
                            {"policy", "subgradient"},
                            {"schedule", cfg.at("schedule")},
                            {"T", T}});
        if (!pass)
            return {1, "convergence criterion failed; see " + out_dir + "/summary.json"};
        return {0, "wrote " + std::to_string(seeds.size()) + " solver runs"};
    } catch (const Error& e) {
        return config_failure(e);
    }
}

CommandResult cmd_estimate_rate(const std::string& config_json, const std::string& out_dir,
                                int trials_override, std::uint64_t seed_offset) {
    try {
        json cfg = parse_object(config_json, "config");
        expect_keys(cfg, {"chain", "t_max", "trials", "windows"}, "config");
        ChainConfig chain = parse_chain_section(require<json>(cfg, "chain", "config"));
        std::int64_t t_max = require<std::int64_t>(cfg, "t_max", "config");
        int trials = trials_override > 0 ? trials_override
                                         : optional_or<int>(cfg, "trials", 100, "config");

        DecayEstimate est;
        try {
            est = estimate_diam_decay(chain.factory(), chain.seed + seed_offset, t_max,
                                      trials);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::AllPathsDegenerate) {
                ensure_out_dir(out_dir);
                write_run_meta(out_dir, "estimate-rate", trials_override, seed_offset,
                               json{{"chain", cfg.at("chain")}, {"t_max", t_max},
                                    {"trials", trials}});
                return {1, e.what()};
            }
            throw;
        }

        ensure_out_dir(out_dir);
        atomic_write(out_dir + "/decay.json", est.to_json() + "\n");
        atomic_write(out_dir + "/mean_diam.csv", est.series_csv());

        if (cfg.contains("windows")) {
            auto windows =
                require<std::vector<std::vector<std::int64_t>>>(cfg, "windows", "config");
            if (windows.size() != 2 || windows[0].size() != 2 || windows[1].size() != 2)
                fail(ErrorCode::ConfigError, "\"windows\" must be two [tau, t] pairs");
            Window w1{windows[0][0], windows[0][1]};
            Window w2{windows[1][0], windows[1][1]};
            MeanSe joint = joint_diam_decay(chain.factory(), chain.seed + seed_offset + 1,
                                            w1, w2, trials);
            // Two-window envelope from the fitted single-window constants.
            double c_joint = std::max(est.c_tilde * est.c_tilde,
                                      est.c_tilde * est.c_tilde * est.c_tilde);
            double lam_joint = std::sqrt(est.fitted_lambda);
            double exponent =
                static_cast<double>((w1.second - w1.first) + (w2.second - w2.first));
            double envelope = c_joint * std::pow(lam_joint, exponent);
            json j{{"windows", windows},
                   {"mean", joint.mean},
                   {"se", joint.se},
                   {"envelope", envelope},
                   {"within_3se", joint.mean <= envelope + 3.0 * joint.se}};
            atomic_write(out_dir + "/joint.json", j.dump(2) + "\n");
        }
        write_run_meta(out_dir, "estimate-rate", trials_override, seed_offset,
                       json{{"chain", cfg.at("chain")}, {"t_max", t_max},
                            {"trials", trials}});
        return {0, "fitted lambda " + format_real(est.fitted_lambda)};
    } catch (const Error& e) {
        return config_failure(e);
    }
}

} // namespace ranopt
