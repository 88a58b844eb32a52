// ranopt command-line driver. Talks to the core exclusively through the
// C API in ranopt.h; all experiment behavior lives behind that boundary.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ranopt.h"

namespace {

int read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read config file " << path << "\n";
        return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    out = buf.str();
    return 0;
}

struct CommonArgs {
    std::string config;
    std::string out = ".";
    int trials = 0;
    std::uint64_t seed_offset = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "Experiment config JSON file")->required();
    cmd->add_option("--out", args.out, "Output directory");
    cmd->add_option("--trials", args.trials,
                    "Override the config's trial/seed count (0 = use config)");
    cmd->add_option("--seed-offset", args.seed_offset, "Added to every configured seed");
}

int dispatch(int (*fn)(const char*, const char*, int, uint64_t), const CommonArgs& args) {
    std::string config;
    if (int rc = read_file(args.config, config)) return rc;
    int rc = fn(config.c_str(), args.out.c_str(), args.trials, args.seed_offset);
    const char* msg = ranopt_last_error();
    if (msg && *msg) (rc == 0 ? std::cout : std::cerr) << msg << "\n";
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ranopt: distributed averaging and subgradient optimization "
                 "over random networks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ranopt_version());

    CommonArgs verify_args, consensus_args, optimize_args, rate_args;
    CLI::App* verify =
        app.add_subcommand("verify-chain", "Check the stochastic and connectivity "
                                           "assumptions of a chain config");
    add_common(verify, verify_args);
    CLI::App* consensus =
        app.add_subcommand("consensus", "Run autonomous averaging along sampled chains");
    add_common(consensus, consensus_args);
    CLI::App* optimize =
        app.add_subcommand("optimize", "Run the distributed subgradient solver");
    add_common(optimize, optimize_args);
    CLI::App* rate = app.add_subcommand(
        "estimate-rate", "Fit the geometric decay rate of E[diam(Phi(t, t0))]");
    add_common(rate, rate_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // usage errors follow the exit-code contract
    }

    if (verify->parsed()) return dispatch(ranopt_cmd_verify_chain, verify_args);
    if (consensus->parsed()) return dispatch(ranopt_cmd_consensus, consensus_args);
    if (optimize->parsed()) return dispatch(ranopt_cmd_optimize, optimize_args);
    if (rate->parsed()) return dispatch(ranopt_cmd_estimate_rate, rate_args);
    return 2;
}
