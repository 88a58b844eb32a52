#ifndef RANOPT_EXPERIMENTS_HPP
#define RANOPT_EXPERIMENTS_HPP

#include <cstdint>
#include <string>

#include "chains.hpp"

namespace ranopt {

/// Parsed `chain` section of an experiment config. Unknown keys are rejected
/// during parsing.
struct ChainConfig {
    enum class Type { Token, Gossip, LinkFailure, Static, NegativeControl };
    Type type = Type::Static;
    std::optional<UndirectedGraph> graph; // token, gossip
    int holder = 0;                       // token
    std::vector<StochasticMatrix> base;   // link_failure
    double p = 0.0;                       // link_failure
    std::optional<StochasticMatrix> matrix; // static, negative_control
    std::uint64_t seed = 0;               // base seed for single-path commands
    double gamma = 0.01;
    int B = 1;

    int n() const;
    std::unique_ptr<ChainGenerator> instantiate(std::uint64_t seed_value,
                                                std::int64_t t0 = 1) const;
    ChainFactory factory(std::int64_t t0 = 1) const;
};

ChainConfig parse_chain_config(const std::string& json_text);

/// Builds a generator straight from a `chain` config document.
std::unique_ptr<ChainGenerator> make_chain(const std::string& config_json,
                                           std::uint64_t seed, std::int64_t t0 = 1);

/// Outcome of one CLI command body. exit_code follows the CLI contract:
/// 0 success, 1 audit/assumption failure, 2 usage/config error.
struct CommandResult {
    int exit_code = 0;
    std::string message;
};

/// `trials_override` > 0 replaces the config's trial/seed count.
CommandResult cmd_verify_chain(const std::string& config_json, const std::string& out_dir,
                               int trials_override, std::uint64_t seed_offset);
CommandResult cmd_consensus(const std::string& config_json, const std::string& out_dir,
                            int trials_override, std::uint64_t seed_offset);
CommandResult cmd_optimize(const std::string& config_json, const std::string& out_dir,
                           int trials_override, std::uint64_t seed_offset);
CommandResult cmd_estimate_rate(const std::string& config_json, const std::string& out_dir,
                                int trials_override, std::uint64_t seed_offset);

/// Temp-then-rename write so concurrent runs never expose partial files.
void atomic_write(const std::string& path, const std::string& content);

} // namespace ranopt

#endif
