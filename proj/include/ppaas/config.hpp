#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ppaas/agent.hpp"
#include "ppaas/envsim.hpp"
#include "ppaas/pdgs.hpp"

#include "json.hpp"

namespace ppaas {

// Which metric source a run trains against.
struct EnvConfig {
    std::string kind = "quad_bowl";  // quad_bowl | analytic_tsa | external
    std::uint64_t model_seed = 1;
    // quad_bowl shape
    int L = 2;
    int M = 2;
    int n_extremes = 4;
    // external adapter
    std::string command;
    std::vector<std::string> args;
    double timeout_s = 30.0;
};

struct TrainerConfig {
    int horizon = 30;
    long total_steps = 24000;
    int n_eval = 500;
    int eval_period = 1200;
    int reset_candidates = 50;
    int workers = 1;
    bool skip_on_fail = true;
    bool cher = true;
    bool pdgs = true;
    std::size_t replay_capacity = 100000;
    std::size_t pareto_capacity = 4096;

    void validate() const;
};

struct LoggingConfig {
    bool events = true;
    bool checkpoints = true;
};

struct RunConfig {
    std::uint64_t seed = 0;
    EnvConfig env;
    SamplerConfig sampler;
    RewardParams reward;
    AgentConfig agent;
    TrainerConfig trainer;
    LoggingConfig logging;
    // Only used with the external env kind; built-ins carry their own.
    std::vector<SpecDef> schema_override;
    std::vector<ParamDef> param_override;
    CornerGrid corner_override;
    bool has_corner_override = false;
};

// Parses and validates a config document. On success `errors` is empty and
// the returned config is fully defaulted; on failure `errors` lists one
// field-path message per problem (unknown keys included).
RunConfig parse_config(const nlohmann::json& doc, std::vector<std::string>& errors);

// Inverse of parse_config for the round-trip guarantee.
nlohmann::json config_to_json(const RunConfig& cfg);

// Materialized environment: the model plus its corner grid.
struct BuiltEnv {
    std::shared_ptr<CircuitModel> model;
    CornerGrid grid;
};

BuiltEnv build_env(const RunConfig& cfg);

}  // namespace ppaas
