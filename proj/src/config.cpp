#include "ppaas/config.hpp"

#include <set>

#include "ppaas/extsim.hpp"
#include "ppaas/surrogates.hpp"

namespace ppaas {

using nlohmann::json;

void TrainerConfig::validate() const {
    if (horizon < 1) throw std::invalid_argument("trainer.horizon must be positive");
    if (total_steps < 0) throw std::invalid_argument("trainer.total_steps must be nonnegative");
    if (n_eval < 1) throw std::invalid_argument("trainer.n_eval must be positive");
    if (eval_period < 1) throw std::invalid_argument("trainer.eval_period must be positive");
    if (reset_candidates < 1)
        throw std::invalid_argument("trainer.reset_candidates must be positive");
    if (workers < 1 || workers > 16)
        throw std::invalid_argument("trainer.workers must be in [1,16]");
    if (replay_capacity < 1)
        throw std::invalid_argument("trainer.replay_capacity must be positive");
    if (pareto_capacity < 1)
        throw std::invalid_argument("trainer.pareto_capacity must be positive");
}

namespace {

// Field-path bookkeeping shared by all section parsers.
struct Ctx {
    std::vector<std::string>& errors;

    void unknown_keys(const json& obj, const std::string& prefix,
                      const std::set<std::string>& known) {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!known.count(it.key()))
                errors.push_back(prefix + it.key() + ": unknown key");
    }

    template <typename T>
    void get(const json& obj, const std::string& prefix, const char* key, T& out) {
        if (!obj.contains(key)) return;
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            errors.push_back(prefix + key + ": wrong type");
        }
    }
};

void parse_env(const json& doc, Ctx& ctx, EnvConfig& env) {
    ctx.unknown_keys(doc, "env.",
                     {"kind", "model_seed", "L", "M", "n_extremes", "command", "args",
                      "timeout_s"});
    ctx.get(doc, "env.", "kind", env.kind);
    ctx.get(doc, "env.", "model_seed", env.model_seed);
    ctx.get(doc, "env.", "L", env.L);
    ctx.get(doc, "env.", "M", env.M);
    ctx.get(doc, "env.", "n_extremes", env.n_extremes);
    ctx.get(doc, "env.", "command", env.command);
    ctx.get(doc, "env.", "args", env.args);
    ctx.get(doc, "env.", "timeout_s", env.timeout_s);
    if (env.kind != "quad_bowl" && env.kind != "analytic_tsa" && env.kind != "external")
        ctx.errors.push_back("env.kind: must be quad_bowl, analytic_tsa or external");
    if (env.kind == "external" && env.command.empty())
        ctx.errors.push_back("env.command: required for the external kind");
}

void parse_sampler(const json& doc, Ctx& ctx, SamplerConfig& s) {
    ctx.unknown_keys(doc, "sampler.",
                     {"temperature", "n_candidates", "n_uniform", "max_reject",
                      "n_action_samples"});
    ctx.get(doc, "sampler.", "temperature", s.temperature);
    ctx.get(doc, "sampler.", "n_candidates", s.n_candidates);
    ctx.get(doc, "sampler.", "n_uniform", s.n_uniform);
    ctx.get(doc, "sampler.", "max_reject", s.max_reject);
    ctx.get(doc, "sampler.", "n_action_samples", s.n_action_samples);
}

void parse_reward(const json& doc, Ctx& ctx, RewardParams& r) {
    ctx.unknown_keys(doc, "reward.",
                     {"r_max", "r_anchor", "r_conservative", "r_min", "alpha", "eta",
                      "sigma_guard_eps", "sigma_cap"});
    ctx.get(doc, "reward.", "r_max", r.r_max);
    ctx.get(doc, "reward.", "r_anchor", r.r_anchor);
    ctx.get(doc, "reward.", "r_conservative", r.r_conservative);
    ctx.get(doc, "reward.", "r_min", r.r_min);
    ctx.get(doc, "reward.", "alpha", r.alpha);
    ctx.get(doc, "reward.", "eta", r.eta);
    ctx.get(doc, "reward.", "sigma_guard_eps", r.sigma_guard_eps);
    ctx.get(doc, "reward.", "sigma_cap", r.sigma_cap);
}

void parse_agent(const json& doc, Ctx& ctx, AgentConfig& a) {
    ctx.unknown_keys(doc, "agent.",
                     {"actor_hidden", "critic_hidden", "lr", "gamma", "tau", "a_max",
                      "alpha_init", "auto_alpha", "target_entropy", "batch_size",
                      "log_std_min", "log_std_max"});
    ctx.get(doc, "agent.", "actor_hidden", a.actor_hidden);
    ctx.get(doc, "agent.", "critic_hidden", a.critic_hidden);
    ctx.get(doc, "agent.", "lr", a.lr);
    ctx.get(doc, "agent.", "gamma", a.gamma);
    ctx.get(doc, "agent.", "tau", a.tau);
    ctx.get(doc, "agent.", "a_max", a.a_max);
    ctx.get(doc, "agent.", "alpha_init", a.alpha_init);
    ctx.get(doc, "agent.", "auto_alpha", a.auto_alpha);
    ctx.get(doc, "agent.", "target_entropy", a.target_entropy);
    ctx.get(doc, "agent.", "batch_size", a.batch_size);
    ctx.get(doc, "agent.", "log_std_min", a.log_std_min);
    ctx.get(doc, "agent.", "log_std_max", a.log_std_max);
}

void parse_trainer(const json& doc, Ctx& ctx, TrainerConfig& t) {
    ctx.unknown_keys(doc, "trainer.",
                     {"horizon", "total_steps", "n_eval", "eval_period", "reset_candidates",
                      "workers", "skip_on_fail", "cher", "pdgs", "replay_capacity",
                      "pareto_capacity"});
    ctx.get(doc, "trainer.", "horizon", t.horizon);
    ctx.get(doc, "trainer.", "total_steps", t.total_steps);
    ctx.get(doc, "trainer.", "n_eval", t.n_eval);
    ctx.get(doc, "trainer.", "eval_period", t.eval_period);
    ctx.get(doc, "trainer.", "reset_candidates", t.reset_candidates);
    ctx.get(doc, "trainer.", "workers", t.workers);
    ctx.get(doc, "trainer.", "skip_on_fail", t.skip_on_fail);
    ctx.get(doc, "trainer.", "cher", t.cher);
    ctx.get(doc, "trainer.", "pdgs", t.pdgs);
    ctx.get(doc, "trainer.", "replay_capacity", t.replay_capacity);
    ctx.get(doc, "trainer.", "pareto_capacity", t.pareto_capacity);
}

void parse_logging(const json& doc, Ctx& ctx, LoggingConfig& l) {
    ctx.unknown_keys(doc, "logging.", {"events", "checkpoints"});
    ctx.get(doc, "logging.", "events", l.events);
    ctx.get(doc, "logging.", "checkpoints", l.checkpoints);
}

void parse_schema(const json& doc, Ctx& ctx, std::vector<SpecDef>& out) {
    if (!doc.is_array()) {
        ctx.errors.push_back("schema: must be an array of spec rows");
        return;
    }
    int j = 0;
    for (const auto& row : doc) {
        const std::string prefix = "schema[" + std::to_string(j++) + "].";
        ctx.unknown_keys(row, prefix, {"name", "direction", "unit", "range"});
        SpecDef def;
        ctx.get(row, prefix, "name", def.name);
        ctx.get(row, prefix, "unit", def.unit);
        std::string dir = "ge";
        ctx.get(row, prefix, "direction", dir);
        if (dir == "ge")
            def.direction = Bound::LowerBounded;
        else if (dir == "le")
            def.direction = Bound::UpperBounded;
        else
            ctx.errors.push_back(prefix + "direction: must be ge or le");
        if (row.contains("range")) {
            std::vector<double> range;
            ctx.get(row, prefix, "range", range);
            if (range.size() == 2) {
                def.range_lo = range[0];
                def.range_hi = range[1];
            } else {
                ctx.errors.push_back(prefix + "range: must be [lo, hi]");
            }
        }
        out.push_back(std::move(def));
    }
}

void parse_params(const json& doc, Ctx& ctx, std::vector<ParamDef>& out) {
    if (!doc.is_array()) {
        ctx.errors.push_back("params: must be an array of parameter rows");
        return;
    }
    int i = 0;
    for (const auto& row : doc) {
        const std::string prefix = "params[" + std::to_string(i++) + "].";
        ctx.unknown_keys(row, prefix, {"name", "range", "scale"});
        ParamDef def;
        ctx.get(row, prefix, "name", def.name);
        std::string scale = "linear";
        ctx.get(row, prefix, "scale", scale);
        if (scale == "linear")
            def.scale = ParamScale::Linear;
        else if (scale == "log")
            def.scale = ParamScale::Log;
        else
            ctx.errors.push_back(prefix + "scale: must be linear or log");
        if (row.contains("range")) {
            std::vector<double> range;
            ctx.get(row, prefix, "range", range);
            if (range.size() == 2) {
                def.phys_lo = range[0];
                def.phys_hi = range[1];
            } else {
                ctx.errors.push_back(prefix + "range: must be [lo, hi]");
            }
        }
        out.push_back(std::move(def));
    }
}

CornerId parse_corner(const json& doc, Ctx& ctx, const std::string& prefix) {
    CornerId c;
    ctx.unknown_keys(doc, prefix, {"process", "vdd_scale", "temp_c"});
    ctx.get(doc, prefix, "process", c.process);
    ctx.get(doc, prefix, "vdd_scale", c.vdd_scale);
    ctx.get(doc, prefix, "temp_c", c.temp_c);
    return c;
}

void parse_corners(const json& doc, Ctx& ctx, CornerGrid& grid) {
    ctx.unknown_keys(doc, "corners.", {"nominal", "extremes"});
    if (doc.contains("nominal")) grid.nominal = parse_corner(doc["nominal"], ctx, "corners.nominal.");
    if (doc.contains("extremes")) {
        int k = 0;
        for (const auto& row : doc["extremes"])
            grid.extremes.push_back(
                parse_corner(row, ctx, "corners.extremes[" + std::to_string(k++) + "]."));
    }
}

}  // namespace

RunConfig parse_config(const json& doc, std::vector<std::string>& errors) {
    RunConfig cfg;
    Ctx ctx{errors};
    if (!doc.is_object()) {
        errors.push_back(": config must be a JSON object");
        return cfg;
    }
    ctx.unknown_keys(doc, "",
                     {"seed", "env", "schema", "params", "corners", "sampler", "reward",
                      "agent", "trainer", "logging"});
    ctx.get(doc, "", "seed", cfg.seed);
    if (doc.contains("env")) parse_env(doc["env"], ctx, cfg.env);
    if (doc.contains("sampler")) parse_sampler(doc["sampler"], ctx, cfg.sampler);
    if (doc.contains("reward")) parse_reward(doc["reward"], ctx, cfg.reward);
    if (doc.contains("agent")) parse_agent(doc["agent"], ctx, cfg.agent);
    if (doc.contains("trainer")) parse_trainer(doc["trainer"], ctx, cfg.trainer);
    if (doc.contains("logging")) parse_logging(doc["logging"], ctx, cfg.logging);
    if (doc.contains("schema")) parse_schema(doc["schema"], ctx, cfg.schema_override);
    if (doc.contains("params")) parse_params(doc["params"], ctx, cfg.param_override);
    if (doc.contains("corners")) {
        parse_corners(doc["corners"], ctx, cfg.corner_override);
        cfg.has_corner_override = true;
    }

    if (cfg.env.kind == "external") {
        if (cfg.schema_override.empty())
            errors.push_back("schema: required for the external env kind");
        if (cfg.param_override.empty())
            errors.push_back("params: required for the external env kind");
        if (!cfg.has_corner_override || cfg.corner_override.extremes.empty())
            errors.push_back("corners: required for the external env kind");
    } else if (!cfg.schema_override.empty() || !cfg.param_override.empty() ||
               cfg.has_corner_override) {
        errors.push_back("schema/params/corners: only valid with the external env kind");
    }

    if (errors.empty()) {
        try {
            cfg.sampler.validate();
            cfg.reward.validate();
            cfg.agent.validate();
            cfg.trainer.validate();
            if (cfg.env.kind == "external") {
                SpecSchema probe(cfg.schema_override);  // range/zero checks
                cfg.corner_override.validate();
            }
            if (cfg.env.kind == "quad_bowl" &&
                (cfg.env.L < cfg.env.M || cfg.env.M < 1 || cfg.env.n_extremes < 1))
                errors.push_back("env: quad_bowl needs L >= M >= 1 and n_extremes >= 1");
        } catch (const std::exception& e) {
            errors.push_back(std::string("validation: ") + e.what());
        }
    }
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json doc;
    doc["seed"] = cfg.seed;
    doc["env"] = {{"kind", cfg.env.kind},   {"model_seed", cfg.env.model_seed},
                  {"L", cfg.env.L},         {"M", cfg.env.M},
                  {"n_extremes", cfg.env.n_extremes}};
    if (cfg.env.kind == "external") {
        doc["env"]["command"] = cfg.env.command;
        doc["env"]["args"] = cfg.env.args;
        doc["env"]["timeout_s"] = cfg.env.timeout_s;
    }
    doc["sampler"] = {{"temperature", cfg.sampler.temperature},
                      {"n_candidates", cfg.sampler.n_candidates},
                      {"n_uniform", cfg.sampler.n_uniform},
                      {"max_reject", cfg.sampler.max_reject},
                      {"n_action_samples", cfg.sampler.n_action_samples}};
    doc["reward"] = {{"r_max", cfg.reward.r_max},
                     {"r_anchor", cfg.reward.r_anchor},
                     {"r_conservative", cfg.reward.r_conservative},
                     {"r_min", cfg.reward.r_min},
                     {"alpha", cfg.reward.alpha},
                     {"eta", cfg.reward.eta},
                     {"sigma_guard_eps", cfg.reward.sigma_guard_eps},
                     {"sigma_cap", cfg.reward.sigma_cap}};
    doc["agent"] = {{"actor_hidden", cfg.agent.actor_hidden},
                    {"critic_hidden", cfg.agent.critic_hidden},
                    {"lr", cfg.agent.lr},
                    {"gamma", cfg.agent.gamma},
                    {"tau", cfg.agent.tau},
                    {"a_max", cfg.agent.a_max},
                    {"alpha_init", cfg.agent.alpha_init},
                    {"auto_alpha", cfg.agent.auto_alpha},
                    {"batch_size", cfg.agent.batch_size},
                    {"log_std_min", cfg.agent.log_std_min},
                    {"log_std_max", cfg.agent.log_std_max}};
    if (!std::isnan(cfg.agent.target_entropy))
        doc["agent"]["target_entropy"] = cfg.agent.target_entropy;
    doc["trainer"] = {{"horizon", cfg.trainer.horizon},
                      {"total_steps", cfg.trainer.total_steps},
                      {"n_eval", cfg.trainer.n_eval},
                      {"eval_period", cfg.trainer.eval_period},
                      {"reset_candidates", cfg.trainer.reset_candidates},
                      {"workers", cfg.trainer.workers},
                      {"skip_on_fail", cfg.trainer.skip_on_fail},
                      {"cher", cfg.trainer.cher},
                      {"pdgs", cfg.trainer.pdgs},
                      {"replay_capacity", cfg.trainer.replay_capacity},
                      {"pareto_capacity", cfg.trainer.pareto_capacity}};
    doc["logging"] = {{"events", cfg.logging.events}, {"checkpoints", cfg.logging.checkpoints}};
    if (cfg.env.kind == "external") {
        json schema = json::array();
        for (const auto& s : cfg.schema_override)
            schema.push_back({{"name", s.name},
                              {"direction", s.direction == Bound::LowerBounded ? "ge" : "le"},
                              {"unit", s.unit},
                              {"range", {s.range_lo, s.range_hi}}});
        doc["schema"] = std::move(schema);
        json params = json::array();
        for (const auto& p : cfg.param_override)
            params.push_back({{"name", p.name},
                              {"scale", p.scale == ParamScale::Linear ? "linear" : "log"},
                              {"range", {p.phys_lo, p.phys_hi}}});
        doc["params"] = std::move(params);
        json corners;
        corners["nominal"] = {{"process", cfg.corner_override.nominal.process},
                              {"vdd_scale", cfg.corner_override.nominal.vdd_scale},
                              {"temp_c", cfg.corner_override.nominal.temp_c}};
        json extremes = json::array();
        for (const auto& c : cfg.corner_override.extremes)
            extremes.push_back({{"process", c.process},
                                {"vdd_scale", c.vdd_scale},
                                {"temp_c", c.temp_c}});
        corners["extremes"] = std::move(extremes);
        doc["corners"] = std::move(corners);
    }
    return doc;
}

BuiltEnv build_env(const RunConfig& cfg) {
    BuiltEnv env;
    if (cfg.env.kind == "quad_bowl") {
        env.model = quad_bowl_model(cfg.env.L, cfg.env.M, cfg.env.model_seed);
        env.grid = quad_bowl_grid(cfg.env.n_extremes);
    } else if (cfg.env.kind == "analytic_tsa") {
        env.model = analytic_tsa_model(cfg.env.model_seed);
        env.grid = tsa_grid();
    } else if (cfg.env.kind == "external") {
        ExternalSimulatorModel::Options opts;
        opts.command = cfg.env.command;
        opts.args = cfg.env.args;
        opts.schema = SpecSchema(cfg.schema_override);
        opts.param_space = ParamSpace(cfg.param_override);
        opts.timeout_s = cfg.env.timeout_s;
        env.model = std::make_shared<ExternalSimulatorModel>(std::move(opts));
        env.grid = cfg.corner_override;
    } else {
        throw std::invalid_argument("unknown env kind: " + cfg.env.kind);
    }
    env.grid.validate();
    return env;
}

}  // namespace ppaas
