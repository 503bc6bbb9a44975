#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"

#include "ppaas/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEnvFault = 3;

std::uint64_t resolve_seed(std::uint64_t cli_seed, bool seed_given, std::uint64_t cfg_seed) {
    // PPAAS_SEED wins over --seed, which wins over the config file.
    if (const char* env = std::getenv("PPAAS_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return seed_given ? cli_seed : cfg_seed;
}

bool load_config(const std::string& path, ppaas::RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot read config file: " << path << "\n";
        return false;
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << path << " is not valid JSON: " << e.what() << "\n";
        return false;
    }
    std::vector<std::string> errors;
    cfg = ppaas::parse_config(doc, errors);
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << "error: " << path << ": " << e << "\n";
        return false;
    }
    return true;
}

int cmd_train(const std::string& config_path, std::uint64_t seed, bool seed_given,
              const std::string& out_dir, int workers, bool workers_given) {
    ppaas::RunConfig cfg;
    if (!load_config(config_path, cfg)) return kExitConfig;
    cfg.seed = resolve_seed(seed, seed_given, cfg.seed);
    if (workers_given) {
        if (workers < 1 || workers > 16) {
            std::cerr << "error: --workers must be in [1,16]\n";
            return kExitConfig;
        }
        cfg.trainer.workers = workers;
    }
    try {
        const ppaas::TrainResult result = ppaas::train(cfg, out_dir);
        nlohmann::json summary;
        summary["steps"] = result.total_env_steps;
        summary["episodes"] = result.episodes;
        summary["sim_count"] = result.train_sim_count;
        summary["best"] = result.best.to_json();
        summary["final"] = result.final_report.to_json();
        std::cout << summary.dump(2) << "\n";
        return kExitOk;
    } catch (const ppaas::SimulationError& e) {
        std::cerr << "environment fault: " << e.what() << "\n";
        return kExitEnvFault;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_eval(const std::string& checkpoint_path, const std::string& config_path, int n_goals,
             std::uint64_t seed, bool seed_given) {
    if (n_goals < 1) {
        std::cerr << "error: --goals must be positive\n";
        return kExitConfig;
    }
    ppaas::RunConfig cfg;
    if (!load_config(config_path, cfg)) return kExitConfig;
    cfg.seed = resolve_seed(seed, seed_given, cfg.seed);

    std::ifstream in(checkpoint_path);
    if (!in) {
        std::cerr << "error: cannot read checkpoint: " << checkpoint_path << "\n";
        return kExitConfig;
    }
    try {
        const nlohmann::json doc = nlohmann::json::parse(in);
        const ppaas::SacAgent agent = ppaas::SacAgent::from_json(doc);
        const ppaas::BuiltEnv env = ppaas::build_env(cfg);
        if (agent.state_dim() != env.model->n_params() ||
            agent.goal_dim() != env.model->n_metrics()) {
            std::cerr << "error: checkpoint dimensions (" << agent.state_dim() << ","
                      << agent.goal_dim() << ") do not match the environment ("
                      << env.model->n_params() << "," << env.model->n_metrics() << ")\n";
            return kExitConfig;
        }
        const ppaas::SpecSchema& schema = env.model->schema();
        ppaas::Rng goal_rng(ppaas::derive_seed(cfg.seed, 5));
        std::vector<ppaas::TargetGoal> goals;
        for (int i = 0; i < n_goals; ++i)
            goals.push_back(ppaas::sample_uniform_goal(goal_rng, schema));
        ppaas::Rng reset_rng(ppaas::derive_seed(cfg.seed, 1));
        const ppaas::DesignState s0 =
            ppaas::select_reset_state(*env.model, env.grid, schema, cfg.reward,
                                      cfg.trainer.reset_candidates, reset_rng);
        const ppaas::SofOptions opts{cfg.trainer.skip_on_fail, cfg.trainer.workers};
        ppaas::MetricsReport rep = ppaas::evaluate(agent, *env.model, env.grid, s0, goals,
                                                   cfg.trainer.horizon, cfg.reward, opts);
        std::cout << rep.to_json().dump(2) << "\n";
        return kExitOk;
    } catch (const ppaas::SimulationError& e) {
        std::cerr << "environment fault: " << e.what() << "\n";
        return kExitEnvFault;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_inspect(const std::string& run_dir) {
    const std::string log_path = run_dir + "/events.jsonl";
    ppaas::EventLog::ReadResult log;
    try {
        log = ppaas::EventLog::read_file(log_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (log.truncated_tail)
        std::cerr << "warning: final event log line is truncated; ignoring it\n";

    long max_step = 0, episodes = 0;
    std::map<int, long> sims_by_stage;
    std::vector<std::size_t> pareto_trajectory;
    double best_sr = 0.0;
    bool any_eval = false;
    for (const auto& rec : log.records) {
        max_step = std::max(max_step, rec.value("step", 0L));
        episodes = std::max(episodes, rec.value("episode", 0L));
        const std::string kind = rec.value("kind", "");
        const auto& payload = rec.contains("payload") ? rec["payload"] : nlohmann::json::object();
        if (kind == "env_step") {
            sims_by_stage[payload.value("stage", 0)] += payload.value("sim_count", 0L);
        } else if (kind == "goal_sampled") {
            pareto_trajectory.push_back(payload.value("frontier_size", std::size_t{0}));
        } else if (kind == "eval") {
            any_eval = true;
            best_sr = std::max(best_sr, payload.value("sr", 0.0));
        }
    }
    nlohmann::json summary;
    summary["steps"] = max_step;
    summary["episodes"] = episodes;
    nlohmann::json by_stage = nlohmann::json::object();
    for (const auto& [stage, sims] : sims_by_stage)
        by_stage["stage" + std::to_string(stage)] = sims;
    summary["sims_by_stage"] = std::move(by_stage);
    summary["pareto_size_trajectory"] = pareto_trajectory;
    if (any_eval) summary["best_sr"] = best_sr;
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goal-conditioned device sizing under PVT variation"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "run", checkpoint_path, run_dir;
    std::uint64_t seed = 0;
    int workers = 1, n_goals = 500;

    auto* train = app.add_subcommand("train", "Run a training session");
    train->add_option("config", config_path, "JSON config file")->required();
    auto* train_seed = train->add_option("--seed", seed, "Run seed");
    train->add_option("--out", out_dir, "Output directory");
    auto* train_workers = train->add_option("--workers", workers, "Corner simulation pool size");

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval->add_option("checkpoint", checkpoint_path, "Checkpoint JSON")->required();
    eval->add_option("config", config_path, "JSON config file")->required();
    eval->add_option("--goals", n_goals, "Number of evaluation goals");
    auto* eval_seed = eval->add_option("--seed", seed, "Goal sampling seed");

    auto* inspect = app.add_subcommand("inspect", "Summarize a run directory");
    inspect->add_option("run_dir", run_dir, "Directory holding events.jsonl")->required();

    CLI11_PARSE(app, argc, argv);

    if (train->parsed())
        return cmd_train(config_path, seed, train_seed->count() > 0, out_dir, workers,
                         train_workers->count() > 0);
    if (eval->parsed())
        return cmd_eval(checkpoint_path, config_path, n_goals, seed, eval_seed->count() > 0);
    return cmd_inspect(run_dir);
}
