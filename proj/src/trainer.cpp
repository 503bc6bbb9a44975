#include "ppaas/trainer.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ppaas/pdgs.hpp"

namespace ppaas {

using nlohmann::json;

nlohmann::json MetricsReport::to_json() const {
    json doc;
    doc["sr"] = sr;
    if (s_sim) doc["s_sim"] = *s_sim;
    if (s_dev) doc["s_dev"] = *s_dev;
    doc["sim_count"] = sim_count;
    doc["eval_sim_count"] = eval_sim_count;
    doc["per_goal_success"] = per_goal_success;
    return doc;
}

std::optional<double> s_sim(double sr, long sim_count) {
    if (sim_count <= 0) return std::nullopt;
    return sr / static_cast<double>(sim_count) * 1e6;
}

DesignState select_reset_state(const CircuitModel& model, const CornerGrid& grid,
                               const SpecSchema& schema, const RewardParams& p, int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("need at least one reset candidate");
    Vec z_mid(schema.size());
    for (int j = 0; j < schema.size(); ++j)
        z_mid[j] = 0.5 * (schema.spec(j).range_lo + schema.spec(j).range_hi);
    const TargetGoal proxy{z_mid};

    std::optional<DesignState> best;
    double best_reward = 0.0;
    for (int k = 0; k < n; ++k) {
        Vec x(model.n_params());
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(0.0, 1.0);
        DesignState cand{std::move(x)};
        Vec z0;
        try {
            z0 = model.simulate(cand, grid.nominal);
        } catch (const SimulationError&) {
            continue;
        }
        if (!z0.allFinite()) continue;
        const double r = stage_reward(1, z0, std::nullopt, proxy, schema, p, p.r_anchor);
        if (!best || r > best_reward) {
            best = std::move(cand);
            best_reward = r;
        }
    }
    if (!best) throw SimulationError("every reset candidate failed to simulate");
    return *best;
}

MetricsReport evaluate(const SacAgent& agent, const CircuitModel& model, const CornerGrid& grid,
                       const DesignState& s0, const std::vector<TargetGoal>& goals, int H,
                       const RewardParams& p, const SofOptions& opts) {
    MetricsReport report;
    const SpecSchema& schema = model.schema();
    double sigma_sum = 0.0;
    long successes = 0;
    for (const auto& goal : goals) {
        const Vec gnorm = schema.normalize_goal(goal.z_hat);
        DesignState s = s0;
        int success = 0;
        for (int t = 0; t < H; ++t) {
            const Vec a = agent.act_deterministic(s.x, gnorm);
            const StepOutcome out = sof_step(model, grid, s, ActionVec{a}, goal, p, opts);
            report.eval_sim_count += out.sim_count;
            s = out.next_state;
            if (out.terminal) {
                success = 1;
                sigma_sum += sigma(*out.Z, out.z0, p);
                break;
            }
        }
        successes += success;
        report.per_goal_success.push_back(success);
    }
    report.sr = goals.empty() ? 0.0 : static_cast<double>(successes) /
                                          static_cast<double>(goals.size());
    if (successes > 0) report.s_dev = sigma_sum / static_cast<double>(successes);
    return report;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<std::pair<long, MetricsReport>>& rows) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write metrics CSV: " + path);
    out << "step,sr,s_sim,s_dev,sim_count\n";
    for (const auto& [step, rep] : rows) {
        out << step << ',' << format_double(rep.sr) << ','
            << (rep.s_sim ? format_double(*rep.s_sim) : "") << ','
            << (rep.s_dev ? format_double(*rep.s_dev) : "") << ',' << rep.sim_count << '\n';
    }
}

void write_checkpoint(const std::string& path, const SacAgent& agent) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << agent.to_json().dump() << '\n';
}

json goal_to_json(const Vec& z) {
    json arr = json::array();
    for (Eigen::Index j = 0; j < z.size(); ++j) arr.push_back(z[j]);
    return arr;
}

json frontier_to_json(const ParetoBuffer& buffer) {
    json arr = json::array();
    for (const auto& g : buffer.entries()) arr.push_back(goal_to_json(g));
    return arr;
}

}  // namespace

TrainResult train(const RunConfig& cfg, const std::string& out_dir) {
    cfg.trainer.validate();
    std::filesystem::create_directories(out_dir);
    const auto path_in = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    const BuiltEnv env = build_env(cfg);
    auto train_model = std::make_shared<CountingModel>(env.model);
    const SpecSchema& schema = env.model->schema();
    const int L = env.model->n_params();
    const int M = env.model->n_metrics();
    const int N = env.grid.n_extremes();

    Rng reset_rng(derive_seed(cfg.seed, 1));
    Rng goal_rng(derive_seed(cfg.seed, 2));
    Rng action_rng(derive_seed(cfg.seed, 3));
    Rng learn_rng(derive_seed(cfg.seed, 4));
    Rng eval_goal_rng(derive_seed(cfg.seed, 5));
    Rng relabel_rng(derive_seed(cfg.seed, 6));

    SacAgent agent(L, M, cfg.agent, derive_seed(cfg.seed, 7));
    ReplayBuffer replay(cfg.trainer.replay_capacity);
    ParetoBuffer pareto(cfg.trainer.pareto_capacity);
    const SofOptions sof_opts{cfg.trainer.skip_on_fail, cfg.trainer.workers};

    std::vector<TargetGoal> eval_goals;
    eval_goals.reserve(static_cast<std::size_t>(cfg.trainer.n_eval));
    for (int i = 0; i < cfg.trainer.n_eval; ++i)
        eval_goals.push_back(sample_uniform_goal(eval_goal_rng, schema));

    EventLog log(cfg.logging.events ? path_in("events.jsonl") : std::string());
    {
        std::ofstream cfg_out(path_in("config.json"));
        cfg_out << config_to_json(cfg).dump(2) << '\n';
    }

    TrainResult result;
    result.event_log_path = cfg.logging.events ? path_in("events.jsonl") : std::string();

    // Reset-state selection costs one nominal simulation per candidate;
    // those sims count toward the training total.
    const DesignState reset_state = select_reset_state(
        *train_model, env.grid, schema, cfg.reward, cfg.trainer.reset_candidates, reset_rng);
    long step_sims = 0;
    const long overhead_sims = static_cast<long>(train_model->count());

    std::vector<std::pair<long, MetricsReport>> metric_rows;
    long steps = 0, episodes = 0;
    long next_eval = cfg.trainer.eval_period;
    double best_sr = -1.0;
    long last_eval_step = -1;

    const auto run_eval = [&](long at_step) {
        auto eval_model = std::make_shared<CountingModel>(env.model);
        MetricsReport rep = evaluate(agent, *eval_model, env.grid, reset_state, eval_goals,
                                     cfg.trainer.horizon, cfg.reward, sof_opts);
        rep.sim_count = step_sims + overhead_sims;
        rep.s_sim = s_sim(rep.sr, rep.sim_count);
        metric_rows.emplace_back(at_step, rep);
        last_eval_step = at_step;
        json payload;
        payload["sr"] = rep.sr;
        if (rep.s_sim) payload["s_sim"] = *rep.s_sim;
        if (rep.s_dev) payload["s_dev"] = *rep.s_dev;
        payload["sim_count"] = rep.sim_count;
        payload["eval_sim_count"] = rep.eval_sim_count;
        payload["pareto_size"] = pareto.size();
        log.emit(at_step, episodes, "eval", std::move(payload));
        if (rep.sr > best_sr) {
            best_sr = rep.sr;
            result.best = rep;
            if (cfg.logging.checkpoints) {
                result.best_checkpoint = path_in("checkpoint_best.json");
                write_checkpoint(result.best_checkpoint, agent);
                log.emit(at_step, episodes, "checkpoint",
                         {{"path", "checkpoint_best.json"},
                          {"sr", rep.sr},
                          {"frontier", frontier_to_json(pareto)}});
            }
        }
        result.final_report = rep;
    };

    std::vector<Transition> episode;
    while (steps < cfg.trainer.total_steps) {
        ++episodes;
        GoalSampleRecord rec;
        TargetGoal goal;
        if (cfg.trainer.pdgs) {
            goal = sample_goal(agent, pareto, reset_state, schema, cfg.sampler, goal_rng, &rec);
        } else {
            goal = sample_uniform_goal(goal_rng, schema);
            rec.uniform = true;
            rec.frontier_size = pareto.size();
        }
        {
            json payload;
            payload["goal"] = goal_to_json(goal.z_hat);
            payload["uniform"] = rec.uniform;
            payload["frontier_size"] = rec.frontier_size;
            payload["rejection_fallbacks"] = rec.rejection_fallbacks;
            if (!rec.uniform && rec.q_scores.size() > 0) {
                payload["chosen"] = rec.chosen;
                payload["q_scores"] = goal_to_json(rec.q_scores);
            }
            log.emit(steps, episodes, "goal_sampled", std::move(payload));
        }
        const Vec gnorm = schema.normalize_goal(goal.z_hat);

        episode.clear();
        DesignState s = reset_state;
        for (int t = 0; t < cfg.trainer.horizon && steps < cfg.trainer.total_steps; ++t) {
            const auto [a, logp] = agent.act_stochastic(s.x, gnorm, action_rng);
            const StepOutcome out =
                sof_step(*train_model, env.grid, s, ActionVec{a}, goal, cfg.reward, sof_opts);
            ++steps;
            step_sims += out.sim_count;
            result.stage_counts[out.stage - 1] += 1;
            episode.push_back(Transition{s, ActionVec{a}, out.reward, out.next_state, goal,
                                         out.achieved, out.z0, out.Z, out.stage, t, out.terminal,
                                         false});
            log.emit(steps, episodes, "env_step",
                     {{"t", t},
                      {"stage", out.stage},
                      {"reward", out.reward},
                      {"sim_count", out.sim_count},
                      {"terminal", out.terminal},
                      {"failed", out.failed}});
            s = out.next_state;
            if (out.terminal) {
                pareto.insert_achieved(goal, schema);
                break;
            }
        }

        std::vector<Transition> synthetics;
        if (cfg.trainer.cher) synthetics = cher_relabel(episode, schema, cfg.reward, relabel_rng);
        push_episode(replay, episode, synthetics);

        // One gradient step per environment step collected this episode.
        if (replay.size() >= static_cast<std::size_t>(cfg.agent.batch_size)) {
            const int B = cfg.agent.batch_size;
            double c1 = 0, c2 = 0, al = 0, ent = 0, alpha_last = 0;
            int applied = 0, skipped = 0;
            for (std::size_t k = 0; k < episode.size(); ++k) {
                const auto sample = sample_batch(replay, B, learn_rng);
                SacBatch batch;
                batch.s = Mat(L, B);
                batch.goal = Mat(M, B);
                batch.a = Mat(L, B);
                batch.r = Vec(B);
                batch.s_next = Mat(L, B);
                batch.terminal = Vec(B);
                for (int c = 0; c < B; ++c) {
                    const Transition& tr = sample[static_cast<std::size_t>(c)];
                    batch.s.col(c) = tr.s.x;
                    batch.goal.col(c) = schema.normalize_goal(tr.goal.z_hat);
                    batch.a.col(c) = tr.a.a;
                    batch.r[c] = tr.r;
                    batch.s_next.col(c) = tr.s_next.x;
                    batch.terminal[c] = tr.terminal ? 1.0 : 0.0;
                }
                const LossReport rep = agent.update(batch, learn_rng);
                if (rep.skipped) {
                    ++skipped;
                } else {
                    ++applied;
                    c1 += rep.critic1;
                    c2 += rep.critic2;
                    al += rep.actor;
                    ent += rep.entropy;
                    alpha_last = rep.alpha;
                }
            }
            if (applied + skipped > 0) {
                json payload;
                payload["n"] = applied;
                payload["skipped"] = skipped;
                if (applied > 0) {
                    payload["critic1"] = c1 / applied;
                    payload["critic2"] = c2 / applied;
                    payload["actor"] = al / applied;
                    payload["entropy"] = ent / applied;
                    payload["alpha"] = alpha_last;
                }
                log.emit(steps, episodes, "update", std::move(payload));
            }
        }

        if (steps >= next_eval) {
            run_eval(steps);
            while (next_eval <= steps) next_eval += cfg.trainer.eval_period;
        }
    }

    if (cfg.trainer.total_steps > 0 && last_eval_step != steps) run_eval(steps);

    // Independent audit of the per-step accounting.
    const long audited = static_cast<long>(train_model->count());
    if (audited != step_sims + overhead_sims)
        throw std::logic_error("simulation accounting mismatch: audited " +
                               std::to_string(audited) + " vs counted " +
                               std::to_string(step_sims + overhead_sims));

    result.total_env_steps = steps;
    result.episodes = episodes;
    result.train_sim_count = step_sims + overhead_sims;
    if (cfg.logging.checkpoints) {
        result.final_checkpoint = path_in("checkpoint_final.json");
        write_checkpoint(result.final_checkpoint, agent);
        log.emit(steps, episodes, "checkpoint",
                 {{"path", "checkpoint_final.json"}, {"frontier", frontier_to_json(pareto)}});
        if (result.best_checkpoint.empty()) {
            // Zero-step runs still leave a usable artifact behind.
            result.best_checkpoint = path_in("checkpoint_best.json");
            write_checkpoint(result.best_checkpoint, agent);
        }
    }
    result.metrics_csv = path_in("metrics.csv");
    write_metrics_csv(result.metrics_csv, metric_rows);
    log.flush();
    (void)N;
    return result;
}

}  // namespace ppaas
