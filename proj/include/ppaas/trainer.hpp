#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ppaas/config.hpp"
#include "ppaas/event_log.hpp"
#include "ppaas/replay.hpp"

namespace ppaas {

// Deployment evaluation summary. sim_count is the training-side simulation
// total at the time of the report; s_dev averages only successful episodes
// and is absent when none succeeded.
struct MetricsReport {
    double sr = 0.0;
    std::optional<double> s_sim;
    std::optional<double> s_dev;
    long sim_count = 0;
    long eval_sim_count = 0;
    std::vector<int> per_goal_success;

    nlohmann::json to_json() const;
};

// SR per million simulations; absent when no simulation was spent.
std::optional<double> s_sim(double sr, long sim_count);

// Best of n uniform candidates, scored by the stage-1 reward at the nominal
// corner against the goal-independent mid-range proxy target. Ties keep the
// first candidate.
DesignState select_reset_state(const CircuitModel& model, const CornerGrid& grid,
                               const SpecSchema& schema, const RewardParams& p, int n, Rng& rng);

// Deterministic rollouts of the mean policy over a frozen goal set. No
// learning, no buffer writes; simulations are tallied into the report's
// eval_sim_count only.
MetricsReport evaluate(const SacAgent& agent, const CircuitModel& model, const CornerGrid& grid,
                       const DesignState& s0, const std::vector<TargetGoal>& goals, int H,
                       const RewardParams& p, const SofOptions& opts = {});

struct TrainResult {
    MetricsReport best;
    MetricsReport final_report;
    long total_env_steps = 0;
    long episodes = 0;
    long train_sim_count = 0;
    long stage_counts[3] = {0, 0, 0};
    std::string best_checkpoint;
    std::string final_checkpoint;
    std::string metrics_csv;
    std::string event_log_path;
};

// Full training run; artifacts (event log, metrics CSV, checkpoints, config
// snapshot) land in out_dir, which is created if missing.
TrainResult train(const RunConfig& cfg, const std::string& out_dir);

}  // namespace ppaas
