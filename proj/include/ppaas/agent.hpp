#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "ppaas/mlp.hpp"

namespace ppaas {

struct AgentConfig {
    std::vector<int> actor_hidden{256, 256, 256, 256};
    std::vector<int> critic_hidden{256, 256, 128};
    double lr = 0.003;
    double gamma = 0.8;
    double tau = 0.005;
    double a_max = 0.2;
    double alpha_init = 0.2;
    bool auto_alpha = true;
    // NaN means "resolve to -action_dim at construction".
    double target_entropy = std::numeric_limits<double>::quiet_NaN();
    int batch_size = 256;
    double log_std_min = -20.0;
    double log_std_max = 2.0;

    void validate() const;
};

// Column-per-sample training batch. Goals are already normalized spec
// vectors; the satisfaction indicator bits never enter the networks.
struct SacBatch {
    Mat s;         // state_dim x B
    Mat goal;      // goal_dim x B
    Mat a;         // action_dim x B
    Vec r;         // B
    Mat s_next;    // state_dim x B
    Vec terminal;  // B, 1.0 on stage-3 transitions

    Eigen::Index size() const { return s.cols(); }
};

struct LossReport {
    double critic1 = 0.0;
    double critic2 = 0.0;
    double actor = 0.0;
    double alpha = 0.0;       // entropy coefficient after the update
    double entropy = 0.0;     // -mean log pi over the batch
    bool skipped = false;     // non-finite loss, no parameters touched
};

// Goal-conditioned soft actor-critic. The actor trunk maps (state, goal)
// to per-dimension mean and log-std; actions are a_max * tanh(mu + sigma*xi)
// with the change-of-variables correction in the log-probability. Twin
// critics with polyak-averaged targets; the entropy coefficient optionally
// follows a target entropy.
class SacAgent {
public:
    SacAgent(int state_dim, int goal_dim, const AgentConfig& cfg, std::uint64_t seed);

    std::pair<Vec, double> act_stochastic(const Vec& s, const Vec& goal, Rng& rng) const;
    Vec act_deterministic(const Vec& s, const Vec& goal) const;

    // Mean of the two critics at (s, goal, a); the goal-difficulty score.
    double q_mean(const Vec& s, const Vec& goal, const Vec& a) const;
    // Minimum of the two critics, the pessimistic value estimate.
    double q_min(const Vec& s, const Vec& goal, const Vec& a) const;

    LossReport update(const SacBatch& batch, Rng& rng);

    int state_dim() const { return state_dim_; }
    int goal_dim() const { return goal_dim_; }
    int action_dim() const { return state_dim_; }
    const AgentConfig& config() const { return cfg_; }
    double alpha() const { return std::exp(log_alpha_); }
    const Mlp& actor() const { return actor_; }
    const Mlp& critic1() const { return q1_; }
    const Mlp& critic2() const { return q2_; }
    const Mlp& critic1_target() const { return q1t_; }
    const Mlp& critic2_target() const { return q2t_; }

    nlohmann::json to_json() const;
    static SacAgent from_json(const nlohmann::json& doc);

private:
    SacAgent() = default;

    struct ActorSample;
    ActorSample sample_actions(const Mat& x, Rng& rng) const;

    int state_dim_ = 0, goal_dim_ = 0;
    AgentConfig cfg_;
    std::uint64_t seed_ = 0;
    Mlp actor_, q1_, q2_, q1t_, q2t_;
    AdamState opt_actor_, opt_q1_, opt_q2_;
    ScalarAdam opt_alpha_;
    double log_alpha_ = 0.0;
};

}  // namespace ppaas
