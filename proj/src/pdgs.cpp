#include "ppaas/pdgs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ppaas {

void SamplerConfig::validate() const {
    if (temperature <= 0) throw std::invalid_argument("sampler.temperature must be positive");
    if (n_candidates < 1) throw std::invalid_argument("sampler.n_candidates must be positive");
    if (n_uniform < 0) throw std::invalid_argument("sampler.n_uniform must be nonnegative");
    if (max_reject < 1) throw std::invalid_argument("sampler.max_reject must be positive");
    if (n_action_samples < 1)
        throw std::invalid_argument("sampler.n_action_samples must be positive");
}

int softmin_categorical(const Vec& q, double temperature, Rng& rng) {
    if (q.size() < 1) throw std::invalid_argument("empty score vector");
    if (temperature <= 0) throw std::invalid_argument("temperature must be positive");
    double finite_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < q.size(); ++i)
        if (std::isfinite(q[i])) finite_min = std::min(finite_min, q[i]);
    if (!std::isfinite(finite_min)) finite_min = 0.0;  // all non-finite: uniform

    Vec logits(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i)
        logits[i] = -(std::isfinite(q[i]) ? q[i] : finite_min) / temperature;
    const double m = logits.maxCoeff();
    Vec w = (logits.array() - m).exp();
    const double total = w.sum();
    double u = rng.uniform(0.0, total);
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        u -= w[i];
        if (u <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(q.size() - 1);
}

TargetGoal sample_goal(const SacAgent& agent, const ParetoBuffer& buffer,
                       const DesignState& s0, const SpecSchema& schema,
                       const SamplerConfig& cfg, Rng& rng, GoalSampleRecord* record) {
    cfg.validate();
    if (record) {
        *record = GoalSampleRecord{};
        record->frontier_size = buffer.size();
    }
    if (buffer.size() <= static_cast<std::size_t>(cfg.n_uniform)) {
        TargetGoal g = sample_uniform_goal(rng, schema);
        if (record) {
            record->uniform = true;
            record->candidates.push_back(g.z_hat);
            record->chosen = 0;
        }
        return g;
    }

    std::vector<TargetGoal> candidates;
    candidates.reserve(static_cast<std::size_t>(cfg.n_candidates));
    int fallbacks = 0;
    for (int i = 0; i < cfg.n_candidates; ++i) {
        TargetGoal g = sample_uniform_goal(rng, schema);
        int attempts = 1;
        while (buffer.is_dominated(g, schema) && attempts < cfg.max_reject) {
            g = sample_uniform_goal(rng, schema);
            ++attempts;
        }
        if (buffer.is_dominated(g, schema)) ++fallbacks;  // cap fired, keep the last draw
        candidates.push_back(std::move(g));
    }

    // Difficulty score: mean of the two critics at the reset state, one
    // stochastic action per candidate (more if configured).
    Vec q(cfg.n_candidates);
    for (int i = 0; i < cfg.n_candidates; ++i) {
        const Vec gnorm = schema.normalize_goal(candidates[static_cast<std::size_t>(i)].z_hat);
        double acc = 0.0;
        for (int k = 0; k < cfg.n_action_samples; ++k) {
            const auto [a, logp] = agent.act_stochastic(s0.x, gnorm, rng);
            acc += agent.q_mean(s0.x, gnorm, a);
        }
        q[i] = acc / cfg.n_action_samples;
    }

    const int chosen = softmin_categorical(q, cfg.temperature, rng);
    if (record) {
        for (const auto& c : candidates) record->candidates.push_back(c.z_hat);
        record->q_scores = q;
        record->chosen = chosen;
        record->rejection_fallbacks = fallbacks;
    }
    return candidates[static_cast<std::size_t>(chosen)];
}

}  // namespace ppaas
