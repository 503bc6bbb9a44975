#pragma once

#include <vector>

#include "ppaas/agent.hpp"
#include "ppaas/envsim.hpp"

namespace ppaas {

struct SamplerConfig {
    double temperature = 5.0;
    int n_candidates = 16;
    int n_uniform = 4;     // uniform sampling while the frontier holds <= this many goals
    int max_reject = 64;   // rejection-sampling cap per candidate, then accept the last draw
    int n_action_samples = 1;

    void validate() const;
};

// Audit record of one goal-sampling decision, emitted to the event log.
struct GoalSampleRecord {
    bool uniform = false;             // frontier too small, uniform fallback
    std::vector<Vec> candidates;      // raw candidate z_hat vectors
    Vec q_scores;                     // mean-critic score per candidate
    int chosen = -1;
    int rejection_fallbacks = 0;      // candidates accepted because the cap fired
    std::size_t frontier_size = 0;
};

// Categorical draw with probabilities softmax(-q / temperature), computed
// with max-subtraction. Non-finite scores are replaced by the finite batch
// minimum, treating such candidates as maximally hard.
int softmin_categorical(const Vec& q, double temperature, Rng& rng);

// Samples the next episode's target goal: uniform while the achieved
// frontier is small, otherwise difficulty-weighted selection among
// non-dominated candidates using the agent's critics at the reset state.
// Inputs are read-only; nothing is mutated.
TargetGoal sample_goal(const SacAgent& agent, const ParetoBuffer& buffer,
                       const DesignState& s0, const SpecSchema& schema,
                       const SamplerConfig& cfg, Rng& rng,
                       GoalSampleRecord* record = nullptr);

}  // namespace ppaas
