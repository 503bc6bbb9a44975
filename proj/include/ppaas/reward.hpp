#pragma once

#include <optional>

#include "ppaas/goalspace.hpp"

namespace ppaas {

// Anchors and scales of the three-stage reward. Invariant:
// r_min <= r_conservative <= r_anchor <= 0 <= r_max.
struct RewardParams {
    double r_max = 30.0;
    double r_anchor = -1.0;        // interpolation anchor of stages 1 and 2
    double r_conservative = -3.0;  // anchor substituted for relabeled transitions
    double r_min = -6.0;
    double alpha = 0.0;  // weight of the PVT-consistency penalty
    double eta = 0.1;    // normalizer sensitivity
    double sigma_guard_eps = 1e-9;
    double sigma_cap = 100.0;

    void validate() const;
};

// Normalized aggregate shortfall of z against the target z_hat, in [0,1].
// Per-spec margin d_j is (z_hat-z)/|z_hat| for lower-bounded specs and
// (z-z_hat)/|z_hat| for upper-bounded ones; each tanh(eta*d)/tanh(eta) term
// is clamped to [0,1] so overshoot earns no credit. psi(z_hat,z_hat)=0 and,
// for positive lower-bounded targets, psi(0,z_hat)=1.
double psi(const Vec& z, const Vec& z_hat, const SpecSchema& schema, double eta);

// Mean squared relative deviation of corner metrics from nominal metrics.
// Denominators are guarded away from zero and each term is capped.
double sigma(const Mat& Z, const Vec& z0, double guard_eps, double cap);

inline double sigma(const Mat& Z, const Vec& z0, const RewardParams& p) {
    return sigma(Z, z0, p.sigma_guard_eps, p.sigma_cap);
}

// Three-stage hierarchical reward. `anchor` is r_anchor for environment
// rewards and r_conservative for relabeled ones.
//   stage 1: anchor*(1-psi(z0)) + r_min*psi(z0) - alpha
//   stage 2: anchor*psi(worst(Z)) - alpha*sigma
//   stage 3: r_max - alpha*sigma
double stage_reward(int stage, const Vec& z0, const std::optional<Mat>& Z,
                    const TargetGoal& goal, const SpecSchema& schema, const RewardParams& p,
                    double anchor);

// Everything relabel_reward needs from a stored transition.
struct RewardInputs {
    Vec z0;
    std::optional<Mat> Z;
};

// Virtual reward of a transition relabeled to new_goal, recomputed with the
// conservative anchor. The stage is re-derived against new_goal; a stage-1
// transition whose nominal metrics satisfy the relabeled goal has no corner
// data, so it receives the stage-1 ceiling r_conservative - alpha.
double relabel_reward(const RewardInputs& t, const TargetGoal& new_goal, const SpecSchema& schema,
                      const RewardParams& p);

}  // namespace ppaas
