#include "ppaas/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ppaas {

void RewardParams::validate() const {
    if (!(r_min <= r_conservative && r_conservative <= r_anchor && r_anchor <= 0.0 &&
          0.0 <= r_max))
        throw std::invalid_argument(
            "reward params must satisfy r_min <= r_conservative <= r_anchor <= 0 <= r_max");
    if (eta <= 0.0) throw std::invalid_argument("eta must be positive");
    if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
}

double psi(const Vec& z, const Vec& z_hat, const SpecSchema& schema, double eta) {
    if (z.size() != schema.size() || z_hat.size() != schema.size())
        throw SchemaError("psi: length mismatch");
    const double denom = std::tanh(eta);
    double sum = 0.0;
    for (int j = 0; j < schema.size(); ++j) {
        if (z_hat[j] == 0.0) throw SchemaError("psi: zero target");
        const bool lower = schema.spec(j).direction == Bound::LowerBounded;
        const double d = (lower ? z_hat[j] - z[j] : z[j] - z_hat[j]) / std::abs(z_hat[j]);
        const double h = std::tanh(eta * d) / denom;
        sum += std::clamp(h, 0.0, 1.0);
    }
    return sum / schema.size();
}

double sigma(const Mat& Z, const Vec& z0, double guard_eps, double cap) {
    const auto n = Z.rows();
    const auto m = Z.cols();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        double d = z0[j];
        const double mag = std::max(std::abs(d), guard_eps);
        d = d < 0.0 ? -mag : mag;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = Z(i, j) / d - 1.0;
            sum += std::min(r * r, cap);
        }
    }
    return sum / static_cast<double>(n * m);
}

double stage_reward(int stage, const Vec& z0, const std::optional<Mat>& Z,
                    const TargetGoal& goal, const SpecSchema& schema, const RewardParams& p,
                    double anchor) {
    if (stage == 1) {
        if (Z.has_value()) throw std::invalid_argument("stage 1 carries no corner matrix");
        const double v = psi(z0, goal.z_hat, schema, p.eta);
        return anchor * (1.0 - v) + p.r_min * v - p.alpha;
    }
    if (!Z.has_value()) throw std::invalid_argument("stages 2 and 3 need the corner matrix");
    const double s = sigma(*Z, z0, p);
    if (stage == 2) return anchor * psi(worst(*Z, schema), goal.z_hat, schema, p.eta) - p.alpha * s;
    if (stage == 3) return p.r_max - p.alpha * s;
    throw std::invalid_argument("stage must be 1, 2 or 3");
}

double relabel_reward(const RewardInputs& t, const TargetGoal& new_goal, const SpecSchema& schema,
                      const RewardParams& p) {
    if (!schema.satisfies(t.z0, new_goal.z_hat))
        return stage_reward(1, t.z0, std::nullopt, new_goal, schema, p, p.r_conservative);
    if (t.Z.has_value()) {
        const int stage = schema.satisfies(worst(*t.Z, schema), new_goal.z_hat) ? 3 : 2;
        return stage_reward(stage, t.z0, t.Z, new_goal, schema, p, p.r_conservative);
    }
    // Nominal satisfies the relabeled goal but the episode never ran the
    // corners here: stage-1 ceiling with the worst-case consistency penalty.
    return p.r_conservative - p.alpha;
}

}  // namespace ppaas
