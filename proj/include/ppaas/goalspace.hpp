#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppaas/rng.hpp"

namespace ppaas {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Bound { LowerBounded, UpperBounded };

struct SpecDef {
    std::string name;
    Bound direction = Bound::LowerBounded;
    std::string unit;
    double range_lo = 0.0;
    double range_hi = 0.0;
};

// Per-metric name, bound direction, unit and goal sampling range. Fixed for
// the lifetime of a run. Ranges may not straddle zero (the reward normalizer
// and the consistency penalty divide by target/nominal values) and a
// degenerate lo == hi range is a constant spec.
class SpecSchema {
public:
    SpecSchema() = default;
    explicit SpecSchema(std::vector<SpecDef> specs);

    int size() const { return static_cast<int>(specs_.size()); }
    const SpecDef& spec(int j) const { return specs_[static_cast<std::size_t>(j)]; }
    const std::vector<SpecDef>& specs() const { return specs_; }

    // Maps raw metrics into canonical space where larger always means
    // harder-to-satisfy as a target / better as an achievement:
    // identity for LowerBounded specs, sign flip for UpperBounded ones.
    Vec canonicalize(const Vec& z) const;

    // 1 iff z meets the target z_hat in every coordinate (equality counts).
    bool satisfies(const Vec& z, const Vec& z_hat) const;

    // Weak Pareto dominance in canonical space: a is at least as demanding
    // as g everywhere. a == g counts as dominated.
    bool dominates(const Vec& a, const Vec& g) const;

    // Affine per-spec normalizer used for network goal inputs: maps the
    // sampling range onto [0,1]. Degenerate ranges fall back to a unit
    // scale of max(|lo|, 1) so relabeled goals stay finite.
    Vec normalize_goal(const Vec& z_hat) const;

private:
    void check_length(const Vec& z) const;
    std::vector<SpecDef> specs_;
};

// Target goal: the z_hat spec vector plus the constant (1,1) satisfaction
// indicator pair. The indicators never vary so only z_hat is stored.
struct TargetGoal {
    Vec z_hat;
};

// Achieved goal: measured metric vector plus nominal / all-corner
// satisfaction bits. d implies d_nom.
struct AchievedGoal {
    Vec z;
    bool d_nom = false;
    bool d = false;

    // (0,0) -> 1, (1,0) -> 2, (1,1) -> 3
    int stage() const { return d ? 3 : (d_nom ? 2 : 1); }
};

TargetGoal sample_uniform_goal(Rng& rng, const SpecSchema& schema);

// Column-wise worst case of an N x M corner-metric matrix: the minimum for
// lower-bounded specs, the maximum for upper-bounded ones.
Vec worst(const Mat& Z, const SpecSchema& schema);

// Frontier of achieved goals backing PDGS dominance filtering. Entries are
// raw goal vectors; no entry weakly dominates another. Dominated inserts
// are dropped, dominating inserts prune, and at capacity the entry with the
// smallest canonical L2 norm is evicted.
class ParetoBuffer {
public:
    explicit ParetoBuffer(std::size_t capacity = 4096) : capacity_(capacity) {}

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::vector<Vec>& entries() const { return entries_; }

    void insert_achieved(const TargetGoal& g, const SpecSchema& schema);
    bool is_dominated(const TargetGoal& g, const SpecSchema& schema) const;

private:
    std::vector<Vec> entries_;
    std::size_t capacity_;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ppaas
