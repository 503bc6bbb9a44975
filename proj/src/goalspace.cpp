#include "ppaas/goalspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ppaas {

SpecSchema::SpecSchema(std::vector<SpecDef> specs) : specs_(std::move(specs)) {
    if (specs_.empty()) throw SchemaError("schema needs at least one spec");
    for (const auto& s : specs_) {
        if (s.range_lo > s.range_hi)
            throw SchemaError("spec '" + s.name + "': range_lo > range_hi");
        if (s.range_lo <= 0.0 && s.range_hi >= 0.0)
            throw SchemaError("spec '" + s.name + "': range must not contain 0");
    }
}

void SpecSchema::check_length(const Vec& z) const {
    if (z.size() != size())
        throw SchemaError("metric vector length " + std::to_string(z.size()) +
                          " != schema size " + std::to_string(size()));
}

Vec SpecSchema::canonicalize(const Vec& z) const {
    check_length(z);
    Vec c = z;
    for (int j = 0; j < size(); ++j)
        if (specs_[static_cast<std::size_t>(j)].direction == Bound::UpperBounded) c[j] = -c[j];
    return c;
}

bool SpecSchema::satisfies(const Vec& z, const Vec& z_hat) const {
    // Same predicate as dominates(): z meets z_hat iff z weakly dominates it.
    return dominates(z, z_hat);
}

bool SpecSchema::dominates(const Vec& a, const Vec& g) const {
    check_length(a);
    check_length(g);
    for (int j = 0; j < size(); ++j) {
        const double sign =
            specs_[static_cast<std::size_t>(j)].direction == Bound::UpperBounded ? -1.0 : 1.0;
        if (sign * a[j] < sign * g[j]) return false;
    }
    return true;
}

Vec SpecSchema::normalize_goal(const Vec& z_hat) const {
    check_length(z_hat);
    Vec out(size());
    for (int j = 0; j < size(); ++j) {
        const auto& s = specs_[static_cast<std::size_t>(j)];
        double span = s.range_hi - s.range_lo;
        if (span <= 0.0) span = std::max(std::abs(s.range_lo), 1.0);
        out[j] = (z_hat[j] - s.range_lo) / span;
    }
    return out;
}

TargetGoal sample_uniform_goal(Rng& rng, const SpecSchema& schema) {
    Vec z(schema.size());
    for (int j = 0; j < schema.size(); ++j) {
        const auto& s = schema.spec(j);
        z[j] = s.range_lo == s.range_hi ? s.range_lo : rng.uniform(s.range_lo, s.range_hi);
    }
    return TargetGoal{std::move(z)};
}

Vec worst(const Mat& Z, const SpecSchema& schema) {
    if (Z.rows() < 1 || Z.cols() != schema.size()) throw SchemaError("worst: bad matrix shape");
    Vec w(Z.cols());
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
        w[j] = schema.spec(static_cast<int>(j)).direction == Bound::LowerBounded
                   ? Z.col(j).minCoeff()
                   : Z.col(j).maxCoeff();
    return w;
}

void ParetoBuffer::insert_achieved(const TargetGoal& g, const SpecSchema& schema) {
    for (const auto& e : entries_)
        if (schema.dominates(e, g.z_hat)) return;
    std::erase_if(entries_, [&](const Vec& e) { return schema.dominates(g.z_hat, e); });
    entries_.push_back(g.z_hat);
    if (entries_.size() > capacity_) {
        auto weakest = entries_.begin();
        double best = std::numeric_limits<double>::infinity();
        for (auto it = entries_.begin(); it != entries_.end(); ++it) {
            const double n = schema.canonicalize(*it).norm();
            if (n < best) {
                best = n;
                weakest = it;
            }
        }
        entries_.erase(weakest);
    }
}

bool ParetoBuffer::is_dominated(const TargetGoal& g, const SpecSchema& schema) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Vec& e) { return schema.dominates(e, g.z_hat); });
}

}  // namespace ppaas
