#include "ppaas/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace ppaas {

double ParamSpace::to_physical(int i, double x) const {
    const auto& d = defs_[static_cast<std::size_t>(i)];
    if (d.scale == ParamScale::Linear) return d.phys_lo + x * (d.phys_hi - d.phys_lo);
    return std::exp(std::log(d.phys_lo) + x * (std::log(d.phys_hi) - std::log(d.phys_lo)));
}

Vec ParamSpace::to_physical(const Vec& x) const {
    Vec p(size());
    for (int i = 0; i < size(); ++i) p[i] = to_physical(i, x[i]);
    return p;
}

DesignState apply_action(const DesignState& state, const ActionVec& action) {
    if (state.x.size() != action.a.size())
        throw std::invalid_argument("apply_action: dimension mismatch");
    Vec x = state.x + action.a;
    return DesignState{x.cwiseMax(0.0).cwiseMin(1.0)};
}

void CornerGrid::validate() const {
    if (extremes.empty()) throw std::invalid_argument("corner grid needs at least one extreme");
    for (const auto& c : extremes)
        if (c == nominal) throw std::invalid_argument("nominal corner listed among extremes");
}

Vec sentinel_metrics(const SpecSchema& schema) {
    Vec z(schema.size());
    for (int j = 0; j < schema.size(); ++j) {
        const auto& s = schema.spec(j);
        const double span = std::max(s.range_hi - s.range_lo, 1.0);
        z[j] = s.direction == Bound::LowerBounded ? std::min(0.0, 2.0 * s.range_lo) - span
                                                  : std::max(0.0, 2.0 * s.range_hi) + span;
    }
    return z;
}

namespace {

bool finite(const Vec& z) { return z.allFinite(); }

// Simulates all extremes, joined in grid order so thread scheduling cannot
// reorder rows. Every corner is evaluated even if one faults, keeping the
// spent-simulation count identical across worker settings; a faulted corner
// yields a NaN row.
Mat simulate_extremes(const CircuitModel& model, const CornerGrid& grid, const DesignState& s,
                      int workers) {
    const int n = grid.n_extremes();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Mat Z = Mat::Constant(n, model.n_metrics(), nan);
    auto run_one = [&](int k) -> Vec {
        try {
            return model.simulate(s, grid.extremes[static_cast<std::size_t>(k)]);
        } catch (const SimulationError&) {
            return Vec::Constant(model.n_metrics(), nan);
        }
    };
    if (workers <= 1 || n == 1) {
        for (int k = 0; k < n; ++k) Z.row(k) = run_one(k);
        return Z;
    }
    std::vector<std::future<Vec>> slots(static_cast<std::size_t>(n));
    int next = 0;
    while (next < n) {
        const int batch = std::min(workers, n - next);
        for (int k = next; k < next + batch; ++k)
            slots[static_cast<std::size_t>(k)] = std::async(std::launch::async, run_one, k);
        for (int k = next; k < next + batch; ++k) Z.row(k) = slots[static_cast<std::size_t>(k)].get();
        next += batch;
    }
    return Z;
}

StepOutcome failed_step(const CircuitModel& model, DesignState next, const TargetGoal& goal,
                        const RewardParams& rp, int sims_spent) {
    StepOutcome out;
    out.next_state = std::move(next);
    out.stage = 1;
    out.z0 = sentinel_metrics(model.schema());
    out.achieved = AchievedGoal{out.z0, false, false};
    out.reward = stage_reward(1, out.z0, std::nullopt, goal, model.schema(), rp, rp.r_anchor);
    out.sim_count = sims_spent;
    out.terminal = false;
    out.failed = true;
    return out;
}

}  // namespace

StepOutcome sof_step(const CircuitModel& model, const CornerGrid& grid, const DesignState& state,
                     const ActionVec& action, const TargetGoal& goal, const RewardParams& rp,
                     const SofOptions& opts) {
    const SpecSchema& schema = model.schema();
    if (goal.z_hat.size() != schema.size()) throw SchemaError("sof_step: goal/schema mismatch");
    DesignState next = apply_action(state, action);

    Vec z0;
    try {
        z0 = model.simulate(next, grid.nominal);
    } catch (const SimulationError&) {
        return failed_step(model, std::move(next), goal, rp, 1);
    }
    if (!finite(z0)) return failed_step(model, std::move(next), goal, rp, 1);

    const bool nominal_ok = schema.satisfies(z0, goal.z_hat);

    StepOutcome out;
    out.next_state = next;
    out.z0 = z0;
    out.sim_count = 1;

    if (!nominal_ok) {
        out.stage = 1;
        out.achieved = AchievedGoal{z0, false, false};
        out.reward = stage_reward(1, z0, std::nullopt, goal, schema, rp, rp.r_anchor);
        if (!opts.skip_on_fail) {
            // Ablation mode pays for the corners and then discards them; the
            // outcome matches the skipping step bit for bit, only sim_count
            // differs, and a fault in a discarded corner is irrelevant.
            simulate_extremes(model, grid, next, opts.workers);
            out.sim_count += grid.n_extremes();
        }
        return out;
    }

    Mat Z = simulate_extremes(model, grid, next, opts.workers);
    out.sim_count += grid.n_extremes();
    if (!Z.allFinite())
        return failed_step(model, std::move(next), goal, rp, out.sim_count);

    const Vec z_worst = worst(Z, schema);
    const bool all_ok = schema.satisfies(z_worst, goal.z_hat);
    out.stage = all_ok ? 3 : 2;
    out.achieved = AchievedGoal{z_worst, true, all_ok};
    out.Z = std::move(Z);
    out.reward = stage_reward(out.stage, z0, out.Z, goal, schema, rp, rp.r_anchor);
    out.terminal = all_ok;
    return out;
}

}  // namespace ppaas
