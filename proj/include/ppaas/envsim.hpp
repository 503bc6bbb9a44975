#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ppaas/goalspace.hpp"
#include "ppaas/reward.hpp"

namespace ppaas {

enum class ParamScale { Linear, Log };

struct ParamDef {
    std::string name;
    double phys_lo = 0.0;
    double phys_hi = 0.0;
    ParamScale scale = ParamScale::Linear;
};

// Design-parameter space: maps normalized coordinates in [0,1]^L onto
// physical values, linearly or per decade.
class ParamSpace {
public:
    ParamSpace() = default;
    explicit ParamSpace(std::vector<ParamDef> defs) : defs_(std::move(defs)) {}

    int size() const { return static_cast<int>(defs_.size()); }
    const ParamDef& def(int i) const { return defs_[static_cast<std::size_t>(i)]; }
    const std::vector<ParamDef>& defs() const { return defs_; }

    double to_physical(int i, double x) const;
    Vec to_physical(const Vec& x) const;

private:
    std::vector<ParamDef> defs_;
};

// Normalized design point, every coordinate in [0,1].
struct DesignState {
    Vec x;
};

// Per-step parameter adjustment, each component within [-a_max, a_max].
struct ActionVec {
    Vec a;
};

// Next state = component-wise sum clipped back into the unit box.
DesignState apply_action(const DesignState& state, const ActionVec& action);

struct CornerId {
    std::string process;     // TT / FF / SS / SF / FS or a surrogate tag
    double vdd_scale = 1.0;  // multiplier on the nominal supply
    double temp_c = 27.0;

    bool operator==(const CornerId&) const = default;
};

// One nominal corner plus N extreme corners. The nominal corner is never
// a member of the extremes.
struct CornerGrid {
    CornerId nominal;
    std::vector<CornerId> extremes;

    int n_extremes() const { return static_cast<int>(extremes.size()); }
    void validate() const;
};

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Deterministic black-box metric source: identical (state, corner) pairs
// yield bit-identical metrics. Implementations may throw SimulationError.
class CircuitModel {
public:
    virtual ~CircuitModel() = default;
    virtual Vec simulate(const DesignState& state, const CornerId& corner) const = 0;

    virtual int n_params() const = 0;
    virtual int n_metrics() const = 0;
    virtual const SpecSchema& schema() const = 0;
    virtual const ParamSpace& params() const = 0;
};

// One environment step under Skip-on-Fail. Stage 1 means the nominal corner
// failed the target (no corner matrix, one simulation); stages 2 and 3 carry
// the full corner matrix and 1 + N simulations. Stage 3 terminates the
// episode.
struct StepOutcome {
    DesignState next_state;
    int stage = 1;
    Vec z0;
    std::optional<Mat> Z;
    AchievedGoal achieved;
    double reward = 0.0;
    int sim_count = 0;
    bool terminal = false;
    bool failed = false;  // simulator fault, sentinel metrics installed
};

// Pessimal finite metric vector used when a simulation faults: far below
// range for lower-bounded specs, far above for upper-bounded ones, chosen
// so every psi term clamps to 1.
Vec sentinel_metrics(const SpecSchema& schema);

struct SofOptions {
    // When false, extreme corners are simulated on every step regardless of
    // the nominal outcome (the always-full-corner ablation); stage semantics
    // are unchanged but every step costs 1 + N simulations.
    bool skip_on_fail = true;
    // Fan-out width for the extreme-corner simulations of one step.
    int workers = 1;
};

StepOutcome sof_step(const CircuitModel& model, const CornerGrid& grid, const DesignState& state,
                     const ActionVec& action, const TargetGoal& goal, const RewardParams& rp,
                     const SofOptions& opts = {});

// Decorator counting simulate() calls; backs the independent sim-count audit.
class CountingModel final : public CircuitModel {
public:
    explicit CountingModel(std::shared_ptr<const CircuitModel> inner) : inner_(std::move(inner)) {}

    Vec simulate(const DesignState& state, const CornerId& corner) const override {
        count_.fetch_add(1, std::memory_order_relaxed);
        return inner_->simulate(state, corner);
    }
    int n_params() const override { return inner_->n_params(); }
    int n_metrics() const override { return inner_->n_metrics(); }
    const SpecSchema& schema() const override { return inner_->schema(); }
    const ParamSpace& params() const override { return inner_->params(); }

    std::uint64_t count() const { return count_.load(std::memory_order_relaxed); }
    void reset() { count_.store(0, std::memory_order_relaxed); }

private:
    std::shared_ptr<const CircuitModel> inner_;
    mutable std::atomic<std::uint64_t> count_{0};
};

}  // namespace ppaas
