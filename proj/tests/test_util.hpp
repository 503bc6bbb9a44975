#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ppaas/envsim.hpp"

namespace ppaas::testutil {

inline SpecSchema one_lower(double lo, double hi) {
    return SpecSchema({{"m0", Bound::LowerBounded, "", lo, hi}});
}

inline SpecSchema two_lower() {
    return SpecSchema({{"gain", Bound::LowerBounded, "dB", 40.0, 60.0},
                       {"ugbw", Bound::LowerBounded, "MHz", 1.0, 20.0}});
}

inline SpecSchema mixed_pair() {
    return SpecSchema({{"gain", Bound::LowerBounded, "dB", 40.0, 60.0},
                       {"power", Bound::UpperBounded, "mW", 1.0, 5.0}});
}

inline Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

// Single lower-bounded metric z = 20 * x[0], with each extreme corner
// depressed by a fixed per-corner drop. Stages are then scripted by
// steering x: z0 < goal -> stage 1; z0 >= goal but z0 - max_drop < goal
// -> stage 2; z0 - max_drop >= goal -> stage 3.
class ThresholdModel final : public CircuitModel {
public:
    explicit ThresholdModel(std::vector<std::pair<std::string, double>> drops,
                            double fail_above = 2.0)
        : drops_(std::move(drops)), fail_above_(fail_above) {
        schema_ = SpecSchema({{"m0", Bound::LowerBounded, "", 5.0, 15.0}});
        params_ = ParamSpace({{"x0", 0.0, 1.0, ParamScale::Linear}});
    }

    Vec simulate(const DesignState& state, const CornerId& corner) const override {
        if (state.x[0] > fail_above_) throw SimulationError("scripted fault");
        double drop = 0.0;
        if (corner.process != "NOM") {
            for (const auto& [tag, d] : drops_)
                if (tag == corner.process) drop = d;
        }
        Vec z(1);
        z[0] = 20.0 * state.x[0] - drop;
        return z;
    }

    int n_params() const override { return 1; }
    int n_metrics() const override { return 1; }
    const SpecSchema& schema() const override { return schema_; }
    const ParamSpace& params() const override { return params_; }

    CornerGrid grid() const {
        CornerGrid g;
        g.nominal = CornerId{"NOM", 1.0, 27.0};
        for (const auto& [tag, d] : drops_) g.extremes.push_back(CornerId{tag, 1.0, 27.0});
        return g;
    }

private:
    std::vector<std::pair<std::string, double>> drops_;
    double fail_above_;
    SpecSchema schema_;
    ParamSpace params_;
};

inline ThresholdModel make_threshold_model(int n_extremes, double max_drop = 1.5) {
    std::vector<std::pair<std::string, double>> drops;
    for (int k = 0; k < n_extremes; ++k) {
        const double d = n_extremes == 1
                             ? max_drop
                             : max_drop * static_cast<double>(k) / (n_extremes - 1);
        drops.emplace_back("C" + std::to_string(k), d);
    }
    return ThresholdModel(std::move(drops));
}

// Moves x[0] of a one-parameter model to an exact position regardless of the
// current state (sof_step clips into [0,1] afterwards).
inline ActionVec move_to(const DesignState& s, double target) {
    Vec a(1);
    a[0] = target - s.x[0];
    return ActionVec{a};
}

}  // namespace ppaas::testutil
