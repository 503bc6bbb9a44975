#pragma once

#include <cstdint>
#include <memory>

#include "ppaas/envsim.hpp"

namespace ppaas {

// Seeded concave-quadratic test environment: metric j is
//   z[j] = c_j - sum_i Q_ji (x_i - o_ji)^2
// in normalized coordinates, all specs lower-bounded. Extreme corners
// perturb c_j and o_ji by fixed seeded multiplicative factors in
// [0.9, 1.1]; the nominal corner is exact.
std::shared_ptr<CircuitModel> quad_bowl_model(int L, int M, std::uint64_t seed);

// Corner grid used by quad_bowl: one nominal tag plus n synthetic extremes.
CornerGrid quad_bowl_grid(int n_extremes);

// Ground truth of the quad_bowl surfaces under one corner:
// z[j] = c[j] - sum_i Q(j,i) * (x[i] - o(j,i))^2. Exposed so tests and
// debugging tools can locate exact optima; throws if the model is not a
// quad_bowl.
struct QuadBowlTruth {
    Vec c;  // peak value per metric
    Mat o;  // M x L peak location per metric
    Mat Q;  // M x L curvature
};
QuadBowlTruth quad_bowl_truth(const CircuitModel& model, const CornerId& corner);

// Closed-form first-order surrogate of a two-stage amplifier: 7 design
// parameters (six widths, one compensation capacitor), 6 metrics
// (Gain, PM, UGBW, Vswing, Power, Tsettle). Corners scale transconductance,
// threshold and supply terms systematically plus a small seeded jitter.
std::shared_ptr<CircuitModel> analytic_tsa_model(std::uint64_t seed = 0x7541);

// 16 extremes {FF,SS,SF,FS} x {3.0V,3.6V}/3.3V x {-40C,125C} around
// [TT, 3.3V, 27C].
CornerGrid tsa_grid();

}  // namespace ppaas
