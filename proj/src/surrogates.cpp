#include "ppaas/surrogates.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ppaas {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Stable hash of a corner identity; std::hash is not pinned across
// implementations.
std::uint64_t corner_hash(const CornerId& c, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    h = fnv1a(h, c.process.data(), c.process.size());
    h = fnv1a(h, &c.vdd_scale, sizeof(double));
    h = fnv1a(h, &c.temp_c, sizeof(double));
    return h;
}

// Uniform in [1-amp, 1+amp], keyed by (corner, term).
double jitter(const CornerId& c, std::uint64_t seed, std::uint64_t term, double amp) {
    std::uint64_t s = corner_hash(c, seed) ^ (0x9e3779b97f4a7c15ULL * (term + 1));
    const double u = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
    return 1.0 + amp * (2.0 * u - 1.0);
}

class QuadBowlModel final : public CircuitModel {
public:
    QuadBowlModel(int L, int M, std::uint64_t seed) : seed_(seed) {
        if (L < M || M < 1) throw std::invalid_argument("quad_bowl needs L >= M >= 1");
        Rng rng(derive_seed(seed, 0xb0));
        c_ = Vec(M);
        offsets_ = Mat(M, L);
        quad_ = Mat(M, L);
        std::vector<SpecDef> specs;
        for (int j = 0; j < M; ++j) {
            c_[j] = rng.uniform(8.0, 12.0);
            for (int i = 0; i < L; ++i) {
                offsets_(j, i) = rng.uniform(0.3, 0.7);
                quad_(j, i) = rng.uniform(1.0, 4.0);
            }
            specs.push_back({"m" + std::to_string(j), Bound::LowerBounded, "",
                             0.30 * c_[j], 0.85 * c_[j]});
        }
        schema_ = SpecSchema(specs);
        std::vector<ParamDef> defs;
        for (int i = 0; i < L; ++i)
            defs.push_back({"x" + std::to_string(i), 0.0, 1.0, ParamScale::Linear});
        params_ = ParamSpace(defs);
        nominal_ = CornerId{"NOM", 1.0, 27.0};
    }

    Vec simulate(const DesignState& state, const CornerId& corner) const override {
        const bool nominal = corner == nominal_;
        Vec z(c_.size());
        for (Eigen::Index j = 0; j < c_.size(); ++j) {
            const std::uint64_t base = static_cast<std::uint64_t>(j) * 131;
            const double cj =
                c_[j] * (nominal ? 1.0 : jitter(corner, seed_, base, 0.1));
            double deficit = 0.0;
            for (Eigen::Index i = 0; i < offsets_.cols(); ++i) {
                const double o =
                    offsets_(j, i) *
                    (nominal ? 1.0 : jitter(corner, seed_, base + 1 + static_cast<std::uint64_t>(i), 0.1));
                const double d = state.x[i] - o;
                deficit += quad_(j, i) * d * d;
            }
            z[j] = cj - deficit;
        }
        return z;
    }

    int n_params() const override { return static_cast<int>(offsets_.cols()); }
    int n_metrics() const override { return static_cast<int>(c_.size()); }
    const SpecSchema& schema() const override { return schema_; }
    const ParamSpace& params() const override { return params_; }

    QuadBowlTruth truth(const CornerId& corner) const {
        const bool nominal = corner == nominal_;
        QuadBowlTruth t{c_, offsets_, quad_};
        if (nominal) return t;
        for (Eigen::Index j = 0; j < c_.size(); ++j) {
            const std::uint64_t base = static_cast<std::uint64_t>(j) * 131;
            t.c[j] *= jitter(corner, seed_, base, 0.1);
            for (Eigen::Index i = 0; i < offsets_.cols(); ++i)
                t.o(j, i) *= jitter(corner, seed_, base + 1 + static_cast<std::uint64_t>(i), 0.1);
        }
        return t;
    }

private:
    std::uint64_t seed_;
    Vec c_;
    Mat offsets_;
    Mat quad_;
    SpecSchema schema_;
    ParamSpace params_;
    CornerId nominal_;
};

struct CornerFactors {
    double sn = 1.0;   // NMOS speed
    double sp = 1.0;   // PMOS speed
    double ft = 1.0;   // mobility vs temperature
    double u = 1.0;    // vdd / nominal vdd
    double j_i1 = 1.0, j_i2 = 1.0, j_g1 = 1.0, j_g2 = 1.0;
    double j_l1 = 1.0, j_l2 = 1.0, j_vt = 1.0;
};

class AnalyticTsaModel final : public CircuitModel {
public:
    explicit AnalyticTsaModel(std::uint64_t seed) : seed_(seed) {
        // Goal ranges span the surrogate's own achievable band: the easy end
        // of each range is met by a broad region of the design space, the
        // hard end only by corner-robust needles.
        schema_ = SpecSchema({
            {"gain", Bound::LowerBounded, "dB", 36.0, 52.0},
            {"pm", Bound::LowerBounded, "deg", 60.0, 60.0},
            {"ugbw", Bound::LowerBounded, "MHz", 1.0, 25.0},
            {"vswing", Bound::LowerBounded, "V", 0.02, 0.25},
            {"power", Bound::UpperBounded, "mW", 3.0, 20.0},
            {"tsettle", Bound::UpperBounded, "us", 0.15, 3.0},
        });
        params_ = ParamSpace({
            {"w_in", 0.5, 100.0, ParamScale::Log},
            {"w_tail", 0.5, 100.0, ParamScale::Log},
            {"w_load", 0.5, 100.0, ParamScale::Log},
            {"w_drv", 0.5, 100.0, ParamScale::Log},
            {"w_src", 0.5, 100.0, ParamScale::Log},
            {"w_bias", 0.5, 100.0, ParamScale::Log},
            {"c_comp", 0.1, 10.0, ParamScale::Log},
        });
        nominal_ = CornerId{"TT", 1.0, 27.0};
    }

    Vec simulate(const DesignState& state, const CornerId& corner) const override {
        const Vec p = params_.to_physical(state.x);
        const double w_in = p[0], w_tail = p[1], w_load = p[2], w_drv = p[3];
        const double w_src = p[4], w_bias = p[5], c_comp = p[6];
        const CornerFactors f = factors(corner);
        const double vdd = 3.3 * f.u;

        // Branch currents (uA); bias densities follow process speed, supply
        // and mobility-vs-temperature.
        const double i1 = 30.0 * std::pow(w_tail, 0.85) * f.sn * std::pow(f.ft, 0.35) *
                          std::pow(f.u, 0.8) * f.j_i1;
        const double i2 = 55.0 * std::pow(w_src, 0.85) * f.sp * std::pow(f.ft, 0.35) *
                          std::pow(f.u, 0.8) * f.j_i2;
        const double ib = 8.0 * std::pow(w_bias, 0.8) * std::pow(f.ft, 0.2) * std::pow(f.u, 0.5);

        // Square-law transconductances (uA/V).
        const double gm1 = 3.4 * std::sqrt(w_in * (i1 / 2.0) * f.sn * f.ft) * f.j_g1;
        const double gm2 = 3.4 * std::sqrt(w_drv * i2 * f.sn * f.ft) * f.j_g2;
        const double gm_load = 3.4 * std::sqrt(w_load * (i1 / 2.0) * f.sp * f.ft);

        // Channel-length modulation rises with process speed.
        const double lam1 = 0.045 * std::pow(f.sn * f.sp, 0.2) * f.j_l1;
        const double lam2 = 0.080 * std::pow(f.sn * f.sp, 0.2) * f.j_l2;
        const double a1 = gm1 / (lam1 * (i1 / 2.0));
        const double a2 = gm2 / (lam2 * i2);
        const double gain_db = 20.0 * std::log10(a1 * a2 + 1e-9);

        // Poles/zero in MHz: unity-gain from the compensation cap, output
        // pole from the load, mirror pole from first-stage parasitics.
        const double ugbw = gm1 / (2.0 * std::numbers::pi * c_comp);
        const double c_load = 0.4 + 0.008 * w_drv;
        const double p2 = gm2 / (2.0 * std::numbers::pi * c_load);
        // Series nulling resistor pushes the feedforward zero well past ugbw.
        const double z_rhp = 3.0 * gm2 / (2.0 * std::numbers::pi * c_comp);
        const double c_mir = 0.008 + 0.00015 * (w_in + w_load);
        const double p_mir = gm_load / (2.0 * std::numbers::pi * c_mir);
        const double deg = 180.0 / std::numbers::pi;
        const double pm = 90.0 - deg * (std::atan(ugbw / p2) + std::atan(ugbw / z_rhp) +
                                        std::atan(ugbw / p_mir));

        // Overdrives (V) and output swing.
        auto vov = [&](double i, double w, double s) {
            return 0.26 * std::sqrt(i / (20.0 * w * s * f.ft));
        };
        const double vth = 0.70 * std::sqrt(2.0 - f.sn) * (1.0 + 0.15 * (1.0 - f.ft)) * f.j_vt;
        const double vswing = vdd - 2.4 * vth -
                              (vov(i2, w_drv, f.sn) + vov(i2, w_src, f.sp)) -
                              0.5 * (vov(i1 / 2.0, w_load, f.sp) + vov(i1, w_tail, f.sn)) -
                              0.3 * vov(i1 / 2.0, w_in, f.sn);

        const double power_mw = vdd * (i1 + i2 + ib) * 1e-3;

        // Linear settling to 1% with a phase-margin ringing penalty.
        const double ring = 1.0 + 50.0 * std::exp(-std::max(pm, -30.0) / 12.0);
        const double tsettle = 4.6 / (2.0 * std::numbers::pi * ugbw) * ring;

        Vec z(6);
        z << gain_db, pm, ugbw, vswing, power_mw, tsettle;
        return z;
    }

    int n_params() const override { return 7; }
    int n_metrics() const override { return 6; }
    const SpecSchema& schema() const override { return schema_; }
    const ParamSpace& params() const override { return params_; }

private:
    CornerFactors factors(const CornerId& c) const {
        CornerFactors f;
        if (c == nominal_) return f;
        const double fast = 1.15, slow = 0.87;
        if (c.process == "FF") { f.sn = fast; f.sp = fast; }
        else if (c.process == "SS") { f.sn = slow; f.sp = slow; }
        else if (c.process == "SF") { f.sn = slow; f.sp = fast; }
        else if (c.process == "FS") { f.sn = fast; f.sp = slow; }
        f.u = c.vdd_scale;
        f.ft = std::pow(300.0 / (273.15 + c.temp_c), 0.8);
        f.j_i1 = jitter(c, seed_, 1, 0.04);
        f.j_i2 = jitter(c, seed_, 2, 0.04);
        f.j_g1 = jitter(c, seed_, 3, 0.04);
        f.j_g2 = jitter(c, seed_, 4, 0.04);
        f.j_l1 = jitter(c, seed_, 5, 0.04);
        f.j_l2 = jitter(c, seed_, 6, 0.04);
        f.j_vt = jitter(c, seed_, 7, 0.03);
        return f;
    }

    std::uint64_t seed_;
    SpecSchema schema_;
    ParamSpace params_;
    CornerId nominal_;
};

}  // namespace

std::shared_ptr<CircuitModel> quad_bowl_model(int L, int M, std::uint64_t seed) {
    return std::make_shared<QuadBowlModel>(L, M, seed);
}

CornerGrid quad_bowl_grid(int n_extremes) {
    CornerGrid g;
    g.nominal = CornerId{"NOM", 1.0, 27.0};
    for (int k = 0; k < n_extremes; ++k)
        g.extremes.push_back(CornerId{"K" + std::to_string(k + 1), 1.0, 27.0});
    g.validate();
    return g;
}

QuadBowlTruth quad_bowl_truth(const CircuitModel& model, const CornerId& corner) {
    const auto* bowl = dynamic_cast<const QuadBowlModel*>(&model);
    if (!bowl) throw std::invalid_argument("quad_bowl_truth: not a quad_bowl model");
    return bowl->truth(corner);
}

std::shared_ptr<CircuitModel> analytic_tsa_model(std::uint64_t seed) {
    return std::make_shared<AnalyticTsaModel>(seed);
}

CornerGrid tsa_grid() {
    CornerGrid g;
    g.nominal = CornerId{"TT", 1.0, 27.0};
    for (const char* proc : {"FF", "SS", "SF", "FS"})
        for (double vdd : {3.0 / 3.3, 3.6 / 3.3})
            for (double temp : {-40.0, 125.0})
                g.extremes.push_back(CornerId{proc, vdd, temp});
    g.validate();
    return g;
}

}  // namespace ppaas
