#pragma once

#include <cstdint>
#include <vector>

#include "ppaas/goalspace.hpp"
#include "ppaas/rng.hpp"

#include "json.hpp"

namespace ppaas {

// Fully connected network, tanh on hidden layers, identity on the output.
// Weights are initialized uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
// Batched entry points treat columns as samples; parameter gradients
// accumulate the sum over columns, so any 1/B factor belongs to the
// upstream gradient.
class Mlp {
public:
    struct Grads {
        std::vector<Mat> dW;
        std::vector<Vec> db;

        void set_zero();
        void add_scaled(const Grads& other, double scale);
        bool all_finite() const;
    };

    // Activations cached by a forward pass for the matching backward pass.
    // acts[0] is the input; acts[i] for i >= 1 holds layer i's output after
    // its activation.
    struct Tape {
        std::vector<Mat> acts;
    };

    Mlp() = default;
    Mlp(std::vector<int> dims, Rng& rng);

    Vec forward(const Vec& x) const;
    Mat forward(const Mat& X) const;
    Mat forward(const Mat& X, Tape& tape) const;

    // Exact reverse-mode gradients of the forward composition. Returns the
    // gradient with respect to the input columns; parameter gradients are
    // accumulated into grads.
    Mat backward(const Tape& tape, const Mat& upstream, Grads& grads) const;

    Grads zero_grads() const;

    int in_dim() const { return dims_.front(); }
    int out_dim() const { return dims_.back(); }
    const std::vector<int>& layer_dims() const { return dims_; }
    int n_layers() const { return static_cast<int>(W_.size()); }
    std::size_t param_count() const;

    std::vector<Mat>& weights() { return W_; }
    std::vector<Vec>& biases() { return b_; }
    const std::vector<Mat>& weights() const { return W_; }
    const std::vector<Vec>& biases() const { return b_; }

    nlohmann::json to_json() const;
    static Mlp from_json(const nlohmann::json& doc);

private:
    std::vector<int> dims_;
    std::vector<Mat> W_;  // W_[i] has shape dims_[i+1] x dims_[i]
    std::vector<Vec> b_;
};

// Bias-corrected Adam over one network's parameters. Steps with non-finite
// gradients are skipped and reported to the caller.
class AdamState {
public:
    AdamState() = default;
    explicit AdamState(const Mlp& net, double lr = 0.003, double beta1 = 0.9,
                       double beta2 = 0.999, double eps = 1e-8);

    bool step(Mlp& net, const Mlp::Grads& grads);

    long step_count() const { return t_; }
    double lr() const { return lr_; }

    nlohmann::json to_json() const;
    static AdamState from_json(const nlohmann::json& doc);

private:
    double lr_ = 0.003, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    std::vector<Mat> mW_, vW_;
    std::vector<Vec> mb_, vb_;
};

// Adam specialized to a single scalar (the entropy coefficient).
class ScalarAdam {
public:
    explicit ScalarAdam(double lr = 0.003, double beta1 = 0.9, double beta2 = 0.999,
                        double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    bool step(double& param, double grad);

    nlohmann::json to_json() const;
    static ScalarAdam from_json(const nlohmann::json& doc);

private:
    double lr_, beta1_, beta2_, eps_;
    double m_ = 0.0, v_ = 0.0;
    long t_ = 0;
};

}  // namespace ppaas
