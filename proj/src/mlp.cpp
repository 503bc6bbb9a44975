#include "ppaas/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace ppaas {

void Mlp::Grads::set_zero() {
    for (auto& m : dW) m.setZero();
    for (auto& v : db) v.setZero();
}

void Mlp::Grads::add_scaled(const Grads& other, double scale) {
    for (std::size_t i = 0; i < dW.size(); ++i) dW[i] += scale * other.dW[i];
    for (std::size_t i = 0; i < db.size(); ++i) db[i] += scale * other.db[i];
}

bool Mlp::Grads::all_finite() const {
    for (const auto& m : dW)
        if (!m.allFinite()) return false;
    for (const auto& v : db)
        if (!v.allFinite()) return false;
    return true;
}

Mlp::Mlp(std::vector<int> dims, Rng& rng) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw std::invalid_argument("network needs input and output widths");
    for (int d : dims_)
        if (d < 1) throw std::invalid_argument("layer width must be positive");
    for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
        const int fan_in = dims_[i], fan_out = dims_[i + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Mat w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
        Vec bias(fan_out);
        for (int r = 0; r < fan_out; ++r) bias[r] = rng.uniform(-bound, bound);
        W_.push_back(std::move(w));
        b_.push_back(std::move(bias));
    }
}

Vec Mlp::forward(const Vec& x) const {
    return forward(Mat(x)).col(0);
}

Mat Mlp::forward(const Mat& X) const {
    Tape tape;
    return forward(X, tape);
}

Mat Mlp::forward(const Mat& X, Tape& tape) const {
    if (X.rows() != dims_.front()) throw std::invalid_argument("input width mismatch");
    tape.acts.clear();
    tape.acts.reserve(W_.size() + 1);
    tape.acts.push_back(X);
    Mat h = X;
    for (std::size_t i = 0; i < W_.size(); ++i) {
        Mat z = (W_[i] * h).colwise() + b_[i];
        if (i + 1 < W_.size()) z = z.array().tanh().matrix();
        tape.acts.push_back(z);
        h = std::move(z);
    }
    return tape.acts.back();
}

Mat Mlp::backward(const Tape& tape, const Mat& upstream, Grads& grads) const {
    if (tape.acts.size() != W_.size() + 1) throw std::invalid_argument("stale tape");
    if (upstream.rows() != dims_.back() || upstream.cols() != tape.acts.back().cols())
        throw std::invalid_argument("upstream gradient shape mismatch");
    Mat delta = upstream;
    for (std::size_t i = W_.size(); i-- > 0;) {
        grads.dW[i] += delta * tape.acts[i].transpose();
        grads.db[i] += delta.rowwise().sum();
        if (i == 0) {
            delta = W_[0].transpose() * delta;
        } else {
            // tanh derivative from the cached post-activation
            delta = ((W_[i].transpose() * delta).array() *
                     (1.0 - tape.acts[i].array().square()))
                        .matrix();
        }
    }
    return delta;
}

Mlp::Grads Mlp::zero_grads() const {
    Grads g;
    for (std::size_t i = 0; i < W_.size(); ++i) {
        g.dW.push_back(Mat::Zero(W_[i].rows(), W_[i].cols()));
        g.db.push_back(Vec::Zero(b_[i].size()));
    }
    return g;
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < dims_.size(); ++i)
        n += static_cast<std::size_t>(dims_[i] + 1) * static_cast<std::size_t>(dims_[i + 1]);
    return n;
}

namespace {

nlohmann::json matrix_rows(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_rows(const nlohmann::json& rows, Eigen::Index nr, Eigen::Index nc) {
    Mat m(nr, nc);
    for (Eigen::Index r = 0; r < nr; ++r)
        for (Eigen::Index c = 0; c < nc; ++c) m(r, c) = rows.at(r).at(c).get<double>();
    return m;
}

}  // namespace

nlohmann::json Mlp::to_json() const {
    nlohmann::json doc;
    doc["version"] = 1;
    doc["layer_dims"] = dims_;
    doc["activation"] = "tanh";
    nlohmann::json ws = nlohmann::json::array(), bs = nlohmann::json::array();
    for (std::size_t i = 0; i < W_.size(); ++i) {
        ws.push_back(matrix_rows(W_[i]));
        nlohmann::json bias = nlohmann::json::array();
        for (Eigen::Index r = 0; r < b_[i].size(); ++r) bias.push_back(b_[i][r]);
        bs.push_back(std::move(bias));
    }
    doc["weights"] = std::move(ws);
    doc["biases"] = std::move(bs);
    return doc;
}

Mlp Mlp::from_json(const nlohmann::json& doc) {
    if (doc.at("version").get<int>() != 1) throw std::invalid_argument("unknown network version");
    if (doc.at("activation").get<std::string>() != "tanh")
        throw std::invalid_argument("unknown activation");
    Mlp net;
    net.dims_ = doc.at("layer_dims").get<std::vector<int>>();
    const auto& ws = doc.at("weights");
    const auto& bs = doc.at("biases");
    for (std::size_t i = 0; i + 1 < net.dims_.size(); ++i) {
        net.W_.push_back(matrix_from_rows(ws.at(i), net.dims_[i + 1], net.dims_[i]));
        Vec bias(net.dims_[i + 1]);
        for (int r = 0; r < net.dims_[i + 1]; ++r) bias[r] = bs.at(i).at(r).get<double>();
        net.b_.push_back(std::move(bias));
    }
    return net;
}

AdamState::AdamState(const Mlp& net, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& w : net.weights()) {
        mW_.push_back(Mat::Zero(w.rows(), w.cols()));
        vW_.push_back(Mat::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : net.biases()) {
        mb_.push_back(Vec::Zero(b.size()));
        vb_.push_back(Vec::Zero(b.size()));
    }
}

bool AdamState::step(Mlp& net, const Mlp::Grads& grads) {
    if (!grads.all_finite()) return false;
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < mW_.size(); ++i) {
        mW_[i] = beta1_ * mW_[i] + (1.0 - beta1_) * grads.dW[i];
        vW_[i] = beta2_ * vW_[i] + (1.0 - beta2_) * grads.dW[i].array().square().matrix();
        net.weights()[i].array() -=
            lr_ * (mW_[i].array() / c1) / ((vW_[i].array() / c2).sqrt() + eps_);
        mb_[i] = beta1_ * mb_[i] + (1.0 - beta1_) * grads.db[i];
        vb_[i] = beta2_ * vb_[i] + (1.0 - beta2_) * grads.db[i].array().square().matrix();
        net.biases()[i].array() -=
            lr_ * (mb_[i].array() / c1) / ((vb_[i].array() / c2).sqrt() + eps_);
    }
    return true;
}

nlohmann::json AdamState::to_json() const {
    nlohmann::json doc;
    doc["lr"] = lr_;
    doc["beta1"] = beta1_;
    doc["beta2"] = beta2_;
    doc["eps"] = eps_;
    doc["t"] = t_;
    nlohmann::json mw = nlohmann::json::array(), vw = nlohmann::json::array();
    nlohmann::json mb = nlohmann::json::array(), vb = nlohmann::json::array();
    for (const auto& m : mW_) mw.push_back(matrix_rows(m));
    for (const auto& m : vW_) vw.push_back(matrix_rows(m));
    for (const auto& v : mb_) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index r = 0; r < v.size(); ++r) row.push_back(v[r]);
        mb.push_back(std::move(row));
    }
    for (const auto& v : vb_) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index r = 0; r < v.size(); ++r) row.push_back(v[r]);
        vb.push_back(std::move(row));
    }
    doc["m_weights"] = std::move(mw);
    doc["v_weights"] = std::move(vw);
    doc["m_biases"] = std::move(mb);
    doc["v_biases"] = std::move(vb);
    return doc;
}

AdamState AdamState::from_json(const nlohmann::json& doc) {
    AdamState st;
    st.lr_ = doc.at("lr").get<double>();
    st.beta1_ = doc.at("beta1").get<double>();
    st.beta2_ = doc.at("beta2").get<double>();
    st.eps_ = doc.at("eps").get<double>();
    st.t_ = doc.at("t").get<long>();
    for (const auto& rows : doc.at("m_weights")) {
        const auto nr = static_cast<Eigen::Index>(rows.size());
        const auto nc = static_cast<Eigen::Index>(rows.at(0).size());
        st.mW_.push_back(matrix_from_rows(rows, nr, nc));
    }
    for (const auto& rows : doc.at("v_weights")) {
        const auto nr = static_cast<Eigen::Index>(rows.size());
        const auto nc = static_cast<Eigen::Index>(rows.at(0).size());
        st.vW_.push_back(matrix_from_rows(rows, nr, nc));
    }
    for (const auto& row : doc.at("m_biases")) {
        Vec v(static_cast<Eigen::Index>(row.size()));
        for (Eigen::Index r = 0; r < v.size(); ++r) v[r] = row.at(r).get<double>();
        st.mb_.push_back(std::move(v));
    }
    for (const auto& row : doc.at("v_biases")) {
        Vec v(static_cast<Eigen::Index>(row.size()));
        for (Eigen::Index r = 0; r < v.size(); ++r) v[r] = row.at(r).get<double>();
        st.vb_.push_back(std::move(v));
    }
    return st;
}

bool ScalarAdam::step(double& param, double grad) {
    if (!std::isfinite(grad)) return false;
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad * grad;
    const double mhat = m_ / (1.0 - std::pow(beta1_, static_cast<double>(t_)));
    const double vhat = v_ / (1.0 - std::pow(beta2_, static_cast<double>(t_)));
    param -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    return true;
}

nlohmann::json ScalarAdam::to_json() const {
    return {{"lr", lr_}, {"beta1", beta1_}, {"beta2", beta2_},
            {"eps", eps_}, {"m", m_},       {"v", v_},
            {"t", t_}};
}

ScalarAdam ScalarAdam::from_json(const nlohmann::json& doc) {
    ScalarAdam st(doc.at("lr").get<double>(), doc.at("beta1").get<double>(),
                  doc.at("beta2").get<double>(), doc.at("eps").get<double>());
    st.m_ = doc.at("m").get<double>();
    st.v_ = doc.at("v").get<double>();
    st.t_ = doc.at("t").get<long>();
    return st;
}

}  // namespace ppaas
