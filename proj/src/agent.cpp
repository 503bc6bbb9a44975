#include "ppaas/agent.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ppaas {

namespace {

constexpr double kLog2 = std::numbers::ln2;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*log(2*pi)

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// log(1 - tanh(u)^2) without catastrophic cancellation at large |u|.
double log1m_tanh_sq(double u) {
    return 2.0 * (kLog2 - u - softplus(-2.0 * u));
}

Mat vstack(const Mat& a, const Mat& b) {
    Mat out(a.rows() + b.rows(), a.cols());
    out.topRows(a.rows()) = a;
    out.bottomRows(b.rows()) = b;
    return out;
}

Mat vstack(const Mat& a, const Mat& b, const Mat& c) {
    Mat out(a.rows() + b.rows() + c.rows(), a.cols());
    out.topRows(a.rows()) = a;
    out.middleRows(a.rows(), b.rows()) = b;
    out.bottomRows(c.rows()) = c;
    return out;
}

void polyak(Mlp& target, const Mlp& online, double tau) {
    for (int i = 0; i < target.n_layers(); ++i) {
        target.weights()[i] = (1.0 - tau) * target.weights()[i] + tau * online.weights()[i];
        target.biases()[i] = (1.0 - tau) * target.biases()[i] + tau * online.biases()[i];
    }
}

std::vector<int> full_dims(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> dims;
    dims.push_back(in);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

}  // namespace

void AgentConfig::validate() const {
    if (lr <= 0) throw std::invalid_argument("agent.lr must be positive");
    if (gamma < 0 || gamma > 1) throw std::invalid_argument("agent.gamma must be in [0,1]");
    if (tau <= 0 || tau > 1) throw std::invalid_argument("agent.tau must be in (0,1]");
    if (a_max <= 0) throw std::invalid_argument("agent.a_max must be positive");
    if (alpha_init <= 0) throw std::invalid_argument("agent.alpha_init must be positive");
    if (batch_size < 1) throw std::invalid_argument("agent.batch_size must be positive");
    if (log_std_min >= log_std_max)
        throw std::invalid_argument("agent.log_std bounds must be ordered");
    if (actor_hidden.empty() || critic_hidden.empty())
        throw std::invalid_argument("agent networks need at least one hidden layer");
}

SacAgent::SacAgent(int state_dim, int goal_dim, const AgentConfig& cfg, std::uint64_t seed)
    : state_dim_(state_dim), goal_dim_(goal_dim), cfg_(cfg), seed_(seed) {
    if (state_dim < 1 || goal_dim < 1) throw std::invalid_argument("agent input widths");
    cfg_.validate();
    if (std::isnan(cfg_.target_entropy)) cfg_.target_entropy = -static_cast<double>(state_dim);
    Rng init(derive_seed(seed, 0xa1));
    actor_ = Mlp(full_dims(state_dim + goal_dim, cfg_.actor_hidden, 2 * state_dim), init);
    q1_ = Mlp(full_dims(state_dim + goal_dim + state_dim, cfg_.critic_hidden, 1), init);
    q2_ = Mlp(full_dims(state_dim + goal_dim + state_dim, cfg_.critic_hidden, 1), init);
    q1t_ = q1_;
    q2t_ = q2_;
    opt_actor_ = AdamState(actor_, cfg_.lr);
    opt_q1_ = AdamState(q1_, cfg_.lr);
    opt_q2_ = AdamState(q2_, cfg_.lr);
    opt_alpha_ = ScalarAdam(cfg_.lr);
    log_alpha_ = std::log(cfg_.alpha_init);
}

// Everything one reparameterized actor pass produces, kept for the backward
// phase: tanh outputs, scales, noise and the log-std clamp mask.
struct SacAgent::ActorSample {
    Mlp::Tape tape;
    Mat mu, rho_raw, sigma, xi, t;  // action_dim x B
    Mat actions;                    // a_max * t
    Vec log_prob;                   // B
};

SacAgent::ActorSample SacAgent::sample_actions(const Mat& x, Rng& rng) const {
    ActorSample out;
    const Mat head = actor_.forward(x, out.tape);
    const auto da = static_cast<Eigen::Index>(state_dim_);
    const Eigen::Index B = x.cols();
    out.mu = head.topRows(da);
    out.rho_raw = head.bottomRows(da);
    const Mat rho = out.rho_raw.array().min(cfg_.log_std_max).max(cfg_.log_std_min).matrix();
    out.sigma = rho.array().exp().matrix();
    out.xi = Mat(da, B);
    for (Eigen::Index c = 0; c < B; ++c)
        for (Eigen::Index r = 0; r < da; ++r) out.xi(r, c) = rng.normal();
    const Mat u = out.mu + out.sigma.cwiseProduct(out.xi);
    out.t = u.array().tanh().matrix();
    out.actions = cfg_.a_max * out.t;
    out.log_prob = Vec(B);
    const double log_amax = std::log(cfg_.a_max);
    for (Eigen::Index c = 0; c < B; ++c) {
        double lp = 0.0;
        for (Eigen::Index r = 0; r < da; ++r) {
            lp += -kHalfLog2Pi - rho(r, c) - 0.5 * out.xi(r, c) * out.xi(r, c);
            lp -= log_amax + log1m_tanh_sq(u(r, c));
        }
        out.log_prob[c] = lp;
    }
    return out;
}

std::pair<Vec, double> SacAgent::act_stochastic(const Vec& s, const Vec& goal, Rng& rng) const {
    Mat x(s.size() + goal.size(), 1);
    x.col(0).head(s.size()) = s;
    x.col(0).tail(goal.size()) = goal;
    const ActorSample sample = sample_actions(x, rng);
    return {sample.actions.col(0), sample.log_prob[0]};
}

Vec SacAgent::act_deterministic(const Vec& s, const Vec& goal) const {
    Vec x(s.size() + goal.size());
    x.head(s.size()) = s;
    x.tail(goal.size()) = goal;
    const Vec head = actor_.forward(x);
    return (cfg_.a_max * head.head(state_dim_).array().tanh()).matrix();
}

double SacAgent::q_mean(const Vec& s, const Vec& goal, const Vec& a) const {
    Vec x(s.size() + goal.size() + a.size());
    x << s, goal, a;
    return 0.5 * (q1_.forward(x)[0] + q2_.forward(x)[0]);
}

double SacAgent::q_min(const Vec& s, const Vec& goal, const Vec& a) const {
    Vec x(s.size() + goal.size() + a.size());
    x << s, goal, a;
    return std::min(q1_.forward(x)[0], q2_.forward(x)[0]);
}

LossReport SacAgent::update(const SacBatch& batch, Rng& rng) {
    const Eigen::Index B = batch.size();
    if (B < 1) throw std::invalid_argument("empty batch");
    LossReport report;
    const double alpha_ent = std::exp(log_alpha_);
    const double inv_b = 1.0 / static_cast<double>(B);

    // Bootstrapped target from the target critics and a fresh next action.
    const Mat x_next = vstack(batch.s_next, batch.goal);
    const ActorSample next = sample_actions(x_next, rng);
    const Mat xq_next = vstack(batch.s_next, batch.goal, next.actions);
    const Vec q1n = q1t_.forward(xq_next).row(0).transpose();
    const Vec q2n = q2t_.forward(xq_next).row(0).transpose();
    Vec y(B);
    for (Eigen::Index c = 0; c < B; ++c) {
        const double soft_v = std::min(q1n[c], q2n[c]) - alpha_ent * next.log_prob[c];
        y[c] = batch.r[c] + cfg_.gamma * (1.0 - batch.terminal[c]) * soft_v;
    }

    // Critic regression toward y.
    const Mat xq = vstack(batch.s, batch.goal, batch.a);
    Mlp::Tape tape1, tape2;
    const Vec q1v = q1_.forward(xq, tape1).row(0).transpose();
    const Vec q2v = q2_.forward(xq, tape2).row(0).transpose();
    const Vec e1 = q1v - y, e2 = q2v - y;
    report.critic1 = e1.squaredNorm() * inv_b;
    report.critic2 = e2.squaredNorm() * inv_b;
    if (!std::isfinite(report.critic1) || !std::isfinite(report.critic2)) {
        report.skipped = true;
        return report;
    }
    {
        Mlp::Grads g1 = q1_.zero_grads();
        q1_.backward(tape1, (2.0 * inv_b) * e1.transpose(), g1);
        Mlp::Grads g2 = q2_.zero_grads();
        q2_.backward(tape2, (2.0 * inv_b) * e2.transpose(), g2);
        if (!opt_q1_.step(q1_, g1) || !opt_q2_.step(q2_, g2)) {
            report.skipped = true;
            return report;
        }
    }

    // Actor ascent on the entropy-regularized pessimistic value.
    const Mat x_cur = vstack(batch.s, batch.goal);
    const ActorSample cur = sample_actions(x_cur, rng);
    const Mat xq_pi = vstack(batch.s, batch.goal, cur.actions);
    Mlp::Tape tq1, tq2;
    const Vec q1pi = q1_.forward(xq_pi, tq1).row(0).transpose();
    const Vec q2pi = q2_.forward(xq_pi, tq2).row(0).transpose();
    double actor_loss = 0.0;
    for (Eigen::Index c = 0; c < B; ++c)
        actor_loss += alpha_ent * cur.log_prob[c] - std::min(q1pi[c], q2pi[c]);
    actor_loss *= inv_b;
    report.actor = actor_loss;
    report.entropy = -cur.log_prob.mean();
    if (!std::isfinite(actor_loss)) {
        report.skipped = true;
        return report;
    }
    {
        // dLoss/dQ_k is -1/B on the pointwise-minimal critic, then chained
        // through that critic's input back to the action block.
        Mat up1 = Mat::Zero(1, B), up2 = Mat::Zero(1, B);
        for (Eigen::Index c = 0; c < B; ++c)
            (q1pi[c] <= q2pi[c] ? up1 : up2)(0, c) = -inv_b;
        Mlp::Grads scratch1 = q1_.zero_grads(), scratch2 = q2_.zero_grads();
        const Mat gin1 = q1_.backward(tq1, up1, scratch1);
        const Mat gin2 = q2_.backward(tq2, up2, scratch2);
        const auto da = static_cast<Eigen::Index>(state_dim_);
        const Mat gA = gin1.bottomRows(da) + gin2.bottomRows(da);

        const Mat one_m_t2 = (1.0 - cur.t.array().square()).matrix();
        const Mat sig_xi = cur.sigma.cwiseProduct(cur.xi);
        // d log pi / d mu = 2 tanh(u); d log pi / d rho = -1 + 2 tanh(u) sigma xi.
        Mat d_mu = (alpha_ent * inv_b) * 2.0 * cur.t + cfg_.a_max * gA.cwiseProduct(one_m_t2);
        Mat d_rho =
            (alpha_ent * inv_b) *
                ((2.0 * cur.t.cwiseProduct(sig_xi)).array() - 1.0).matrix() +
            cfg_.a_max * gA.cwiseProduct(one_m_t2).cwiseProduct(sig_xi);
        // No gradient through a saturated log-std clamp.
        for (Eigen::Index c = 0; c < B; ++c)
            for (Eigen::Index r = 0; r < da; ++r)
                if (cur.rho_raw(r, c) < cfg_.log_std_min || cur.rho_raw(r, c) > cfg_.log_std_max)
                    d_rho(r, c) = 0.0;
        Mat upstream(2 * da, B);
        upstream.topRows(da) = d_mu;
        upstream.bottomRows(da) = d_rho;
        Mlp::Grads ga = actor_.zero_grads();
        actor_.backward(cur.tape, upstream, ga);
        if (!opt_actor_.step(actor_, ga)) {
            report.skipped = true;
            return report;
        }
    }

    if (cfg_.auto_alpha) {
        // d/d log_alpha of E[-alpha (log pi + target)] with log pi detached.
        const double residual = cur.log_prob.mean() + cfg_.target_entropy;
        opt_alpha_.step(log_alpha_, -std::exp(log_alpha_) * residual);
    }
    report.alpha = std::exp(log_alpha_);

    polyak(q1t_, q1_, cfg_.tau);
    polyak(q2t_, q2_, cfg_.tau);
    return report;
}

nlohmann::json SacAgent::to_json() const {
    nlohmann::json doc;
    doc["version"] = 1;
    doc["state_dim"] = state_dim_;
    doc["goal_dim"] = goal_dim_;
    doc["seed"] = seed_;
    doc["config"] = {{"actor_hidden", cfg_.actor_hidden},
                     {"critic_hidden", cfg_.critic_hidden},
                     {"lr", cfg_.lr},
                     {"gamma", cfg_.gamma},
                     {"tau", cfg_.tau},
                     {"a_max", cfg_.a_max},
                     {"alpha_init", cfg_.alpha_init},
                     {"auto_alpha", cfg_.auto_alpha},
                     {"target_entropy", cfg_.target_entropy},
                     {"batch_size", cfg_.batch_size},
                     {"log_std_min", cfg_.log_std_min},
                     {"log_std_max", cfg_.log_std_max}};
    doc["actor"] = actor_.to_json();
    doc["q1"] = q1_.to_json();
    doc["q2"] = q2_.to_json();
    doc["q1_target"] = q1t_.to_json();
    doc["q2_target"] = q2t_.to_json();
    doc["log_alpha"] = log_alpha_;
    doc["opt_actor"] = opt_actor_.to_json();
    doc["opt_q1"] = opt_q1_.to_json();
    doc["opt_q2"] = opt_q2_.to_json();
    doc["opt_alpha"] = opt_alpha_.to_json();
    return doc;
}

SacAgent SacAgent::from_json(const nlohmann::json& doc) {
    if (doc.at("version").get<int>() != 1)
        throw std::invalid_argument("unknown checkpoint version");
    SacAgent agent;
    agent.state_dim_ = doc.at("state_dim").get<int>();
    agent.goal_dim_ = doc.at("goal_dim").get<int>();
    agent.seed_ = doc.at("seed").get<std::uint64_t>();
    const auto& c = doc.at("config");
    agent.cfg_.actor_hidden = c.at("actor_hidden").get<std::vector<int>>();
    agent.cfg_.critic_hidden = c.at("critic_hidden").get<std::vector<int>>();
    agent.cfg_.lr = c.at("lr").get<double>();
    agent.cfg_.gamma = c.at("gamma").get<double>();
    agent.cfg_.tau = c.at("tau").get<double>();
    agent.cfg_.a_max = c.at("a_max").get<double>();
    agent.cfg_.alpha_init = c.at("alpha_init").get<double>();
    agent.cfg_.auto_alpha = c.at("auto_alpha").get<bool>();
    agent.cfg_.target_entropy = c.at("target_entropy").get<double>();
    agent.cfg_.batch_size = c.at("batch_size").get<int>();
    agent.cfg_.log_std_min = c.at("log_std_min").get<double>();
    agent.cfg_.log_std_max = c.at("log_std_max").get<double>();
    agent.actor_ = Mlp::from_json(doc.at("actor"));
    agent.q1_ = Mlp::from_json(doc.at("q1"));
    agent.q2_ = Mlp::from_json(doc.at("q2"));
    agent.q1t_ = Mlp::from_json(doc.at("q1_target"));
    agent.q2t_ = Mlp::from_json(doc.at("q2_target"));
    agent.log_alpha_ = doc.at("log_alpha").get<double>();
    agent.opt_actor_ = AdamState::from_json(doc.at("opt_actor"));
    agent.opt_q1_ = AdamState::from_json(doc.at("opt_q1"));
    agent.opt_q2_ = AdamState::from_json(doc.at("opt_q2"));
    agent.opt_alpha_ = ScalarAdam::from_json(doc.at("opt_alpha"));
    return agent;
}

}  // namespace ppaas
