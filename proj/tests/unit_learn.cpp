#include <cmath>
#include <vector>

#include "doctest.h"

#include "ppaas/pdgs.hpp"
#include "test_util.hpp"

using namespace ppaas;
namespace tu = ppaas::testutil;

namespace {

Mat random_mat(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

SacBatch random_batch(int sd, int gd, int B, Rng& rng, double reward, double terminal) {
    SacBatch b;
    b.s = random_mat(sd, B, rng, 0.0, 1.0);
    b.goal = random_mat(gd, B, rng, 0.0, 1.0);
    b.a = random_mat(sd, B, rng, -0.2, 0.2);
    b.r = Vec::Constant(B, reward);
    b.s_next = random_mat(sd, B, rng, 0.0, 1.0);
    b.terminal = Vec::Constant(B, terminal);
    return b;
}

AgentConfig small_config() {
    AgentConfig cfg;
    cfg.actor_hidden = {16, 16};
    cfg.critic_hidden = {16, 16};
    cfg.batch_size = 32;
    return cfg;
}

bool same_weights(const Mlp& a, const Mlp& b) {
    if (a.n_layers() != b.n_layers()) return false;
    for (int i = 0; i < a.n_layers(); ++i) {
        if (!(a.weights()[i].array() == b.weights()[i].array()).all()) return false;
        if (!(a.biases()[i].array() == b.biases()[i].array()).all()) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("network construction validates widths and counts parameters") {
    Rng rng(1);
    CHECK_THROWS_AS(Mlp({3}, rng), std::invalid_argument);
    CHECK_THROWS_AS(Mlp({3, 0, 2}, rng), std::invalid_argument);
    const Mlp net({3, 5, 2}, rng);
    CHECK(net.param_count() == 32);  // 4*5 + 6*2
    CHECK(net.in_dim() == 3);
    CHECK(net.out_dim() == 2);
    CHECK(net.n_layers() == 2);
}

TEST_CASE("a single layer is affine and zeroed weights give zero output") {
    Rng rng(2);
    Mlp net({2, 2}, rng);
    net.weights()[0] << 1.0, 0.0, 0.0, 1.0;
    net.biases()[0].setZero();
    const Vec x = tu::vec({0.3, -0.7});
    CHECK((net.forward(x).array() == x.array()).all());

    Mlp zeroed({3, 4, 2}, rng);
    for (auto& w : zeroed.weights()) w.setZero();
    for (auto& b : zeroed.biases()) b.setZero();
    CHECK((zeroed.forward(tu::vec({1.0, -2.0, 3.0})).array() == 0.0).all());
}

TEST_CASE("seeded initialization is reproducible and bounded by fan-in") {
    Rng r1(7), r2(7);
    const Mlp a({4, 8, 3}, r1), b({4, 8, 3}, r2);
    CHECK(same_weights(a, b));
    const double bound0 = 1.0 / std::sqrt(4.0);
    CHECK((a.weights()[0].array().abs() <= bound0).all());
    const double bound1 = 1.0 / std::sqrt(8.0);
    CHECK((a.weights()[1].array().abs() <= bound1).all());

    Rng r3(8);
    const Mlp c({4, 8, 3}, r3);
    CHECK_FALSE(same_weights(a, c));
}

TEST_CASE("batched and single-column forwards agree") {
    Rng rng(3);
    const Mlp net({3, 6, 2}, rng);
    const Mat X = random_mat(3, 5, rng);
    const Mat Y = net.forward(X);
    for (int j = 0; j < 5; ++j) {
        const Vec y = net.forward(Vec(X.col(j)));
        CHECK((Y.col(j) - y).lpNorm<Eigen::Infinity>() < 1e-12);
    }
    CHECK(Y.allFinite());
    CHECK_THROWS_AS(net.forward(tu::vec({1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("single-layer gradients are exact outer products") {
    Rng rng(4);
    Mlp net({3, 2}, rng);
    const Vec x = tu::vec({0.5, -1.5, 2.0});
    Mlp::Tape tape;
    net.forward(Mat(x), tape);
    Mat upstream(2, 1);
    upstream << 0.7, -0.2;
    auto grads = net.zero_grads();
    const Mat dx = net.backward(tape, upstream, grads);
    CHECK((grads.dW[0] - upstream * x.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((grads.db[0] - upstream.col(0)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((dx - net.weights()[0].transpose() * upstream).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("reverse-mode gradients match central differences") {
    Rng rng(5);
    Mlp net({3, 5, 4, 2}, rng);
    const Vec x = tu::vec({0.4, -0.3, 0.9});
    auto loss = [&] { return net.forward(x).sum(); };

    Mlp::Tape tape;
    net.forward(Mat(x), tape);
    auto grads = net.zero_grads();
    const Mat dx = net.backward(tape, Mat::Ones(2, 1), grads);

    const double h = 1e-6;
    for (int layer = 0; layer < net.n_layers(); ++layer) {
        Mat& W = net.weights()[layer];
        for (int r = 0; r < W.rows(); ++r)
            for (int c = 0; c < W.cols(); ++c) {
                const double keep = W(r, c);
                W(r, c) = keep + h;
                const double up = loss();
                W(r, c) = keep - h;
                const double dn = loss();
                W(r, c) = keep;
                const double fd = (up - dn) / (2 * h);
                CHECK(std::abs(grads.dW[layer](r, c) - fd) < 1e-5 * (1 + std::abs(fd)));
            }
        Vec& b = net.biases()[layer];
        for (int r = 0; r < b.size(); ++r) {
            const double keep = b[r];
            b[r] = keep + h;
            const double up = loss();
            b[r] = keep - h;
            const double dn = loss();
            b[r] = keep;
            const double fd = (up - dn) / (2 * h);
            CHECK(std::abs(grads.db[layer][r] - fd) < 1e-5 * (1 + std::abs(fd)));
        }
    }
    // Input gradient against finite differences too.
    Vec xv = x;
    auto loss_x = [&] { return net.forward(xv).sum(); };
    for (int r = 0; r < 3; ++r) {
        const double keep = xv[r];
        xv[r] = keep + h;
        const double up = loss_x();
        xv[r] = keep - h;
        const double dn = loss_x();
        xv[r] = keep;
        const double fd = (up - dn) / (2 * h);
        CHECK(std::abs(dx(r, 0) - fd) < 1e-5 * (1 + std::abs(fd)));
    }
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
    Rng rng(6);
    const Mlp net({2, 4, 3}, rng);
    Mlp::Tape tape;
    net.forward(random_mat(2, 7, rng), tape);
    auto grads = net.zero_grads();
    const Mat dx = net.backward(tape, Mat::Zero(3, 7), grads);
    for (const auto& g : grads.dW) CHECK((g.array() == 0.0).all());
    for (const auto& g : grads.db) CHECK((g.array() == 0.0).all());
    CHECK((dx.array() == 0.0).all());

    CHECK_THROWS_AS(net.backward(tape, Mat::Zero(2, 7), grads), std::invalid_argument);
    CHECK_THROWS_AS(net.backward(tape, Mat::Zero(3, 6), grads), std::invalid_argument);
}

TEST_CASE("network JSON round-trips through text bit-exactly") {
    Rng rng(9);
    const Mlp net({3, 7, 2}, rng);
    const auto parsed = nlohmann::json::parse(net.to_json().dump());
    const Mlp back = Mlp::from_json(parsed);
    CHECK(same_weights(net, back));
    const Vec x = tu::vec({0.1, 0.2, 0.3});
    CHECK((net.forward(x).array() == back.forward(x).array()).all());

    auto bad = net.to_json();
    bad["activation"] = "relu";
    CHECK_THROWS_AS(Mlp::from_json(bad), std::invalid_argument);
}

TEST_CASE("optimizer ignores zero gradients and scales the first step by lr") {
    Rng rng(10);
    Mlp net({2, 3}, rng);
    const Mlp before = net;
    AdamState opt(net, 0.003);
    CHECK(opt.step(net, net.zero_grads()));
    CHECK(same_weights(net, before));
    CHECK(opt.step_count() == 1);

    // Bias correction makes the very first step lr * g / (|g| + eps).
    AdamState fresh(net, 0.003);
    auto grads = net.zero_grads();
    grads.dW[0](1, 0) = 3.0;
    const double w_before = net.weights()[0](1, 0);
    CHECK(fresh.step(net, grads));
    CHECK(net.weights()[0](1, 0) ==
          doctest::Approx(w_before - 0.003).epsilon(1e-6));
    // Untouched coordinates stay put.
    CHECK(net.weights()[0](0, 0) == before.weights()[0](0, 0));
    CHECK(fresh.step_count() == 1);
}

TEST_CASE("optimizer skips non-finite gradients without touching parameters") {
    Rng rng(11);
    Mlp net({2, 3}, rng);
    const Mlp before = net;
    AdamState opt(net, 0.003);
    auto grads = net.zero_grads();
    grads.dW[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(opt.step(net, grads));
    CHECK(same_weights(net, before));
    CHECK(opt.step_count() == 0);
}

TEST_CASE("identically seeded optimizers follow identical trajectories") {
    auto run = [] {
        Rng rng(12);
        Mlp net({2, 4, 1}, rng);
        AdamState opt(net, 0.01);
        const Mat X = random_mat(2, 8, rng);
        const Mat y = random_mat(1, 8, rng);
        for (int it = 0; it < 25; ++it) {
            Mlp::Tape tape;
            const Mat pred = net.forward(X, tape);
            auto grads = net.zero_grads();
            net.backward(tape, (2.0 / 8.0) * (pred - y), grads);
            opt.step(net, grads);
        }
        return net;
    };
    CHECK(same_weights(run(), run()));
}

TEST_CASE("optimizer state survives a JSON round-trip mid-run") {
    Rng rng(13);
    Mlp net({2, 4, 1}, rng);
    AdamState opt(net, 0.01);
    const Mat X = random_mat(2, 8, rng);
    const Mat y = random_mat(1, 8, rng);
    auto one_step = [&](Mlp& n, AdamState& o) {
        Mlp::Tape tape;
        const Mat pred = n.forward(X, tape);
        auto grads = n.zero_grads();
        n.backward(tape, (2.0 / 8.0) * (pred - y), grads);
        o.step(n, grads);
    };
    for (int it = 0; it < 10; ++it) one_step(net, opt);

    Mlp copy = Mlp::from_json(nlohmann::json::parse(net.to_json().dump()));
    AdamState opt_copy = AdamState::from_json(nlohmann::json::parse(opt.to_json().dump()));
    for (int it = 0; it < 10; ++it) {
        one_step(net, opt);
        one_step(copy, opt_copy);
    }
    CHECK(same_weights(net, copy));
}

TEST_CASE("gradient descent on a regression probe reduces the loss") {
    Rng rng(14);
    Mlp net({2, 8, 1}, rng);
    AdamState opt(net, 0.01);
    const Mat X = random_mat(2, 16, rng);
    Mat y(1, 16);
    for (int j = 0; j < 16; ++j) y(0, j) = 0.5 * X(0, j) - 0.25 * X(1, j) + 0.1;
    auto mse = [&](const Mat& pred) { return (pred - y).squaredNorm() / 16.0; };
    const double initial = mse(net.forward(X));
    for (int it = 0; it < 300; ++it) {
        Mlp::Tape tape;
        const Mat pred = net.forward(X, tape);
        auto grads = net.zero_grads();
        net.backward(tape, (2.0 / 16.0) * (pred - y), grads);
        opt.step(net, grads);
    }
    CHECK(mse(net.forward(X)) < 0.2 * initial);
}

TEST_CASE("scalar optimizer steps against the gradient and rejects NaN") {
    ScalarAdam opt(0.01);
    double p = 1.0;
    CHECK(opt.step(p, 2.0));
    CHECK(p < 1.0);
    CHECK(p == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
    CHECK_FALSE(opt.step(p, std::numeric_limits<double>::quiet_NaN()));

    ScalarAdam back = ScalarAdam::from_json(nlohmann::json::parse(opt.to_json().dump()));
    double p1 = p, p2 = p;
    opt.step(p1, -0.5);
    back.step(p2, -0.5);
    CHECK(p1 == p2);
}

TEST_CASE("agent configuration rejects out-of-range settings") {
    auto bad = [](auto mutate) {
        AgentConfig cfg = small_config();
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    };
    CHECK_NOTHROW(small_config().validate());
    bad([](AgentConfig& c) { c.lr = 0.0; });
    bad([](AgentConfig& c) { c.gamma = 1.5; });
    bad([](AgentConfig& c) { c.gamma = -0.1; });
    bad([](AgentConfig& c) { c.tau = 0.0; });
    bad([](AgentConfig& c) { c.tau = 1.5; });
    bad([](AgentConfig& c) { c.a_max = 0.0; });
    bad([](AgentConfig& c) { c.alpha_init = 0.0; });
    bad([](AgentConfig& c) { c.batch_size = 0; });
    bad([](AgentConfig& c) { c.log_std_min = 3.0; });
    bad([](AgentConfig& c) { c.actor_hidden.clear(); });
    CHECK_THROWS_AS(SacAgent(0, 2, small_config(), 1), std::invalid_argument);
}

TEST_CASE("stochastic actions respect the step bound, deterministic ones repeat") {
    const SacAgent agent(2, 2, small_config(), 21);
    Rng rng(22);
    const Vec s = tu::vec({0.4, 0.6});
    const Vec g = tu::vec({0.5, 0.5});
    for (int i = 0; i < 1000; ++i) {
        const auto [a, logp] = agent.act_stochastic(s, g, rng);
        CHECK((a.array().abs() <= 0.2).all());
        CHECK(std::isfinite(logp));
    }
    const Vec d1 = agent.act_deterministic(s, g);
    const Vec d2 = agent.act_deterministic(s, g);
    CHECK((d1.array() == d2.array()).all());
    CHECK((d1.array().abs() < 0.2).all());  // tanh never saturates exactly
}

TEST_CASE("collapsing the policy width makes sampling deterministic") {
    const SacAgent agent(2, 2, small_config(), 23);
    auto doc = agent.to_json();
    // Pin the log-std head far below the clamp floor: sigma = exp(-20).
    auto& w_last = doc["actor"]["weights"].back();
    auto& b_last = doc["actor"]["biases"].back();
    for (int r = 2; r < 4; ++r) {
        for (auto& x : w_last[r]) x = 0.0;
        b_last[r] = -30.0;
    }
    const SacAgent limit = SacAgent::from_json(doc);
    Rng rng(24);
    const Vec s = tu::vec({0.3, 0.8});
    const Vec g = tu::vec({0.2, 0.9});
    const Vec det = limit.act_deterministic(s, g);
    for (int i = 0; i < 100; ++i) {
        const auto [a, logp] = limit.act_stochastic(s, g, rng);
        CHECK((a - det).lpNorm<Eigen::Infinity>() < 1e-6);
    }
}

TEST_CASE("critics regress to the reward on terminal-only batches") {
    AgentConfig cfg = small_config();
    cfg.lr = 0.01;
    cfg.auto_alpha = false;
    SacAgent agent(2, 2, cfg, 25);
    Rng rng(26);
    for (int it = 0; it < 2000; ++it) {
        const SacBatch batch = random_batch(2, 2, 32, rng, 2.5, 1.0);
        const LossReport rep = agent.update(batch, rng);
        CHECK_FALSE(rep.skipped);
    }
    double err = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Vec s = tu::vec({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
        const Vec g = tu::vec({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
        const Vec a = tu::vec({rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)});
        err += std::abs(agent.q_mean(s, g, a) - 2.5);
    }
    CHECK(err / 20.0 < 0.2);
}

TEST_CASE("repeated updates on one batch shrink the critic loss") {
    AgentConfig cfg = small_config();
    cfg.auto_alpha = false;
    SacAgent agent(2, 2, cfg, 27);
    Rng rng(28);
    const SacBatch batch = random_batch(2, 2, 32, rng, 1.0, 1.0);
    double first = 0.0, last = 0.0;
    for (int it = 0; it < 50; ++it) {
        const LossReport rep = agent.update(batch, rng);
        if (it == 0) first = rep.critic1;
        last = rep.critic1;
    }
    CHECK(last < first);
}

TEST_CASE("unit target blend copies the critics into the targets") {
    AgentConfig cfg = small_config();
    cfg.tau = 1.0;
    SacAgent agent(2, 2, cfg, 29);
    Rng rng(30);
    agent.update(random_batch(2, 2, 16, rng, 0.5, 0.0), rng);
    CHECK(same_weights(agent.critic1(), agent.critic1_target()));
    CHECK(same_weights(agent.critic2(), agent.critic2_target()));
}

TEST_CASE("freshly built targets start as critic copies") {
    const SacAgent agent(3, 2, small_config(), 31);
    CHECK(same_weights(agent.critic1(), agent.critic1_target()));
    CHECK(same_weights(agent.critic2(), agent.critic2_target()));
    CHECK_FALSE(same_weights(agent.critic1(), agent.critic2()));
}

TEST_CASE("the goal input conditions both actor and critics") {
    const SacAgent agent(2, 2, small_config(), 32);
    const Vec s = tu::vec({0.5, 0.5});
    const Vec a = tu::vec({0.1, -0.1});
    const Vec g1 = tu::vec({0.2, 0.2});
    const Vec g2 = tu::vec({0.9, 0.9});
    CHECK(agent.q_mean(s, g1, a) != agent.q_mean(s, g2, a));
    CHECK((agent.act_deterministic(s, g1) - agent.act_deterministic(s, g2))
              .lpNorm<Eigen::Infinity>() > 0.0);
    CHECK(agent.q_min(s, g1, a) <= agent.q_mean(s, g1, a) + 1e-12);
}

TEST_CASE("agent checkpoints restore behavior and update trajectories") {
    AgentConfig cfg = small_config();
    SacAgent agent(2, 2, cfg, 33);
    Rng warm(34);
    for (int it = 0; it < 5; ++it) agent.update(random_batch(2, 2, 16, warm, 0.5, 0.0), warm);

    SacAgent copy = SacAgent::from_json(nlohmann::json::parse(agent.to_json().dump()));
    const Vec s = tu::vec({0.25, 0.75});
    const Vec g = tu::vec({0.5, 0.5});
    CHECK((agent.act_deterministic(s, g).array() == copy.act_deterministic(s, g).array()).all());
    CHECK(agent.alpha() == copy.alpha());

    Rng ra(35), rb(35), batch_rng(36);
    const SacBatch batch = random_batch(2, 2, 16, batch_rng, 0.5, 0.0);
    const LossReport rep_a = agent.update(batch, ra);
    const LossReport rep_b = copy.update(batch, rb);
    CHECK(rep_a.critic1 == rep_b.critic1);
    CHECK(rep_a.actor == rep_b.actor);
    CHECK(rep_a.alpha == rep_b.alpha);
    CHECK((agent.act_deterministic(s, g).array() == copy.act_deterministic(s, g).array()).all());

    auto bad = agent.to_json();
    bad["version"] = 2;
    CHECK_THROWS_AS(SacAgent::from_json(bad), std::invalid_argument);
}

TEST_CASE("non-finite batches are skipped without touching parameters") {
    SacAgent agent(2, 2, small_config(), 37);
    const auto before = agent.to_json();
    Rng rng(38);
    SacBatch batch = random_batch(2, 2, 16, rng, 1.0, 0.0);
    batch.r[3] = std::numeric_limits<double>::quiet_NaN();
    const LossReport rep = agent.update(batch, rng);
    CHECK(rep.skipped);
    CHECK(agent.to_json() == before);

    SacBatch empty;
    empty.s = Mat(2, 0);
    empty.goal = Mat(2, 0);
    empty.a = Mat(2, 0);
    empty.r = Vec(0);
    empty.s_next = Mat(2, 0);
    empty.terminal = Vec(0);
    CHECK_THROWS_AS(agent.update(empty, rng), std::invalid_argument);
}

TEST_CASE("entropy coefficient adapts only when auto tuning is on") {
    AgentConfig cfg = small_config();
    cfg.auto_alpha = false;
    SacAgent frozen(2, 2, cfg, 39);
    Rng rng(40);
    for (int it = 0; it < 20; ++it) frozen.update(random_batch(2, 2, 16, rng, 0.5, 0.0), rng);
    CHECK(frozen.alpha() == doctest::Approx(0.2).epsilon(1e-15));

    cfg.auto_alpha = true;
    SacAgent tuned(2, 2, cfg, 39);
    double last = 0.0;
    for (int it = 0; it < 20; ++it)
        last = tuned.update(random_batch(2, 2, 16, rng, 0.5, 0.0), rng).alpha;
    CHECK(tuned.alpha() != 0.2);
    CHECK(tuned.alpha() > 0.0);
    CHECK(std::isfinite(tuned.alpha()));
    CHECK(last == tuned.alpha());
}

TEST_CASE("goal sampling falls back to uniform while the frontier is small") {
    const SacAgent agent(2, 2, small_config(), 41);
    const SpecSchema schema = tu::two_lower();
    const SamplerConfig cfg;
    const DesignState s0{tu::vec({0.5, 0.5})};
    ParetoBuffer buffer;
    Rng rng(42);

    GoalSampleRecord record;
    const TargetGoal g = sample_goal(agent, buffer, s0, schema, cfg, rng, &record);
    CHECK(record.uniform);
    CHECK(record.frontier_size == 0);
    CHECK(record.candidates.size() == 1);
    CHECK(record.chosen == 0);
    CHECK((record.candidates[0].array() == g.z_hat.array()).all());
    CHECK(g.z_hat[0] >= 40.0);
    CHECK(g.z_hat[0] <= 60.0);

    // Exactly n_uniform entries still samples uniformly.
    buffer.insert_achieved(TargetGoal{tu::vec({41.0, 19.0})}, schema);
    buffer.insert_achieved(TargetGoal{tu::vec({45.0, 15.0})}, schema);
    buffer.insert_achieved(TargetGoal{tu::vec({50.0, 10.0})}, schema);
    buffer.insert_achieved(TargetGoal{tu::vec({55.0, 5.0})}, schema);
    CHECK(buffer.size() == 4);
    sample_goal(agent, buffer, s0, schema, cfg, rng, &record);
    CHECK(record.uniform);
}

TEST_CASE("goal sampling scores candidates with the critics beyond the threshold") {
    const SacAgent agent(2, 2, small_config(), 43);
    const SpecSchema schema = tu::two_lower();
    const SamplerConfig cfg;
    const DesignState s0{tu::vec({0.5, 0.5})};
    ParetoBuffer buffer;
    buffer.insert_achieved(TargetGoal{tu::vec({41.0, 19.0})}, schema);
    buffer.insert_achieved(TargetGoal{tu::vec({45.0, 15.0})}, schema);
    buffer.insert_achieved(TargetGoal{tu::vec({50.0, 10.0})}, schema);
    buffer.insert_achieved(TargetGoal{tu::vec({55.0, 5.0})}, schema);
    buffer.insert_achieved(TargetGoal{tu::vec({59.0, 2.0})}, schema);
    REQUIRE(buffer.size() == 5);

    const std::vector<Vec> snapshot = buffer.entries();
    Rng rng(44);
    GoalSampleRecord record;
    const TargetGoal g = sample_goal(agent, buffer, s0, schema, cfg, rng, &record);
    CHECK_FALSE(record.uniform);
    CHECK(record.frontier_size == 5);
    CHECK(record.candidates.size() == 16);
    CHECK(record.q_scores.size() == 16);
    CHECK(record.chosen >= 0);
    CHECK(record.chosen < 16);
    CHECK((g.z_hat.array() == record.candidates[record.chosen].array()).all());
    for (const auto& c : record.candidates) {
        CHECK(c[0] >= 40.0);
        CHECK(c[0] <= 60.0);
        CHECK(c[1] >= 1.0);
        CHECK(c[1] <= 20.0);
    }
    // The frontier never dominated these draws, so none needed the cap.
    if (record.rejection_fallbacks == 0)
        for (const auto& c : record.candidates)
            CHECK_FALSE(buffer.is_dominated(TargetGoal{c}, schema));

    // Inputs are untouched.
    REQUIRE(buffer.entries().size() == snapshot.size());
    for (std::size_t i = 0; i < snapshot.size(); ++i)
        CHECK((buffer.entries()[i].array() == snapshot[i].array()).all());

    // Seeded reproducibility.
    Rng r1(45), r2(45);
    GoalSampleRecord rec1, rec2;
    const TargetGoal g1 = sample_goal(agent, buffer, s0, schema, cfg, r1, &rec1);
    const TargetGoal g2 = sample_goal(agent, buffer, s0, schema, cfg, r2, &rec2);
    CHECK((g1.z_hat.array() == g2.z_hat.array()).all());
    CHECK(rec1.chosen == rec2.chosen);
}

TEST_CASE("a frontier that dominates everything triggers the rejection cap") {
    const SacAgent agent(2, 2, small_config(), 46);
    const SpecSchema schema = tu::two_lower();
    SamplerConfig cfg;
    cfg.n_uniform = 0;
    const DesignState s0{tu::vec({0.5, 0.5})};
    ParetoBuffer buffer;
    buffer.insert_achieved(TargetGoal{tu::vec({60.0, 20.0})}, schema);  // the whole box
    Rng rng(47);
    GoalSampleRecord record;
    const TargetGoal g = sample_goal(agent, buffer, s0, schema, cfg, rng, &record);
    CHECK_FALSE(record.uniform);
    CHECK(record.rejection_fallbacks == 16);
    CHECK(g.z_hat[0] >= 40.0);
    CHECK(g.z_hat[0] <= 60.0);

    SamplerConfig bad;
    bad.temperature = 0.0;
    CHECK_THROWS_AS(sample_goal(agent, buffer, s0, schema, bad, rng, nullptr),
                    std::invalid_argument);
}
