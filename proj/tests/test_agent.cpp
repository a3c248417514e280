#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cascadeforge/trainer.hpp"

using namespace cascadeforge;

namespace {

State state_from(std::vector<double> entries) {
    State s;
    s.entries = std::move(entries);
    return s;
}

// Random transitions over random states for a 3-detector problem.
std::vector<ReplayEntry> random_batch(Rng& rng, int n, std::size_t count) {
    std::vector<ReplayEntry> batch;
    for (std::size_t i = 0; i < count; ++i) {
        ReplayEntry e;
        std::vector<double> entries(static_cast<std::size_t>(n));
        for (auto& v : entries) v = rng.uniform01() < 0.4 ? -1.0 : rng.uniform01();
        e.state = state_from(entries);
        // pick a legal action index
        std::vector<int> legal;
        for (int a = 0; a < n + 2; ++a) {
            bool invoke = a < n;
            if (!invoke || e.state.entries[static_cast<std::size_t>(a)] == -1.0)
                legal.push_back(a);
        }
        e.action_index = legal[rng.below(legal.size())];
        e.terminal = rng.uniform01() < 0.5;
        e.reward = e.terminal ? rng.uniform(-3.0, 3.0) : 0.0;
        if (!e.terminal) {
            auto next = e.state.entries;
            if (e.action_index < n) next[static_cast<std::size_t>(e.action_index)] = rng.uniform01();
            e.next_state = state_from(next);
        }
        batch.push_back(std::move(e));
    }
    return batch;
}

double fd_relative_error(const PolicyParams& params, std::span<const ReplayEntry> batch,
                         const LossConfig& cfg, double h) {
    auto targets = compute_targets(params, batch, cfg.gamma);
    auto advantages = compute_advantages(params, batch, targets);
    std::vector<double> grad;
    loss_with_targets(params, batch, targets, advantages, cfg, &grad);

    std::vector<double> flat;
    params.to_flat(flat);
    double num = 0.0, den_a = 0.0, den_b = 0.0;
    PolicyParams probe = params;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        double saved = flat[i];
        flat[i] = saved + h;
        probe.from_flat(flat);
        double up = loss_with_targets(probe, batch, targets, advantages, cfg, nullptr);
        flat[i] = saved - h;
        probe.from_flat(flat);
        double down = loss_with_targets(probe, batch, targets, advantages, cfg, nullptr);
        flat[i] = saved;
        double fd = (up - down) / (2.0 * h);
        num += (grad[i] - fd) * (grad[i] - fd);
        den_a += grad[i] * grad[i];
        den_b += fd * fd;
    }
    probe.from_flat(flat);
    double den = std::sqrt(std::max(den_a, den_b));
    return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

} // namespace

TEST_CASE("zero weights give a uniform masked distribution and zero value") {
    PolicyParams p = PolicyParams::zeros(5);
    ForwardResult all = forward(p, initial_state(5));
    for (double prob : all.probs) CHECK(prob == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    CHECK(all.value == 0.0);

    // one detector used: uniform over the remaining 6 legal actions
    State s = initial_state(5);
    s.entries[2] = 0.8;
    ForwardResult masked = forward(p, s);
    CHECK(masked.probs[2] == 0.0);
    for (int a = 0; a < 7; ++a)
        if (a != 2) CHECK(masked.probs[static_cast<std::size_t>(a)] == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("masked distributions always normalize and zero illegal actions") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + static_cast<int>(rng.below(4));
        PolicyParams p = PolicyParams::init(n, 16, rng);
        std::vector<double> entries(static_cast<std::size_t>(n));
        for (auto& v : entries) v = rng.uniform01() < 0.5 ? -1.0 : rng.uniform01();
        State s = state_from(entries);
        ForwardResult f = forward(p, s);
        double sum = 0.0;
        for (int a = 0; a < n + 2; ++a) {
            if (a < n && s.invoked(static_cast<std::size_t>(a)))
                CHECK(f.probs[static_cast<std::size_t>(a)] == 0.0);
            sum += f.probs[static_cast<std::size_t>(a)];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("act: argmax with lowest-index ties, reproducible sampling") {
    // craft a network whose logits are controlled through the policy bias
    PolicyParams p = PolicyParams::zeros(1);
    // actions: invoke0, benign, phishing
    p.bp = {std::log(0.1), std::log(0.7), std::log(0.2)};
    State s = initial_state(1);
    CHECK(act(p, s, ActMode::kDeterministic) == Action::classify(kBenign));

    p.bp = {std::log(0.5), std::log(0.5), std::log(1e-9)};
    CHECK(act(p, s, ActMode::kDeterministic) == Action::invoke(0)); // tie -> lowest index

    Rng r1(42), r2(42);
    p.bp = {0.3, 0.2, 0.1};
    for (int i = 0; i < 20; ++i)
        CHECK(act(p, s, ActMode::kStochastic, &r1) == act(p, s, ActMode::kStochastic, &r2));
    CHECK_THROWS_AS(act(p, s, ActMode::kStochastic, nullptr), std::invalid_argument);
}

TEST_CASE("adding a constant to policy biases leaves the argmax unchanged") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        PolicyParams p = PolicyParams::init(3, 8, rng);
        State s = initial_state(3);
        if (rng.uniform01() < 0.5) s.entries[rng.below(3)] = rng.uniform01();
        Action before = act(p, s, ActMode::kDeterministic);
        double shift = rng.uniform(-5.0, 5.0);
        for (auto& b : p.bp) b += shift;
        CHECK(act(p, s, ActMode::kDeterministic) == before);
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(2718);
    LossConfig cfg;
    cfg.gamma = 0.9;
    cfg.value_coef = 0.5;
    cfg.entropy_coef = 0.01;
    double worst = 0.0;
    for (int point = 0; point < 20; ++point) {
        PolicyParams p = PolicyParams::init(3, 8, rng);
        auto batch = random_batch(rng, 3, 4);
        worst = std::max(worst, fd_relative_error(p, batch, cfg, 1e-5));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("zero advantage yields a zero policy gradient") {
    PolicyParams p = PolicyParams::zeros(2);
    // terminal transition with reward 0: target = 0 = V(s), advantage 0
    ReplayEntry e;
    e.state = initial_state(2);
    e.action_index = 0;
    e.reward = 0.0;
    e.terminal = true;
    std::vector<ReplayEntry> batch = {e};
    LossConfig cfg;
    cfg.entropy_coef = 0.0; // isolate the policy term
    cfg.value_coef = 0.0;
    auto grad = gradients(p, batch, cfg);
    for (double g : grad) CHECK(g == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("gamma 0 makes the target the immediate reward") {
    Rng rng(9);
    PolicyParams p = PolicyParams::init(2, 8, rng);
    ReplayEntry e;
    e.state = initial_state(2);
    e.action_index = 1;
    e.reward = 0.0;
    e.terminal = false;
    State next = initial_state(2);
    next.entries[1] = 0.4;
    e.next_state = next;
    std::vector<ReplayEntry> batch = {e};
    auto targets = compute_targets(p, batch, 0.0);
    CHECK(targets[0] == doctest::Approx(0.0));
    // and with gamma 1 the target bootstraps the next value
    auto boot = compute_targets(p, batch, 1.0);
    CHECK(boot[0] == doctest::Approx(forward(p, next).value));
}

TEST_CASE("non-finite parameters abort with a diagnostic") {
    PolicyParams p = PolicyParams::zeros(2);
    p.w1[0] = std::numeric_limits<double>::infinity();
    State s = initial_state(2);
    s.entries[0] = 0.5;
    CHECK_THROWS_WITH(forward(p, s), doctest::Contains("non-finite"));
}

TEST_CASE("replay buffer caps at capacity with FIFO eviction") {
    ReplayBuffer buf(5000);
    for (int i = 0; i < 6000; ++i) {
        ReplayEntry e;
        e.state = initial_state(1);
        e.action_index = i; // marker
        e.reward = 0;
        e.terminal = true;
        buf.push(std::move(e));
    }
    CHECK(buf.size() == 5000);
    Rng rng(1);
    for (const auto& e : buf.sample(200, rng)) CHECK(e.action_index >= 1000); // oldest evicted
}

TEST_CASE("RMSProp moves parameters in the descent direction") {
    PolicyParams p = PolicyParams::zeros(2);
    std::vector<double> grad(p.count(), 0.0);
    grad[0] = 1.0;
    RmsProp opt(0.001, 0.99, 1e-8);
    opt.step(p, grad);
    CHECK(p.w1[0] < 0.0);
    std::vector<double> flat;
    p.to_flat(flat);
    for (std::size_t i = 1; i < flat.size(); ++i) CHECK(flat[i] == 0.0);
}

namespace {

ScoreTable tiny_pool_table(int n_samples, std::uint64_t seed) {
    SynthSpec spec;
    spec.n_samples = n_samples;
    spec.seed = seed;
    spec.detectors = {{1.0, CostLaw::kConstant, 0.01, 0, 0, 0.0},
                      {0.55, CostLaw::kConstant, 10.0, 0, 0, 0.0}};
    return synthesize(spec);
}

} // namespace

TEST_CASE("training is bit-reproducible for a fixed seed") {
    ScoreTable table = tiny_pool_table(300, 7);
    auto parts = split(table, {0.75, 0.10, 0.15}, 1);
    RewardScheme scheme = RewardScheme::preset(3, CostCurve::two_region(1.0, 34.0));
    TrainConfig tc;
    tc.epochs = 2;
    tc.seed = 123;
    TrainResult a = train(parts[0], parts[1], scheme, std::nullopt, tc);
    TrainResult b = train(parts[0], parts[1], scheme, std::nullopt, tc);
    CHECK(a.params == b.params);
    CHECK(a.best_epoch == b.best_epoch);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].mean_train_reward == b.log[i].mean_train_reward);
        CHECK(a.log[i].val_reward == b.log[i].val_reward);
    }
}

TEST_CASE("no gradient step consumes replay before the warmup") {
    // with warmup >= total episodes the parameters never move
    ScoreTable table = tiny_pool_table(120, 3);
    auto parts = split(table, {0.75, 0.10, 0.15}, 1);
    RewardScheme scheme = RewardScheme::preset(3, CostCurve::two_region(1.0, 34.0));
    TrainConfig tc;
    tc.epochs = 1;
    tc.seed = 5;
    tc.warmup_episodes = 1000; // more than one epoch of episodes
    tc.optimistic_init = false;
    TrainResult r = train(parts[0], parts[1], scheme, std::nullopt, tc);
    Rng init_rng(mix_seed(tc.seed, 0x1417));
    PolicyParams untouched = PolicyParams::init(2, tc.hidden, init_rng);
    CHECK(r.params == untouched);
}

TEST_CASE("train validates inputs") {
    ScoreTable table = tiny_pool_table(100, 3);
    auto parts = split(table, {0.75, 0.10, 0.15}, 1);
    RewardScheme scheme = RewardScheme::preset(3, CostCurve::two_region(1.0, 34.0));
    TrainConfig tc;
    tc.lr = -1.0;
    CHECK_THROWS_AS(train(parts[0], parts[1], scheme, std::nullopt, tc), std::invalid_argument);

    TrainConfig ok;
    MetricGoal goal;
    goal.batch_size = 100000; // larger than the training set
    CHECK_THROWS_AS(train(parts[0], parts[1], scheme, goal, ok), std::invalid_argument);
}
