#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "cascadeforge/env.hpp"
#include "cascadeforge/rng.hpp"

using namespace cascadeforge;

namespace {

SampleRecord make_sample(int label, std::vector<double> scores, std::vector<double> costs) {
    SampleRecord s;
    s.sample_id = "x";
    s.label = label;
    s.scores = std::move(scores);
    s.costs = std::move(costs);
    return s;
}

} // namespace

TEST_CASE("initial_state fills with the sentinel") {
    State s = initial_state(5);
    CHECK(s.entries == std::vector<double>{-1, -1, -1, -1, -1});
    CHECK(initial_state(1).entries == std::vector<double>{-1});
    CHECK_THROWS_AS(initial_state(0), std::invalid_argument);
}

TEST_CASE("legal_actions tracks uninvoked detectors") {
    State s = initial_state(3);
    auto acts = legal_actions(s);
    CHECK(acts.size() == 5); // 3 invokes + 2 classifies

    State partial;
    partial.entries = {0.4, -1};
    acts = legal_actions(partial);
    REQUIRE(acts.size() == 3);
    CHECK(acts[0] == Action::invoke(1));
    CHECK(acts[1] == Action::classify(kBenign));
    CHECK(acts[2] == Action::classify(kPhishing));

    State done;
    done.entries = {0.4, 0.7};
    acts = legal_actions(done);
    REQUIRE(acts.size() == 2);
    CHECK(!acts[0].is_invoke());
    CHECK(!acts[1].is_invoke());
}

TEST_CASE("step applies invoke and classify transitions") {
    auto sample = make_sample(1, {0.9, 0.2}, {1.5, 0.1});
    State s = initial_state(2);

    Transition t = step(s, Action::invoke(0), sample);
    REQUIRE(t.next.has_value());
    CHECK(t.next->entries == std::vector<double>{0.9, -1});
    CHECK(t.step_cost == doctest::Approx(1.5));

    Transition c = step(*t.next, Action::classify(kPhishing), sample);
    CHECK(!c.next.has_value());
    CHECK(c.terminal_class == kPhishing);
    CHECK(c.step_cost == 0.0);
    CHECK(outcome_of(kPhishing, sample.label) == Outcome::kTP);

    CHECK_THROWS_AS(step(*t.next, Action::invoke(0), sample), std::logic_error);
}

TEST_CASE("run_episode with classify-only policy") {
    auto sample = make_sample(0, {0.9, 0.2}, {1.5, 0.1});
    Episode ep = run_episode([](const State&) { return Action::classify(kBenign); }, sample);
    CHECK(ep.transitions.size() == 1);
    CHECK(ep.total_cost == 0.0);
    CHECK(ep.predicted == kBenign);
    CHECK(ep.outcome == Outcome::kTN);
}

TEST_CASE("run_episode invoking all then classifying by mean score") {
    auto sample = make_sample(1, {0.9, 0.2}, {1.5, 0.1});
    auto policy = [](const State& s) -> Action {
        for (std::size_t i = 0; i < s.size(); ++i)
            if (!s.invoked(i)) return Action::invoke(static_cast<int>(i));
        double mean = 0;
        for (double v : s.entries) mean += v;
        mean /= static_cast<double>(s.size());
        return Action::classify(mean >= 0.5 ? kPhishing : kBenign);
    };
    Episode ep = run_episode(policy, sample);
    CHECK(ep.total_cost == doctest::Approx(1.6));
    CHECK(ep.predicted == kPhishing);
    CHECK(ep.outcome == Outcome::kTP);
    CHECK(ep.transitions.size() == 3);
    CHECK(ep.detectors_invoked() == 2);
}

TEST_CASE("stochastic policies replay identically under a fixed seed") {
    auto sample = make_sample(1, {0.9, 0.2, 0.5}, {1.0, 2.0, 3.0});
    auto run_with_seed = [&](std::uint64_t seed) {
        Rng rng(seed);
        auto policy = [&](const State& s) -> Action {
            auto acts = legal_actions(s);
            return acts[rng.below(acts.size())];
        };
        return run_episode(policy, sample);
    };
    Episode a = run_with_seed(9);
    Episode b = run_with_seed(9);
    REQUIRE(a.transitions.size() == b.transitions.size());
    for (std::size_t i = 0; i < a.transitions.size(); ++i)
        CHECK(a.transitions[i].action == b.transitions[i].action);
    CHECK(a.total_cost == b.total_cost);
}

TEST_CASE("episode invariants hold under random policies") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng.below(5));
        std::vector<double> scores, costs;
        for (int i = 0; i < n; ++i) {
            scores.push_back(rng.uniform01());
            costs.push_back(rng.uniform01() * 5.0);
        }
        auto sample = make_sample(static_cast<int>(rng.below(2)), scores, costs);
        auto policy = [&](const State& s) -> Action {
            auto acts = legal_actions(s);
            return acts[rng.below(acts.size())];
        };
        Episode ep = run_episode(policy, sample);

        CHECK(ep.transitions.size() <= static_cast<std::size_t>(n) + 1);
        // invoked entries stay in range, each detector at most once
        std::vector<int> invoked_count(static_cast<std::size_t>(n), 0);
        double cost_sum = 0.0;
        for (const auto& t : ep.transitions) {
            for (double v : t.state.entries) CHECK((v == -1.0 || (v >= 0.0 && v <= 1.0)));
            if (t.action.is_invoke()) ++invoked_count[static_cast<std::size_t>(t.action.detector())];
            cost_sum += t.step_cost;
        }
        for (int c : invoked_count) CHECK(c <= 1);
        CHECK(ep.total_cost == doctest::Approx(cost_sum));

        // outcome mapping is exhaustive and consistent
        Outcome expect = ep.predicted == kPhishing
                             ? (ep.label == 1 ? Outcome::kTP : Outcome::kFP)
                             : (ep.label == 0 ? Outcome::kTN : Outcome::kFN);
        CHECK(ep.outcome == expect);
    }
}

TEST_CASE("total cost is permutation-invariant over the invoked set") {
    auto sample = make_sample(0, {0.1, 0.2, 0.3}, {1.0, 2.0, 4.0});
    auto run_order = [&](std::vector<int> order) {
        std::size_t next = 0;
        auto policy = [&](const State&) -> Action {
            if (next < order.size()) return Action::invoke(order[next++]);
            return Action::classify(kBenign);
        };
        return run_episode(policy, sample).total_cost;
    };
    CHECK(run_order({0, 1, 2}) == doctest::Approx(7.0));
    CHECK(run_order({2, 0, 1}) == doctest::Approx(7.0));
    CHECK(run_order({1, 2, 0}) == doctest::Approx(7.0));
}
