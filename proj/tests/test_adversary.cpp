#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cascadeforge/attack.hpp"
#include "cascadeforge/trainer.hpp"

using namespace cascadeforge;

namespace {

ScoreTable harness_table(int n_samples = 400, std::uint64_t seed = 21) {
    SynthSpec spec;
    spec.n_samples = n_samples;
    spec.seed = seed;
    spec.detectors = {{0.92, CostLaw::kConstant, 0.05, 0, 0, 0.0},
                      {0.9, CostLaw::kConstant, 0.2, 0, 0, 0.0},
                      {0.95, CostLaw::kConstant, 1.0, 0, 0, 0.0}};
    return synthesize(spec);
}

// A quick agent for harness tests; a handful of epochs is enough to get a
// policy that invokes detectors.
PolicyParams harness_agent(const ScoreTable& table) {
    auto parts = split(table, {0.75, 0.10, 0.15}, 2);
    RewardScheme scheme = RewardScheme::preset(2, CostCurve::two_region(1.0, 34.0));
    TrainConfig tc;
    tc.epochs = 6;
    tc.seed = 9;
    return train(parts[0], parts[1], scheme, std::nullopt, tc).params;
}

} // namespace

TEST_CASE("budget schedules") {
    auto uniform = schedule_budgets(ScheduleKind::kUniform, 0.5, 5);
    REQUIRE(uniform.size() == 5);
    for (double b : uniform) CHECK(b == doctest::Approx(0.1));

    auto geo = schedule_budgets(ScheduleKind::kGeometric, 0.5, 3, 1, 0.5);
    CHECK(geo[0] == doctest::Approx(0.25));
    CHECK(geo[1] == doctest::Approx(0.125));
    CHECK(geo[2] == doctest::Approx(0.0625));
    CHECK(geo[0] + geo[1] + geo[2] == doctest::Approx(0.4375));

    auto once = schedule_budgets(ScheduleKind::kAllAtOnce, 0.5, 3, 2);
    CHECK(once == std::vector<double>{0.0, 0.5, 0.0});

    CHECK_THROWS_AS(schedule_budgets(ScheduleKind::kGeometric, 0.5, 3, 1, 0.8),
                    std::invalid_argument);
    CHECK_THROWS_AS(schedule_budgets(ScheduleKind::kAllAtOnce, 0.5, 3, 4),
                    std::invalid_argument);
}

TEST_CASE("geometric budgets always respect the total") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        double eps = rng.uniform01() * 2.0;
        int n = 1 + static_cast<int>(rng.below(10));
        double q = 0.05 + rng.uniform01() * 0.45;
        auto b = schedule_budgets(ScheduleKind::kGeometric, eps, n, 1, q);
        double total = 0.0;
        for (double v : b) total += v;
        CHECK(total <= eps + 1e-12);
    }
}

TEST_CASE("black-box perturbation moves every score by exactly epsilon, clamped") {
    SampleRecord s;
    s.sample_id = "x";
    s.label = 1;
    s.scores = {0.0, 1.0, 0.5};
    s.costs = {1.0, 2.0, 3.0};

    Rng rng(3);
    SampleRecord same = black_box_attack(s, 0.0, rng);
    CHECK(same.scores == s.scores);

    for (int trial = 0; trial < 50; ++trial) {
        SampleRecord att = black_box_attack(s, 0.25, rng);
        CHECK(att.costs == s.costs);
        for (std::size_t i = 0; i < s.scores.size(); ++i) {
            CHECK(std::abs(att.scores[i] - s.scores[i]) <= 0.25 + 1e-12);
            CHECK(att.scores[i] >= 0.0);
            CHECK(att.scores[i] <= 1.0);
        }
        CHECK((att.scores[0] == doctest::Approx(0.25) || att.scores[0] == doctest::Approx(0.0)));
        CHECK((att.scores[1] == doctest::Approx(0.75) || att.scores[1] == doctest::Approx(1.0)));
    }
}

TEST_CASE("zero-budget white-box attacks never succeed") {
    ScoreTable table = harness_table();
    PolicyParams agent = harness_agent(table);
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    cfg.goal = AttackGoal::kEvade;
    cfg.seed = 17;
    for (const auto& s : table.samples) {
        if (s.label != kPhishing) continue;
        AttackOutcome o = white_box_attack(agent, s, cfg);
        CHECK(!o.success);
        CHECK(o.budget_spent == 0.0);
        CHECK(o.perturbed_predicted == o.original_predicted);
        CHECK(o.perturbed_cost == doctest::Approx(o.original_cost));
    }
}

TEST_CASE("white-box attacks respect the budget and the sentinel") {
    ScoreTable table = harness_table();
    PolicyParams agent = harness_agent(table);
    for (auto method : {AttackMethod::kFgsm, AttackMethod::kPgd}) {
        for (auto sched : {ScheduleKind::kUniform, ScheduleKind::kGeometric,
                           ScheduleKind::kAllAtOnce}) {
            AttackConfig cfg;
            cfg.epsilon = 0.5;
            cfg.method = method;
            cfg.schedule = sched;
            cfg.all_at_once_step = 1;
            cfg.goal = AttackGoal::kEvade;
            cfg.seed = 23;
            int attacked = 0;
            for (const auto& s : table.samples) {
                if (s.label != kPhishing) continue;
                if (++attacked > 60) break;
                AttackOutcome o = white_box_attack(agent, s, cfg);
                CHECK(o.budget_spent <= cfg.epsilon + 1e-9);
            }
        }
    }
}

TEST_CASE("evade goal rejects benign samples") {
    ScoreTable table = harness_table();
    PolicyParams agent = harness_agent(table);
    AttackConfig cfg;
    cfg.goal = AttackGoal::kEvade;
    for (const auto& s : table.samples) {
        if (s.label != kBenign) continue;
        CHECK_THROWS_AS(white_box_attack(agent, s, cfg), std::invalid_argument);
        break;
    }
}

TEST_CASE("an agent that classifies immediately is unattackable") {
    PolicyParams p = PolicyParams::zeros(3);
    p.bp = {0.0, 0.0, 0.0, 0.0, 5.0}; // classify phishing dominates
    SampleRecord s;
    s.sample_id = "x";
    s.label = 1;
    s.scores = {0.9, 0.8, 0.7};
    s.costs = {1.0, 1.0, 1.0};
    AttackConfig cfg;
    cfg.epsilon = 0.5;
    AttackOutcome o = white_box_attack(p, s, cfg);
    CHECK(!o.success);
    CHECK(!o.attackable);
    CHECK(o.failure_reason != "");
}

TEST_CASE("resource success requires the same class and more work") {
    ScoreTable table = harness_table();
    PolicyParams agent = harness_agent(table);
    AttackConfig cfg;
    cfg.epsilon = 0.5;
    cfg.goal = AttackGoal::kResource;
    cfg.seed = 31;
    int checked = 0;
    for (const auto& s : table.samples) {
        if (s.label != kPhishing) continue;
        if (++checked > 120) break;
        AttackOutcome o = white_box_attack(agent, s, cfg);
        if (!o.success) continue;
        CHECK(o.perturbed_predicted == o.original_predicted);
        CHECK((o.perturbed_cost > o.original_cost || o.perturbed_invoked > o.original_invoked));
    }
}

TEST_CASE("campaigns aggregate three seeded rounds") {
    ScoreTable table = harness_table();
    PolicyParams agent = harness_agent(table);
    AttackConfig cfg;
    cfg.epsilon = 0.5;
    cfg.goal = AttackGoal::kEvade;
    cfg.seed = 5;
    CampaignReport r = run_campaign(agent, table, cfg, 40);
    CHECK(r.rounds == 3);
    CHECK(r.round_rates.size() == 3);
    CHECK(r.outcomes.size() == 120);
    CHECK(r.success_rate_defined);
    double mean = (r.round_rates[0] + r.round_rates[1] + r.round_rates[2]) / 3.0;
    CHECK(r.success_rate == doctest::Approx(mean));
    CHECK(r.max_budget_spent <= cfg.epsilon + 1e-9);

    // campaigns are deterministic given the seed
    CampaignReport again = run_campaign(agent, table, cfg, 40);
    CHECK(again.success_rate == r.success_rate);
    CHECK(again.round_rates == r.round_rates);

    CampaignReport empty = run_campaign(agent, table, cfg, 0);
    CHECK(!empty.success_rate_defined);
}

TEST_CASE("stochastic defense campaigns average multiple runs") {
    ScoreTable table = harness_table(200, 77);
    PolicyParams agent = harness_agent(table);
    AttackConfig cfg;
    cfg.epsilon = 0.5;
    cfg.goal = AttackGoal::kResource;
    cfg.defense = DefenseMode::kStochastic;
    cfg.defense_runs = 5;
    cfg.seed = 13;
    CampaignReport r = run_campaign(agent, table, cfg, 25);
    CHECK(r.success_rate_defined);
    CHECK(r.success_rate >= 0.0);
    CHECK(r.success_rate <= 1.0);
}

TEST_CASE("black-box campaign against the or-rule ensemble") {
    ScoreTable table = harness_table();
    StaticEnsemble ens{0b111, StaticEnsemble::Rule::kOr};
    AttackConfig cfg;
    cfg.epsilon = 0.5;
    cfg.seed = 19;
    CampaignReport r = run_campaign_ensemble(ens, table, cfg, 50);
    CHECK(r.success_rate_defined);
    CHECK(r.success_rate >= 0.0);

    // with zero budget nothing flips
    cfg.epsilon = 0.0;
    CampaignReport zero = run_campaign_ensemble(ens, table, cfg, 50);
    CHECK(zero.success_rate == 0.0);
}
