#include "cascadeforge/reward.hpp"

#include <cmath>
#include <stdexcept>

#include "cascadeforge/rng.hpp"

namespace cascadeforge {

RewardScheme RewardScheme::preset(int id, CostCurve curve) {
    RewardScheme s;
    s.scheme_id = id;
    s.curve = std::move(curve);
    switch (id) {
    case 1: s.correct = CorrectReward::kCostSum; s.wrong_multiplier = 1.0; break;
    case 2: s.correct = CorrectReward::kCostSum; s.wrong_multiplier = 10.0; break;
    case 3: s.correct = CorrectReward::kConstant; s.constant_r = 1.0; s.wrong_multiplier = 1.0; break;
    case 4: s.correct = CorrectReward::kConstant; s.constant_r = 10.0; s.wrong_multiplier = 1.0; break;
    case 5: s.correct = CorrectReward::kConstant; s.constant_r = 100.0; s.wrong_multiplier = 1.0; break;
    default: throw std::invalid_argument("reward scheme out of 1..5");
    }
    return s;
}

double episode_cost_sum(const RewardScheme& scheme, const Episode& episode) {
    double sum = 0.0;
    for (const auto& t : episode.transitions)
        if (t.action.is_invoke()) sum += scheme.curve.value(t.step_cost);
    return sum;
}

double episode_reward(const RewardScheme& scheme, const Episode& episode) {
    const double cost_sum = episode_cost_sum(scheme, episode);
    if (outcome_correct(episode.outcome))
        return scheme.correct == CorrectReward::kCostSum ? cost_sum : scheme.constant_r;
    return -scheme.wrong_multiplier * cost_sum;
}

void MetricGoal::validate() const {
    if (!(lower > 0.0 && lower < 1.0 && upper > lower && upper < 1.0))
        throw std::invalid_argument("metric goal needs 0 < lower < upper < 1");
    if (!(bonus > 1.0)) throw std::invalid_argument("metric goal bonus must be > 1");
    if (batch_size < 1) throw std::invalid_argument("metric goal batch size must be >= 1");
}

std::optional<double> batch_metric(GoalMetric metric, std::span<const Outcome> outcomes) {
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (Outcome o : outcomes) {
        switch (o) {
        case Outcome::kTP: ++tp; break;
        case Outcome::kTN: ++tn; break;
        case Outcome::kFP: ++fp; break;
        case Outcome::kFN: ++fn; break;
        }
    }
    const double total = tp + tn + fp + fn;
    if (total == 0) return std::nullopt;
    switch (metric) {
    case GoalMetric::kRecall:
        if (tp + fn == 0) return std::nullopt;
        return tp / (tp + fn);
    case GoalMetric::kPrecision:
        if (tp + fp == 0) return std::nullopt;
        return tp / (tp + fp);
    case GoalMetric::kAccuracy:
        return (tp + tn) / total;
    case GoalMetric::kF1: {
        if (2 * tp + fp + fn == 0) return std::nullopt;
        return 2 * tp / (2 * tp + fp + fn);
    }
    }
    return std::nullopt;
}

BandPosition band_position(const MetricGoal& goal, double m) {
    if (m < goal.lower) return BandPosition::kBelow;
    if (m < goal.upper) return BandPosition::kInBand;
    return BandPosition::kAbove;
}

double adjust_batch_reward(const MetricGoal& goal, BandPosition pos, double cr) {
    switch (pos) {
    case BandPosition::kBelow:
        return goal.sign_mode == SignMode::kLiteral ? -goal.bonus * cr
                                                    : cr - goal.bonus * std::abs(cr);
    case BandPosition::kInBand:
        return cr;
    case BandPosition::kAbove:
        return goal.sign_mode == SignMode::kLiteral ? goal.bonus * cr
                                                    : cr + goal.bonus * std::abs(cr);
    }
    return cr;
}

double adjust_episode_reward(const MetricGoal& goal, BandPosition pos, double reward) {
    return adjust_batch_reward(goal, pos, reward);
}

double batch_metric_reward(const MetricGoal& goal, std::span<const Outcome> outcomes,
                           std::span<const double> base_rewards, bool* skipped) {
    goal.validate();
    if (outcomes.size() != base_rewards.size() ||
        outcomes.size() != static_cast<std::size_t>(goal.batch_size))
        throw std::invalid_argument("batch_metric_reward: batch size mismatch");
    double cr = 0.0;
    for (double r : base_rewards) cr += r;
    auto m = batch_metric(goal.metric, outcomes);
    if (!m.has_value()) {
        if (skipped) *skipped = true;
        return cr;
    }
    if (skipped) *skipped = false;
    return adjust_batch_reward(goal, band_position(goal, *m), cr);
}

std::vector<std::vector<std::size_t>> batch_sampler(std::size_t n_samples, std::size_t m,
                                                    std::uint64_t epoch_seed) {
    if (m == 0 || m > n_samples)
        throw std::invalid_argument("batch_sampler: batch size must be in [1, n_samples]");
    std::vector<std::size_t> order(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) order[i] = i;
    Rng rng(mix_seed(epoch_seed, 0xba7c4));
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start + m <= n_samples; start += m)
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(start + m));
    return batches;
}

} // namespace cascadeforge
