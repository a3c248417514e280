#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cascadeforge/cost_curve.hpp"
#include "cascadeforge/env.hpp"

namespace cascadeforge {

enum class CorrectReward { kCostSum, kConstant };

// The five reward configurations: schemes 1-2 pay the cost sum for correct
// classifications (penalty x1 / x10), schemes 3-5 pay a constant 1/10/100
// with penalty x1.
struct RewardScheme {
    int scheme_id = 3;
    CorrectReward correct = CorrectReward::kConstant;
    double constant_r = 1.0;
    double wrong_multiplier = 1.0;
    CostCurve curve;

    static RewardScheme preset(int id, CostCurve curve);
};

// Sum of curve values over the episode's invoke steps.
double episode_cost_sum(const RewardScheme& scheme, const Episode& episode);
double episode_reward(const RewardScheme& scheme, const Episode& episode);

enum class GoalMetric { kRecall, kPrecision, kAccuracy, kF1 };
enum class SignMode { kLiteral, kSignPreserving };

struct MetricGoal {
    GoalMetric metric = GoalMetric::kRecall;
    double lower = 0.95;
    double upper = 0.97;
    double bonus = 2.0; // b > 1
    int batch_size = 256;
    SignMode sign_mode = SignMode::kLiteral;

    void validate() const;
};

enum class BandPosition { kBelow, kInBand, kAbove };

// Metric value over a batch of outcomes; empty when undefined (e.g. recall
// with no positives).
std::optional<double> batch_metric(GoalMetric metric, std::span<const Outcome> outcomes);
BandPosition band_position(const MetricGoal& goal, double m);

// Batch-level adjustment of the summed reward CR.
double adjust_batch_reward(const MetricGoal& goal, BandPosition pos, double cr);
// Per-episode form used when writing adjusted rewards into the replay buffer.
double adjust_episode_reward(const MetricGoal& goal, BandPosition pos, double reward);

// Adjusted batch reward; on an undefined metric the batch is skipped and the
// plain sum is returned with *skipped set.
double batch_metric_reward(const MetricGoal& goal, std::span<const Outcome> outcomes,
                           std::span<const double> base_rewards, bool* skipped = nullptr);

// Disjoint batches of size m covering a shuffled index range; a short tail
// batch is dropped. Deterministic in epoch_seed.
std::vector<std::vector<std::size_t>> batch_sampler(std::size_t n_samples, std::size_t m,
                                                    std::uint64_t epoch_seed);

} // namespace cascadeforge
