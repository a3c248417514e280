#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cascadeforge/policy_net.hpp"
#include "cascadeforge/reward.hpp"
#include "cascadeforge/score_table.hpp"

namespace cascadeforge {

// FIFO transition store with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(ReplayEntry entry);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::vector<ReplayEntry> sample(std::size_t k, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<ReplayEntry> data_;
};

struct TrainConfig {
    double lr = 1e-3;
    double lr_decay = 1.0; // multiplicative per-epoch learning-rate decay
    double decay = 0.99;
    double epsilon = 1e-8;
    double gamma = 1.0;
    int epochs = 20;
    std::uint64_t seed = 0;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    // Exploration mix for training rollouts: with this probability the
    // behaviour policy picks a uniform legal action instead of sampling the
    // policy head. Keeps invoke transitions flowing into the replay buffer
    // even after the policy head saturates.
    double explore_eps = 0.05;
    // Start the value head at twice the attainable correct reward. Wrong
    // guesses then carry negative advantages from the first step, which
    // stops the cheap-guessing policy from saturating before the value
    // estimates settle.
    bool optimistic_init = true;
    int minibatch = 32;
    int replay_capacity = 5000;
    int warmup_episodes = 100;
    int hidden = 32;

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double mean_train_reward = 0.0;
    double val_reward = 0.0;
    std::size_t replay_size = 0;
};

struct TrainResult {
    PolicyParams params; // parameters of the best validation epoch
    int best_epoch = -1;
    double best_val_reward = 0.0;
    std::vector<EpochLog> log;
};

// Runs one stochastic episode with the given policy parameters and rng.
Episode rollout(const PolicyParams& params, const SampleRecord& sample, ActMode mode,
                Rng* rng);

// Mean deterministic episode reward over a table (model-selection objective).
double mean_episode_reward(const PolicyParams& params, const ScoreTable& table,
                           const RewardScheme& scheme);

// Deterministic actor-critic training with experience replay. When a metric
// goal is present, per-episode terminal rewards are scaled by the batch
// adjustment factor before entering the replay buffer; metric-goal training
// normally warm-starts from an already-trained policy.
TrainResult train(const ScoreTable& train_set, const ScoreTable& val_set,
                  const RewardScheme& scheme, const std::optional<MetricGoal>& goal,
                  const TrainConfig& config,
                  const std::optional<PolicyParams>& warm_start = std::nullopt);

} // namespace cascadeforge
