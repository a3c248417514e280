#include "cascadeforge/trainer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cascadeforge {

void ReplayBuffer::push(ReplayEntry entry) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(entry));
        return;
    }
    data_[head_] = std::move(entry);
    head_ = (head_ + 1) % capacity_;
}

std::vector<ReplayEntry> ReplayBuffer::sample(std::size_t k, Rng& rng) const {
    if (data_.empty()) throw std::logic_error("ReplayBuffer::sample on empty buffer");
    std::vector<ReplayEntry> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        out.push_back(data_[rng.below(data_.size())]);
    return out;
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0))
        throw std::invalid_argument("train: lr_decay in (0,1]");
    if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("train: decay in (0,1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("train: epsilon must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("train: gamma in (0,1]");
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (!(entropy_coef >= 0.0)) throw std::invalid_argument("train: entropy_coef >= 0");
    if (!(value_coef >= 0.0)) throw std::invalid_argument("train: value_coef >= 0");
    if (!(explore_eps >= 0.0 && explore_eps < 1.0))
        throw std::invalid_argument("train: explore_eps in [0,1)");
    if (minibatch < 1) throw std::invalid_argument("train: minibatch must be >= 1");
    if (replay_capacity < 1) throw std::invalid_argument("train: replay capacity >= 1");
    if (warmup_episodes < 0) throw std::invalid_argument("train: warmup episodes >= 0");
    if (hidden < 1) throw std::invalid_argument("train: hidden size >= 1");
}

Episode rollout(const PolicyParams& params, const SampleRecord& sample, ActMode mode,
                Rng* rng) {
    return run_episode([&](const State& s) { return act(params, s, mode, rng); }, sample);
}

double mean_episode_reward(const PolicyParams& params, const ScoreTable& table,
                           const RewardScheme& scheme) {
    if (table.samples.empty()) throw std::invalid_argument("mean_episode_reward: empty table");
    double total = 0.0;
    for (const auto& sample : table.samples) {
        Episode ep = rollout(params, sample, ActMode::kDeterministic, nullptr);
        total += episode_reward(scheme, ep);
    }
    return total / static_cast<double>(table.samples.size());
}

namespace {

// Converts a finished episode into replay entries; only the terminal
// transition carries reward.
void episode_to_entries(const Episode& ep, double terminal_reward,
                        std::vector<ReplayEntry>& out) {
    const int n = static_cast<int>(ep.transitions.front().state.size());
    for (const auto& t : ep.transitions) {
        ReplayEntry e;
        e.state = t.state;
        e.action_index = t.action.index(n);
        if (t.next.has_value()) {
            e.reward = 0.0;
            e.next_state = *t.next;
            e.terminal = false;
        } else {
            e.reward = terminal_reward;
            e.terminal = true;
        }
        out.push_back(std::move(e));
    }
}

} // namespace

TrainResult train(const ScoreTable& train_set, const ScoreTable& val_set,
                  const RewardScheme& scheme, const std::optional<MetricGoal>& goal,
                  const TrainConfig& config, const std::optional<PolicyParams>& warm_start) {
    config.validate();
    if (goal) goal->validate();
    if (train_set.samples.empty() || val_set.samples.empty())
        throw std::invalid_argument("train: empty split");
    if (goal && static_cast<std::size_t>(goal->batch_size) > train_set.samples.size())
        throw std::invalid_argument("train: metric batch larger than training set");

    const int n = static_cast<int>(train_set.n_detectors());
    Rng init_rng(mix_seed(config.seed, 0x1417));
    Rng action_rng(mix_seed(config.seed, 0xac7));
    Rng replay_rng(mix_seed(config.seed, 0x4e91a));
    Rng explore_rng(mix_seed(config.seed, 0xe491));

    PolicyParams params = PolicyParams::init(n, config.hidden, init_rng);
    if (warm_start) {
        if (warm_start->n_inputs != n)
            throw std::invalid_argument("train: warm-start parameters have wrong input size");
        params = *warm_start;
    } else if (config.optimistic_init && scheme.correct == CorrectReward::kConstant) {
        // The guess-for-free trap only exists when correct classifications
        // pay a flat reward; cost-sum schemes already tie reward to invoked
        // work.
        params.bv = 2.0 * scheme.constant_r;
    }
    RmsProp opt(config.lr, config.decay, config.epsilon);
    ReplayBuffer replay(static_cast<std::size_t>(config.replay_capacity));
    LossConfig loss_cfg{config.gamma, config.value_coef, config.entropy_coef};

    TrainResult result;
    result.best_val_reward = -std::numeric_limits<double>::infinity();

    // Behaviour policy for training rollouts: policy sampling with an
    // epsilon mix of uniform legal actions.
    auto behaviour_rollout = [&](const SampleRecord& sample) {
        return run_episode(
            [&](const State& s) {
                if (config.explore_eps > 0.0 &&
                    explore_rng.uniform01() < config.explore_eps) {
                    auto acts = legal_actions(s);
                    return acts[explore_rng.below(acts.size())];
                }
                return act(params, s, ActMode::kStochastic, &action_rng);
            },
            sample);
    };

    long episode_count = 0;
    auto learn_step = [&]() {
        if (episode_count <= config.warmup_episodes) return;
        std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(config.minibatch),
                                              replay.size());
        auto batch = replay.sample(k, replay_rng);
        auto grad = gradients(params, batch, loss_cfg);
        opt.step(params, grad);
    };

    std::vector<ReplayEntry> scratch_entries;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        opt.set_lr(config.lr * std::pow(config.lr_decay, static_cast<double>(epoch)));
        const std::uint64_t epoch_seed = mix_seed(config.seed, 0xe90c, static_cast<std::uint64_t>(epoch));
        double epoch_reward = 0.0;
        std::size_t episodes_this_epoch = 0;

        if (goal) {
            auto batches = batch_sampler(train_set.samples.size(),
                                         static_cast<std::size_t>(goal->batch_size), epoch_seed);
            for (const auto& batch_idx : batches) {
                std::vector<Episode> episodes;
                std::vector<double> rewards;
                std::vector<Outcome> outcomes;
                episodes.reserve(batch_idx.size());
                for (std::size_t idx : batch_idx) {
                    episodes.push_back(behaviour_rollout(train_set.samples[idx]));
                    rewards.push_back(episode_reward(scheme, episodes.back()));
                    outcomes.push_back(episodes.back().outcome);
                }
                auto m = batch_metric(goal->metric, outcomes);
                // undefined metric: batch used unadjusted
                BandPosition pos = m ? band_position(*goal, *m) : BandPosition::kInBand;
                for (std::size_t i = 0; i < episodes.size(); ++i) {
                    double adjusted = adjust_episode_reward(*goal, pos, rewards[i]);
                    scratch_entries.clear();
                    episode_to_entries(episodes[i], adjusted, scratch_entries);
                    for (auto& e : scratch_entries) replay.push(std::move(e));
                    ++episode_count;
                    ++episodes_this_epoch;
                    epoch_reward += rewards[i];
                    learn_step();
                }
            }
        } else {
            std::vector<std::size_t> order(train_set.samples.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            Rng shuffle_rng(epoch_seed);
            shuffle_rng.shuffle(order);
            for (std::size_t idx : order) {
                Episode ep = behaviour_rollout(train_set.samples[idx]);
                double r = episode_reward(scheme, ep);
                scratch_entries.clear();
                episode_to_entries(ep, r, scratch_entries);
                for (auto& e : scratch_entries) replay.push(std::move(e));
                ++episode_count;
                ++episodes_this_epoch;
                epoch_reward += r;
                learn_step();
            }
        }

        EpochLog log;
        log.epoch = epoch;
        log.mean_train_reward =
            episodes_this_epoch ? epoch_reward / static_cast<double>(episodes_this_epoch) : 0.0;
        log.val_reward = mean_episode_reward(params, val_set, scheme);
        log.replay_size = replay.size();
        result.log.push_back(log);

        if (log.val_reward > result.best_val_reward) {
            result.best_val_reward = log.val_reward;
            result.best_epoch = epoch;
            result.params = params;
        }
    }
    return result;
}

} // namespace cascadeforge
