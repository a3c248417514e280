#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cascadeforge/env.hpp"
#include "cascadeforge/rng.hpp"

namespace cascadeforge {

// Policy and value networks with the same shape: one ReLU hidden layer
// each, softmax policy head over n+2 actions, scalar value head. The two
// trunks are separate so value regression cannot churn the policy features.
struct PolicyParams {
    int n_inputs = 0;
    int n_hidden = 32;
    std::vector<double> w1; // policy trunk: n_hidden x n_inputs, row-major
    std::vector<double> b1; // n_hidden
    std::vector<double> wp; // n_actions x n_hidden, row-major
    std::vector<double> bp; // n_actions
    std::vector<double> w1v; // value trunk: n_hidden x n_inputs
    std::vector<double> b1v; // n_hidden
    std::vector<double> wv;  // n_hidden
    double bv = 0.0;

    int n_actions() const { return n_inputs + 2; }
    std::size_t count() const;
    void to_flat(std::vector<double>& out) const;
    void from_flat(std::span<const double> in);

    static PolicyParams zeros(int n_inputs, int n_hidden = 32);
    static PolicyParams init(int n_inputs, int n_hidden, Rng& rng);

    bool operator==(const PolicyParams&) const = default;
};

struct ForwardResult {
    std::vector<double> hidden;   // policy trunk post-ReLU
    std::vector<double> hidden_v; // value trunk post-ReLU
    std::vector<double> probs;    // masked softmax, illegal actions at exactly 0
    std::vector<double> log_probs; // underflow-safe; -inf for illegal actions
    std::vector<bool> legal;
    double value = 0.0;
};

// Throws std::runtime_error on non-finite activations.
ForwardResult forward(const PolicyParams& params, const State& state);

enum class ActMode { kDeterministic, kStochastic };

// Deterministic: argmax with lowest-index tie break. Stochastic: sampled
// from the masked distribution (rng required).
Action act(const PolicyParams& params, const State& state, ActMode mode, Rng* rng = nullptr);

struct ReplayEntry {
    State state;
    int action_index = 0;
    double reward = 0.0;
    State next_state; // ignored when terminal
    bool terminal = false;
};

struct LossConfig {
    double gamma = 1.0;
    double value_coef = 0.5;
    double entropy_coef = 0.01;
};

// Bootstrap targets r + gamma * V(next); the value through the next state is
// treated as a constant by the gradient.
std::vector<double> compute_targets(const PolicyParams& params,
                                    std::span<const ReplayEntry> batch, double gamma);

// target - V(state); frozen inside the policy-loss term (the usual
// actor-critic stop-gradient).
std::vector<double> compute_advantages(const PolicyParams& params,
                                       std::span<const ReplayEntry> batch,
                                       std::span<const double> targets);

// Mean actor-critic loss over the minibatch for fixed targets and fixed
// policy-term advantages; fills the flat gradient when grad is non-null.
// Throws on non-finite values.
double loss_with_targets(const PolicyParams& params, std::span<const ReplayEntry> batch,
                         std::span<const double> targets, std::span<const double> advantages,
                         const LossConfig& cfg, std::vector<double>* grad);

// compute_targets + loss_with_targets.
std::vector<double> gradients(const PolicyParams& params, std::span<const ReplayEntry> batch,
                              const LossConfig& cfg);

// Gradient of -log(sum of probabilities of the target actions) with respect
// to the state entries. Used by the white-box attacks.
std::vector<double> input_gradient(const PolicyParams& params, const State& state,
                                   std::span<const int> target_action_indices);

class RmsProp {
public:
    RmsProp(double lr, double decay, double eps) : lr_(lr), decay_(decay), eps_(eps) {}
    void step(PolicyParams& params, std::span<const double> grad);
    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }

private:
    double lr_, decay_, eps_;
    std::vector<double> v_;
    std::vector<double> scratch_;
};

} // namespace cascadeforge
