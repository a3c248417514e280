#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cascadeforge/score_table.hpp"

namespace cascadeforge {

inline constexpr double kNotInvoked = -1.0;
inline constexpr int kBenign = 0;
inline constexpr int kPhishing = 1;

// Per-sample state vector: entry i is -1 until detector i has been invoked,
// afterwards the detector's recorded score.
struct State {
    std::vector<double> entries;

    std::size_t size() const { return entries.size(); }
    bool invoked(std::size_t i) const { return entries[i] != kNotInvoked; }
    int invoked_count() const;
    bool exhausted() const { return invoked_count() == static_cast<int>(entries.size()); }

    bool operator==(const State&) const = default;
};

// Action space of size n+2: invoke one of n detectors, or classify.
struct Action {
    enum class Kind { kInvoke, kClassify };
    Kind kind = Kind::kClassify;
    int arg = 0; // detector index, or class (kBenign/kPhishing)

    static Action invoke(int detector) { return {Kind::kInvoke, detector}; }
    static Action classify(int cls) { return {Kind::kClassify, cls}; }

    bool is_invoke() const { return kind == Kind::kInvoke; }
    int detector() const { return arg; }
    int predicted_class() const { return arg; }

    // Flat index: 0..n-1 invoke, n classify-benign, n+1 classify-phishing.
    int index(int n) const { return is_invoke() ? arg : n + arg; }
    static Action from_index(int idx, int n);

    bool operator==(const Action&) const = default;
};

enum class Outcome { kTP, kTN, kFP, kFN };

Outcome outcome_of(int predicted, int label);
bool outcome_correct(Outcome o);

struct Transition {
    State state;
    Action action;
    std::optional<State> next; // empty when the action classified
    int terminal_class = -1;   // valid when next is empty
    double step_cost = 0.0;    // seconds
};

struct Episode {
    std::string sample_id;
    int label = 0;
    std::vector<Transition> transitions;
    int predicted = kBenign;
    Outcome outcome = Outcome::kTN;
    double total_cost = 0.0;

    int detectors_invoked() const;
    const State& terminal_state() const { return transitions.back().state; }
};

State initial_state(int n);
bool action_legal(const State& state, const Action& action);
std::vector<Action> legal_actions(const State& state);

// Applies one action. Throws on illegal actions (re-invocation).
Transition step(const State& state, const Action& action, const SampleRecord& sample);

using PolicyFn = std::function<Action(const State&)>;

// Runs the policy to termination; at most n+1 actions.
Episode run_episode(const PolicyFn& policy, const SampleRecord& sample);

} // namespace cascadeforge
