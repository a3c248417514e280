#include "cascadeforge/env.hpp"

#include <stdexcept>

namespace cascadeforge {

int State::invoked_count() const {
    int k = 0;
    for (double v : entries)
        if (v != kNotInvoked) ++k;
    return k;
}

Action Action::from_index(int idx, int n) {
    if (idx < 0 || idx >= n + 2) throw std::invalid_argument("action index out of range");
    if (idx < n) return invoke(idx);
    return classify(idx - n);
}

Outcome outcome_of(int predicted, int label) {
    if (predicted == kPhishing) return label == 1 ? Outcome::kTP : Outcome::kFP;
    return label == 0 ? Outcome::kTN : Outcome::kFN;
}

bool outcome_correct(Outcome o) { return o == Outcome::kTP || o == Outcome::kTN; }

int Episode::detectors_invoked() const {
    int k = 0;
    for (const auto& t : transitions)
        if (t.action.is_invoke()) ++k;
    return k;
}

State initial_state(int n) {
    if (n < 1) throw std::invalid_argument("initial_state: n must be >= 1");
    State s;
    s.entries.assign(static_cast<std::size_t>(n), kNotInvoked);
    return s;
}

bool action_legal(const State& state, const Action& action) {
    if (!action.is_invoke()) return true;
    int d = action.detector();
    if (d < 0 || d >= static_cast<int>(state.size())) return false;
    return !state.invoked(static_cast<std::size_t>(d));
}

std::vector<Action> legal_actions(const State& state) {
    std::vector<Action> acts;
    for (std::size_t i = 0; i < state.size(); ++i)
        if (!state.invoked(i)) acts.push_back(Action::invoke(static_cast<int>(i)));
    acts.push_back(Action::classify(kBenign));
    acts.push_back(Action::classify(kPhishing));
    return acts;
}

Transition step(const State& state, const Action& action, const SampleRecord& sample) {
    if (state.size() != sample.scores.size())
        throw std::invalid_argument("step: state size does not match sample");
    if (!action_legal(state, action))
        throw std::logic_error("step: illegal action (detector already invoked)");

    Transition t;
    t.state = state;
    t.action = action;
    if (action.is_invoke()) {
        const auto d = static_cast<std::size_t>(action.detector());
        State next = state;
        next.entries[d] = sample.scores[d];
        t.next = std::move(next);
        t.step_cost = sample.costs[d];
    } else {
        t.terminal_class = action.predicted_class();
        t.step_cost = 0.0;
    }
    return t;
}

Episode run_episode(const PolicyFn& policy, const SampleRecord& sample) {
    Episode ep;
    ep.sample_id = sample.sample_id;
    ep.label = sample.label;

    State state = initial_state(static_cast<int>(sample.scores.size()));
    const std::size_t max_actions = sample.scores.size() + 1;
    for (std::size_t step_i = 0; step_i < max_actions; ++step_i) {
        Action a = policy(state);
        Transition t = step(state, a, sample);
        ep.total_cost += t.step_cost;
        bool terminal = !t.next.has_value();
        if (terminal) {
            ep.predicted = t.terminal_class;
            ep.transitions.push_back(std::move(t));
            ep.outcome = outcome_of(ep.predicted, ep.label);
            return ep;
        }
        state = *t.next;
        ep.transitions.push_back(std::move(t));
    }
    throw std::logic_error("run_episode: policy failed to classify after exhausting detectors");
}

} // namespace cascadeforge
