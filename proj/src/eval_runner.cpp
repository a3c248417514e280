#include "cascadeforge/eval_runner.hpp"

#include "cascadeforge/trainer.hpp"

namespace cascadeforge {

namespace {

SampleEval eval_one(const PolicyParams& params, const SampleRecord& sample,
                    const RewardScheme& scheme, ActMode mode, std::uint64_t seed,
                    std::size_t index) {
    SampleEval out;
    if (mode == ActMode::kStochastic) {
        Rng rng(mix_seed(seed, index));
        Episode ep = rollout(params, sample, mode, &rng);
        out.predicted = ep.predicted;
        out.confidence = agent_confidence(params, ep);
        out.cost = ep.total_cost;
        out.invoked = ep.detectors_invoked();
        out.outcome = ep.outcome;
        out.reward = episode_reward(scheme, ep);
    } else {
        Episode ep = rollout(params, sample, mode, nullptr);
        out.predicted = ep.predicted;
        out.confidence = agent_confidence(params, ep);
        out.cost = ep.total_cost;
        out.invoked = ep.detectors_invoked();
        out.outcome = ep.outcome;
        out.reward = episode_reward(scheme, ep);
    }
    return out;
}

} // namespace

std::vector<SampleEval> evaluate_policy_serial(const PolicyParams& params,
                                               const ScoreTable& table,
                                               const RewardScheme& scheme, ActMode mode,
                                               std::uint64_t seed) {
    std::vector<SampleEval> out(table.samples.size());
    for (std::size_t i = 0; i < table.samples.size(); ++i)
        out[i] = eval_one(params, table.samples[i], scheme, mode, seed, i);
    return out;
}

std::vector<SampleEval> evaluate_policy(const PolicyParams& params, const ScoreTable& table,
                                        const RewardScheme& scheme, ActMode mode,
                                        std::uint64_t seed) {
    std::vector<SampleEval> out(table.samples.size());
    const std::int64_t n = static_cast<std::int64_t>(table.samples.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] =
            eval_one(params, table.samples[static_cast<std::size_t>(i)], scheme, mode, seed,
                     static_cast<std::size_t>(i));
    return out;
}

std::vector<PredRow> evaluate_ensemble_serial(const StaticEnsemble& ensemble,
                                              const ScoreTable& table) {
    std::vector<PredRow> out(table.samples.size());
    for (std::size_t i = 0; i < table.samples.size(); ++i) {
        auto [conf, cost] = aggregate(ensemble, table.samples[i]);
        out[i] = {conf, classify_confidence(conf), cost};
    }
    return out;
}

std::vector<PredRow> evaluate_ensemble(const StaticEnsemble& ensemble, const ScoreTable& table) {
    std::vector<PredRow> out(table.samples.size());
    const std::int64_t n = static_cast<std::int64_t>(table.samples.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        auto [conf, cost] = aggregate(ensemble, table.samples[static_cast<std::size_t>(i)]);
        out[static_cast<std::size_t>(i)] = {conf, classify_confidence(conf), cost};
    }
    return out;
}

std::vector<PredRow> to_pred_rows(const std::vector<SampleEval>& evals) {
    std::vector<PredRow> rows(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i)
        rows[i] = {evals[i].confidence, evals[i].predicted, evals[i].cost};
    return rows;
}

std::vector<int> labels_of(const ScoreTable& table) {
    std::vector<int> labels(table.samples.size());
    for (std::size_t i = 0; i < table.samples.size(); ++i) labels[i] = table.samples[i].label;
    return labels;
}

} // namespace cascadeforge
