#pragma once

#include <cstdint>
#include <vector>

#include "cascadeforge/baselines.hpp"
#include "cascadeforge/metrics.hpp"
#include "cascadeforge/policy_net.hpp"
#include "cascadeforge/reward.hpp"
#include "cascadeforge/score_table.hpp"

namespace cascadeforge {

// Per-sample result of running the agent once.
struct SampleEval {
    int predicted = 0;
    double confidence = 0.0;
    double cost = 0.0;
    int invoked = 0;
    Outcome outcome = Outcome::kTN;
    double reward = 0.0;
};

// Serial reference implementation. Stochastic mode derives one rng per
// sample from (seed, sample index), so results are independent of
// evaluation order.
std::vector<SampleEval> evaluate_policy_serial(const PolicyParams& params,
                                               const ScoreTable& table,
                                               const RewardScheme& scheme, ActMode mode,
                                               std::uint64_t seed);

// OpenMP-parallel version; output matches the serial reference exactly.
std::vector<SampleEval> evaluate_policy(const PolicyParams& params, const ScoreTable& table,
                                        const RewardScheme& scheme, ActMode mode,
                                        std::uint64_t seed);

std::vector<PredRow> evaluate_ensemble_serial(const StaticEnsemble& ensemble,
                                              const ScoreTable& table);
std::vector<PredRow> evaluate_ensemble(const StaticEnsemble& ensemble, const ScoreTable& table);

std::vector<PredRow> to_pred_rows(const std::vector<SampleEval>& evals);
std::vector<int> labels_of(const ScoreTable& table);

} // namespace cascadeforge
