#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cascadeforge/score_table.hpp"

namespace cascadeforge {

// Fixed detector subset with a fixed aggregation rule. "majority" averages
// the subset's confidence scores, "or" takes the maximum.
struct StaticEnsemble {
    std::uint32_t subset_mask = 0; // bit i set -> detector i participates
    enum class Rule { kMajority, kOr } rule = Rule::kMajority;

    int subset_size() const;
    bool contains(int detector) const { return (subset_mask >> detector) & 1u; }
    std::string name(const std::vector<DetectorProfile>& pool) const;
    const char* rule_name() const { return rule == Rule::kMajority ? "majority" : "or"; }
};

// (confidence, cost). Classification threshold: confidence <= 0.5 is benign.
std::pair<double, double> aggregate(const StaticEnsemble& ensemble, const SampleRecord& sample);
int classify_confidence(double confidence);

// All (2^n - 1) * 2 ensembles in deterministic order: subset bitmask
// ascending, majority before or. n > 20 is rejected.
std::vector<StaticEnsemble> enumerate_baselines(int n);

} // namespace cascadeforge
