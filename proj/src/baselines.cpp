#include "cascadeforge/baselines.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "cascadeforge/env.hpp"

namespace cascadeforge {

int StaticEnsemble::subset_size() const { return std::popcount(subset_mask); }

std::string StaticEnsemble::name(const std::vector<DetectorProfile>& pool) const {
    std::string out;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!contains(static_cast<int>(i))) continue;
        if (!out.empty()) out += "+";
        out += pool[i].id;
    }
    return out;
}

std::pair<double, double> aggregate(const StaticEnsemble& ensemble, const SampleRecord& sample) {
    if (ensemble.subset_mask == 0)
        throw std::invalid_argument("aggregate: ensemble subset must be non-empty");
    double cost = 0.0;
    double acc = ensemble.rule == StaticEnsemble::Rule::kOr ? 0.0 : 0.0;
    int count = 0;
    for (std::size_t i = 0; i < sample.scores.size(); ++i) {
        if (!ensemble.contains(static_cast<int>(i))) continue;
        cost += sample.costs[i];
        ++count;
        if (ensemble.rule == StaticEnsemble::Rule::kOr)
            acc = std::max(acc, sample.scores[i]);
        else
            acc += sample.scores[i];
    }
    if (count == 0) throw std::invalid_argument("aggregate: subset outside detector pool");
    double confidence = ensemble.rule == StaticEnsemble::Rule::kOr
                            ? acc
                            : acc / static_cast<double>(count);
    return {confidence, cost};
}

int classify_confidence(double confidence) { return confidence <= 0.5 ? kBenign : kPhishing; }

std::vector<StaticEnsemble> enumerate_baselines(int n) {
    if (n < 1) throw std::invalid_argument("enumerate_baselines: n must be >= 1");
    if (n > 20) throw std::invalid_argument("enumerate_baselines: n > 20 rejected");
    std::vector<StaticEnsemble> out;
    out.reserve((std::size_t{1} << n) * 2 - 2);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        out.push_back({mask, StaticEnsemble::Rule::kMajority});
        out.push_back({mask, StaticEnsemble::Rule::kOr});
    }
    return out;
}

} // namespace cascadeforge
