#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cascadeforge {

struct DetectorProfile {
    std::string id;
    std::string display_name;
    double mean_cost = 0.0; // seconds, informational
};

struct SampleRecord {
    std::string sample_id;
    int label = 0; // 0 = benign, 1 = phishing
    std::vector<double> scores; // one per detector, in [0,1]
    std::vector<double> costs;  // one per detector, seconds >= 0
};

// Precomputed detector outputs for a dataset. Read-only after construction;
// safe to share across threads.
struct ScoreTable {
    std::vector<DetectorProfile> pool;
    std::vector<SampleRecord> samples;
    std::uint64_t split_seed = 0;

    std::size_t n_detectors() const { return pool.size(); }
    std::size_t size() const { return samples.size(); }

    // Throws std::runtime_error on any invariant violation (score range,
    // negative cost, length mismatch, duplicate sample id).
    void validate() const;
};

enum class CostLaw { kConstant, kLognormal };

struct SynthDetector {
    double accuracy = 0.9;     // in [0.5, 1]
    CostLaw cost_law = CostLaw::kConstant;
    double cost_constant = 1.0;
    double cost_mu = 0.0;    // lognormal log-mean
    double cost_sigma = 0.0; // lognormal log-std
    double noise = 0.0;      // extra score jitter std
};

struct SynthSpec {
    int n_samples = 0;
    std::vector<SynthDetector> detectors;
    double class_balance = 0.5; // fraction of phishing samples, in (0,1)
    std::uint64_t seed = 0;

    void validate() const;
};

// CSV with header: sample_id,label,score_<id1>,cost_<id1>,...
ScoreTable load_table(const std::string& path);
void save_table(const ScoreTable& table, const std::string& path);

struct SplitFractions {
    double train = 0.75;
    double val = 0.10;
    double test = 0.15;
};

// Deterministic stratified split; partitions are disjoint and exhaustive.
// Throws if any partition ends up without samples of some class.
std::array<ScoreTable, 3> split(const ScoreTable& table, SplitFractions fractions,
                                std::uint64_t seed);

// Pure function of the spec: same spec, same table.
ScoreTable synthesize(const SynthSpec& spec);

} // namespace cascadeforge
