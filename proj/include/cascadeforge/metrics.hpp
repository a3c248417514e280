#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascadeforge/env.hpp"
#include "cascadeforge/policy_net.hpp"
#include "cascadeforge/score_table.hpp"

namespace cascadeforge {

struct MetricsReport {
    long tp = 0, tn = 0, fp = 0, fn = 0;
    std::optional<double> auc, f1, precision, recall, accuracy;
    double mean_time = 0.0;
};

struct PredRow {
    double confidence = 0.0;
    int predicted = 0;
    double cost = 0.0;
};

MetricsReport compute_metrics(std::span<const PredRow> predictions, std::span<const int> labels);

// ROC area by trapezoidal integration over all distinct thresholds; empty
// when only one class is present.
std::optional<double> auc_trapezoid(std::span<const double> confidences,
                                    std::span<const int> labels);

struct ParetoPoint {
    std::string name;
    double quality = 0.0;  // higher is better
    double mean_time = 0.0; // lower is better
};

// Non-dominated points, stable input order among survivors.
std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points);

struct ComplementarityMatrix {
    int n = 0;
    std::vector<double> values;    // n x n row-major; meaningful where defined
    std::vector<bool> defined;

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
    bool is_defined(int i, int j) const { return defined[static_cast<std::size_t>(i) * n + j]; }
};

// Entry (i, j): among samples misclassified by detector i at threshold 0.5,
// the fraction classified correctly by detector j.
ComplementarityMatrix complementarity_matrix(const ScoreTable& table);

// Probability of the phishing classification renormalized over the two
// classify actions at the terminal decision state.
double agent_confidence(const PolicyParams& params, const Episode& episode);

} // namespace cascadeforge
