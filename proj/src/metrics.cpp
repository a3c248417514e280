#include "cascadeforge/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace cascadeforge {

MetricsReport compute_metrics(std::span<const PredRow> predictions,
                              std::span<const int> labels) {
    if (predictions.empty() || predictions.size() != labels.size())
        throw std::invalid_argument("compute_metrics: empty or misaligned inputs");

    MetricsReport r;
    double time_total = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        time_total += predictions[i].cost;
        switch (outcome_of(predictions[i].predicted, labels[i])) {
        case Outcome::kTP: ++r.tp; break;
        case Outcome::kTN: ++r.tn; break;
        case Outcome::kFP: ++r.fp; break;
        case Outcome::kFN: ++r.fn; break;
        }
    }
    r.mean_time = time_total / static_cast<double>(predictions.size());

    const double tp = static_cast<double>(r.tp), fp = static_cast<double>(r.fp);
    const double fn = static_cast<double>(r.fn), tn = static_cast<double>(r.tn);
    if (r.tp + r.fp > 0) r.precision = tp / (tp + fp);
    if (r.tp + r.fn > 0) r.recall = tp / (tp + fn);
    if (2 * r.tp + r.fp + r.fn > 0) r.f1 = 2 * tp / (2 * tp + fp + fn);
    r.accuracy = (tp + tn) / static_cast<double>(predictions.size());

    std::vector<double> conf(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) conf[i] = predictions[i].confidence;
    r.auc = auc_trapezoid(conf, labels);
    return r;
}

std::optional<double> auc_trapezoid(std::span<const double> confidences,
                                    std::span<const int> labels) {
    if (confidences.size() != labels.size())
        throw std::invalid_argument("auc_trapezoid: misaligned inputs");
    long pos = 0, neg = 0;
    for (int y : labels) (y == 1 ? pos : neg)++;
    if (pos == 0 || neg == 0) return std::nullopt;

    std::vector<std::size_t> order(confidences.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return confidences[a] > confidences[b];
    });

    // Walk thresholds from high to low; ties advance as one group.
    double area = 0.0;
    double prev_tpr = 0.0, prev_fpr = 0.0;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = confidences[order[i]];
        while (i < order.size() && confidences[order[i]] == threshold) {
            if (labels[order[i]] == 1) ++tp;
            else ++fp;
            ++i;
        }
        const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
        const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        area += 0.5 * (fpr - prev_fpr) * (tpr + prev_tpr);
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    return area;
}

std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points) {
    if (points.empty()) throw std::invalid_argument("pareto_front: empty input");
    auto dominates = [](const ParetoPoint& a, const ParetoPoint& b) {
        return a.quality >= b.quality && a.mean_time <= b.mean_time &&
               (a.quality > b.quality || a.mean_time < b.mean_time);
    };
    std::vector<ParetoPoint> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j)
            if (j != i && dominates(points[j], points[i])) dominated = true;
        if (!dominated) out.push_back(points[i]);
    }
    return out;
}

ComplementarityMatrix complementarity_matrix(const ScoreTable& table) {
    const int n = static_cast<int>(table.n_detectors());
    if (n < 2) throw std::invalid_argument("complementarity_matrix: need n >= 2");

    ComplementarityMatrix m;
    m.n = n;
    m.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    m.defined.assign(static_cast<std::size_t>(n) * n, false);

    auto correct = [&](const SampleRecord& s, int det) {
        int pred = s.scores[static_cast<std::size_t>(det)] <= 0.5 ? kBenign : kPhishing;
        return pred == s.label;
    };

    for (int i = 0; i < n; ++i) {
        long missed = 0;
        std::vector<long> fixed(static_cast<std::size_t>(n), 0);
        for (const auto& s : table.samples) {
            if (correct(s, i)) continue;
            ++missed;
            for (int j = 0; j < n; ++j)
                if (j != i && correct(s, j)) ++fixed[static_cast<std::size_t>(j)];
        }
        if (missed == 0) continue; // row undefined
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            m.values[static_cast<std::size_t>(i) * n + j] =
                static_cast<double>(fixed[static_cast<std::size_t>(j)]) /
                static_cast<double>(missed);
            m.defined[static_cast<std::size_t>(i) * n + j] = true;
        }
    }
    return m;
}

double agent_confidence(const PolicyParams& params, const Episode& episode) {
    if (episode.transitions.empty())
        throw std::invalid_argument("agent_confidence: empty episode");
    const auto& terminal = episode.transitions.back();
    if (terminal.next.has_value())
        throw std::invalid_argument("agent_confidence: episode is not terminal");
    ForwardResult f = forward(params, terminal.state);
    const int n = params.n_inputs;
    const double pb = f.probs[static_cast<std::size_t>(n + kBenign)];
    const double pp = f.probs[static_cast<std::size_t>(n + kPhishing)];
    if (pb + pp <= 0.0) return 0.5;
    return pp / (pb + pp);
}

} // namespace cascadeforge
