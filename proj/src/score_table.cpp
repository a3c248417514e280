#include "cascadeforge/score_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "cascadeforge/rng.hpp"

namespace cascadeforge {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& s, std::size_t row, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("malformed " + what + " '" + s + "' at row " +
                                 std::to_string(row));
    }
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

void ScoreTable::validate() const {
    if (pool.size() < 2)
        throw std::runtime_error("detector pool must contain at least 2 detectors");
    std::unordered_set<std::string> ids;
    for (const auto& d : pool) {
        if (d.id.empty()) throw std::runtime_error("empty detector id");
        if (!ids.insert(d.id).second)
            throw std::runtime_error("duplicate detector id '" + d.id + "'");
    }
    std::unordered_set<std::string> sample_ids;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.scores.size() != pool.size() || s.costs.size() != pool.size())
            throw std::runtime_error("sample '" + s.sample_id +
                                     "' has wrong number of score/cost columns");
        if (s.label != 0 && s.label != 1)
            throw std::runtime_error("sample '" + s.sample_id + "' has non-binary label");
        if (!sample_ids.insert(s.sample_id).second)
            throw std::runtime_error("duplicate sample_id '" + s.sample_id + "'");
        for (std::size_t j = 0; j < pool.size(); ++j) {
            double sc = s.scores[j], c = s.costs[j];
            if (!std::isfinite(sc) || sc < 0.0 || sc > 1.0)
                throw std::runtime_error("score out of range at row " + std::to_string(i + 1));
            if (!std::isfinite(c) || c < 0.0)
                throw std::runtime_error("negative cost at row " + std::to_string(i + 1));
        }
    }
}

ScoreTable load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open table file '" + path + "'");

    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty file '" + path + "'");
    auto cols = split_csv_line(trim(header));
    if (cols.size() < 4 || cols[0] != "sample_id" || cols[1] != "label" ||
        (cols.size() - 2) % 2 != 0)
        throw std::runtime_error("bad header in '" + path +
                                 "': expected sample_id,label,score_<id>,cost_<id>,...");

    ScoreTable table;
    for (std::size_t c = 2; c + 1 < cols.size(); c += 2) {
        const std::string& sc = cols[c];
        const std::string& cc = cols[c + 1];
        if (sc.rfind("score_", 0) != 0 || cc.rfind("cost_", 0) != 0)
            throw std::runtime_error("bad header column pair '" + sc + "','" + cc + "'");
        std::string id = sc.substr(6);
        if (cc.substr(5) != id)
            throw std::runtime_error("score/cost column ids disagree: '" + sc + "' vs '" + cc + "'");
        table.pool.push_back({id, id, 0.0});
    }
    const std::size_t n = table.pool.size();

    std::string line;
    std::size_t row = 0;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        line = trim(line);
        ++row;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2 + 2 * n)
            throw std::runtime_error("malformed row " + std::to_string(row) + ": expected " +
                                     std::to_string(2 + 2 * n) + " fields, got " +
                                     std::to_string(fields.size()));
        SampleRecord rec;
        rec.sample_id = fields[0];
        if (!seen.insert(rec.sample_id).second)
            throw std::runtime_error("duplicate sample_id '" + rec.sample_id + "' at row " +
                                     std::to_string(row));
        if (fields[1] == "0") rec.label = 0;
        else if (fields[1] == "1") rec.label = 1;
        else throw std::runtime_error("label must be 0 or 1 at row " + std::to_string(row));
        for (std::size_t j = 0; j < n; ++j) {
            double sc = parse_double(fields[2 + 2 * j], row, "score");
            double c = parse_double(fields[3 + 2 * j], row, "cost");
            if (!std::isfinite(sc) || sc < 0.0 || sc > 1.0)
                throw std::runtime_error("score out of range at row " + std::to_string(row));
            if (!std::isfinite(c) || c < 0.0)
                throw std::runtime_error("negative cost at row " + std::to_string(row));
            rec.scores.push_back(sc);
            rec.costs.push_back(c);
        }
        table.samples.push_back(std::move(rec));
    }
    if (table.samples.empty()) throw std::runtime_error("no samples in '" + path + "'");

    // mean costs for the profile are informational
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (const auto& s : table.samples) acc += s.costs[j];
        table.pool[j].mean_cost = acc / static_cast<double>(table.samples.size());
    }
    return table;
}

void save_table(const ScoreTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write table file '" + path + "'");
    out << "sample_id,label";
    for (const auto& d : table.pool) out << ",score_" << d.id << ",cost_" << d.id;
    out << "\n";
    char buf[64];
    for (const auto& s : table.samples) {
        out << s.sample_id << "," << s.label;
        for (std::size_t j = 0; j < table.pool.size(); ++j) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g", s.scores[j], s.costs[j]);
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::array<ScoreTable, 3> split(const ScoreTable& table, SplitFractions fractions,
                                std::uint64_t seed) {
    const double fr[3] = {fractions.train, fractions.val, fractions.test};
    double sum = fr[0] + fr[1] + fr[2];
    for (double f : fr)
        if (!(f > 0.0)) throw std::runtime_error("split fractions must be positive");
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::runtime_error("split fractions must sum to 1");

    const std::size_t total = table.samples.size();

    // Total partition sizes by largest remainder, then per-class quotas the
    // same way, constrained to those totals.
    std::size_t part_size[3];
    {
        double rem[3];
        std::size_t assigned = 0;
        for (int p = 0; p < 3; ++p) {
            double q = fr[p] * static_cast<double>(total);
            part_size[p] = static_cast<std::size_t>(std::floor(q));
            rem[p] = q - std::floor(q);
            assigned += part_size[p];
        }
        while (assigned < total) {
            int best = 0;
            for (int p = 1; p < 3; ++p)
                if (rem[p] > rem[best]) best = p;
            ++part_size[best];
            rem[best] = -1.0;
            ++assigned;
        }
    }

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < total; ++i) by_class[table.samples[i].label].push_back(i);

    Rng rng(mix_seed(seed, 0x5714ULL));
    rng.shuffle(by_class[0]);
    rng.shuffle(by_class[1]);

    // seats[p][c]: how many class-c samples go into partition p
    std::size_t seats[3][2] = {};
    for (int p = 0; p < 3; ++p) {
        double rem[2];
        std::size_t assigned = 0;
        for (int c = 0; c < 2; ++c) {
            double q = fr[p] * static_cast<double>(by_class[c].size());
            seats[p][c] = static_cast<std::size_t>(std::floor(q));
            rem[c] = q - std::floor(q);
            assigned += seats[p][c];
        }
        while (assigned < part_size[p]) {
            int c = rem[0] >= rem[1] ? 0 : 1;
            ++seats[p][c];
            rem[c] = -1.0;
            ++assigned;
        }
        // floor sums can overshoot the partition total by at most rounding slack
        while (assigned > part_size[p]) {
            int c = seats[p][0] >= seats[p][1] ? 0 : 1;
            --seats[p][c];
            --assigned;
        }
    }
    // Guarantee exhaustiveness: adjust the last partition to absorb leftovers.
    for (int c = 0; c < 2; ++c) {
        std::size_t used = seats[0][c] + seats[1][c];
        if (used > by_class[c].size())
            throw std::runtime_error("split allocation overflow");
        seats[2][c] = by_class[c].size() - used;
    }

    for (int p = 0; p < 3; ++p)
        for (int c = 0; c < 2; ++c)
            if (seats[p][c] == 0)
                throw std::runtime_error("split leaves a partition without class " +
                                         std::to_string(c) + " samples");

    std::array<ScoreTable, 3> out;
    std::size_t cursor[2] = {0, 0};
    for (int p = 0; p < 3; ++p) {
        out[p].pool = table.pool;
        out[p].split_seed = seed;
        std::vector<std::size_t> picks;
        for (int c = 0; c < 2; ++c)
            for (std::size_t k = 0; k < seats[p][c]; ++k)
                picks.push_back(by_class[c][cursor[c]++]);
        std::sort(picks.begin(), picks.end()); // keep original row order
        for (std::size_t idx : picks) out[p].samples.push_back(table.samples[idx]);
    }
    return out;
}

void SynthSpec::validate() const {
    if (detectors.empty()) throw std::runtime_error("synth spec needs at least 1 detector");
    if (n_samples <= 0) throw std::runtime_error("synth spec needs n_samples > 0");
    if (!(class_balance > 0.0 && class_balance < 1.0))
        throw std::runtime_error("class_balance must be in (0,1)");
    for (const auto& d : detectors) {
        if (!(d.accuracy >= 0.5 && d.accuracy <= 1.0))
            throw std::runtime_error("detector accuracy must be in [0.5,1]");
        if (!(d.noise >= 0.0)) throw std::runtime_error("detector noise must be >= 0");
        if (d.cost_law == CostLaw::kConstant && !(d.cost_constant >= 0.0))
            throw std::runtime_error("constant cost must be >= 0");
        if (d.cost_law == CostLaw::kLognormal && !(d.cost_sigma >= 0.0))
            throw std::runtime_error("lognormal sigma must be >= 0");
    }
}

ScoreTable synthesize(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n = spec.detectors.size();

    ScoreTable table;
    for (std::size_t j = 0; j < n; ++j) {
        DetectorProfile p;
        p.id = "d" + std::to_string(j);
        p.display_name = "synth-" + p.id;
        const auto& d = spec.detectors[j];
        p.mean_cost = d.cost_law == CostLaw::kConstant
                          ? d.cost_constant
                          : std::exp(d.cost_mu + 0.5 * d.cost_sigma * d.cost_sigma);
        table.pool.push_back(std::move(p));
    }

    // Error std per detector: calibrated from accuracy via the inverse normal
    // CDF (threshold at 0.5 flips with probability 1-accuracy), with `noise`
    // as a jitter floor.
    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& d = spec.detectors[j];
        double calibrated;
        if (d.accuracy >= 1.0) calibrated = 0.0;
        else if (d.accuracy <= 0.5) calibrated = 1e9;
        else calibrated = 0.5 / inverse_normal_cdf(d.accuracy);
        sigma[j] = std::max(calibrated, d.noise);
    }

    Rng rng(mix_seed(spec.seed, 0xc0ffee));
    char idbuf[32];
    for (int i = 0; i < spec.n_samples; ++i) {
        SampleRecord rec;
        std::snprintf(idbuf, sizeof idbuf, "s%06d", i);
        rec.sample_id = idbuf;
        rec.label = rng.uniform01() < spec.class_balance ? 1 : 0;
        for (std::size_t j = 0; j < n; ++j) {
            double err = sigma[j] > 0.0 ? sigma[j] * rng.normal() : 0.0;
            double score = std::clamp(static_cast<double>(rec.label) + err, 0.0, 1.0);
            rec.scores.push_back(score);
            const auto& d = spec.detectors[j];
            double cost = d.cost_law == CostLaw::kConstant
                              ? d.cost_constant
                              : std::exp(d.cost_mu + d.cost_sigma * rng.normal());
            rec.costs.push_back(cost);
        }
        table.samples.push_back(std::move(rec));
    }
    return table;
}

} // namespace cascadeforge
