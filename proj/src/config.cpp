#include "cascadeforge/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace cascadeforge {

namespace {

const char* const kKnownKeys[] = {
    "seed",
    "data.table",
    "data.out",
    "data.split.train",
    "data.split.val",
    "data.split.test",
    "data.split.seed",
    "data.synth.n_detectors",
    "data.synth.n_samples",
    "data.synth.class_balance",
    "data.synth.seed",
    "reward.scheme",
    "reward.d",
    "reward.t_cap",
    "goal.metric",
    "goal.lower",
    "goal.upper",
    "goal.bonus",
    "goal.batch",
    "goal.sign_mode",
    "train.seed",
    "train.epochs",
    "train.lr",
    "train.lr_decay",
    "train.decay",
    "train.epsilon",
    "train.gamma",
    "train.entropy_coef",
    "train.value_coef",
    "train.explore_eps",
    "train.optimistic_init",
    "train.minibatch",
    "train.replay_capacity",
    "train.warmup_episodes",
    "train.hidden",
    "train.init_checkpoint",
    "train.checkpoint",
    "train.log",
    "transfer.source.boundaries",
    "transfer.source.segments",
    "transfer.target.d0",
    "transfer.target.d_cap",
    "transfer.epsilon",
    "transfer.alpha",
    "transfer.boundary_tol",
    "transfer.seed",
    "transfer.out",
    "transfer.report",
    "attack.kind",
    "attack.goal",
    "attack.method",
    "attack.epsilon",
    "attack.schedule",
    "attack.schedule_k",
    "attack.schedule_q",
    "attack.pgd_steps",
    "attack.pgd_step_frac",
    "attack.defense",
    "attack.defense_runs",
    "attack.samples",
    "attack.seed",
    "attack.checkpoint",
    "attack.target",
    "attack.ensemble_rule",
    "attack.ensemble_subset",
    "attack.report",
    "eval.checkpoint",
    "eval.report",
    "eval.table_out",
    "eval.baselines",
    "eval.quality",
    "eval.mode",
    "eval.seed",
    "report.inputs",
    "report.out",
};

// data.synth.det<i>.{accuracy,cost,cost_mu,cost_sigma,noise}
bool is_detector_key(const std::string& key) {
    const std::string prefix = "data.synth.det";
    if (key.rfind(prefix, 0) != 0) return false;
    std::size_t i = prefix.size();
    std::size_t digits = 0;
    while (i < key.size() && std::isdigit(static_cast<unsigned char>(key[i]))) {
        ++i;
        ++digits;
    }
    if (digits == 0 || i >= key.size() || key[i] != '.') return false;
    const std::string field = key.substr(i + 1);
    return field == "accuracy" || field == "cost" || field == "cost_mu" ||
           field == "cost_sigma" || field == "noise";
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

void RunConfig::check_known(const std::string& key) {
    for (const char* k : kKnownKeys)
        if (key == k) return;
    if (is_detector_key(key)) return;
    throw std::runtime_error("unknown config key '" + key + "'");
}

RunConfig RunConfig::from_file(const std::string& path) {
    RunConfig cfg;
    cfg.merge_file(path);
    return cfg;
}

void RunConfig::merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
        set(key, value);
    }
}

void RunConfig::apply_override(const std::string& spec) {
    std::size_t eq = spec.find('=');
    if (eq == std::string::npos)
        throw std::runtime_error("override '" + spec + "' must look like key=value");
    set(trim(spec.substr(0, eq)), trim(spec.substr(eq + 1)));
}

void RunConfig::apply_environment() {
    if (const char* env = std::getenv("CASCADEFORGE_SEED"); env != nullptr && *env != '\0')
        set("train.seed", env);
}

void RunConfig::set(const std::string& key, const std::string& value) {
    check_known(key);
    values_[key] = value;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::require_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("missing required config key '" + key + "'");
    return it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "' is not a number: '" + it->second + "'");
    }
}

double RunConfig::require_double(const std::string& key) const {
    if (!has(key)) throw std::runtime_error("missing required config key '" + key + "'");
    return get_double(key, 0.0);
}

long RunConfig::get_int(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "' is not an integer: '" + it->second +
                                 "'");
    }
}

long RunConfig::require_int(const std::string& key) const {
    if (!has(key)) throw std::runtime_error("missing required config key '" + key + "'");
    return get_int(key, 0);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config key '" + key + "' is not a boolean: '" + it->second + "'");
}

std::uint64_t RunConfig::get_seed(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "' is not a seed: '" + it->second + "'");
    }
}

} // namespace cascadeforge
