#include "cascadeforge/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "cascadeforge/attack.hpp"
#include "cascadeforge/checkpoint.hpp"
#include "cascadeforge/config.hpp"
#include "cascadeforge/eval_runner.hpp"
#include "cascadeforge/trainer.hpp"
#include "cascadeforge/transfer.hpp"

namespace cascadeforge {

namespace {

using json = nlohmann::ordered_json;

struct CliArgs {
    std::string subcommand;
    std::vector<std::string> config_files;
    std::vector<std::string> overrides;
    std::string test_table;
    std::string out_dir;
};

std::string out_path(const CliArgs& cli, const std::string& path) {
    if (cli.out_dir.empty() || path.empty() || path.front() == '/') return path;
    return cli.out_dir + "/" + path;
}

RunConfig assemble_config(const CliArgs& cli) {
    RunConfig cfg = RunConfig::empty();
    for (const auto& f : cli.config_files) cfg.merge_file(f);
    for (const auto& o : cli.overrides) cfg.apply_override(o);
    cfg.apply_environment();
    return cfg;
}

SplitFractions split_fractions(const RunConfig& cfg) {
    SplitFractions f;
    f.train = cfg.get_double("data.split.train", 0.75);
    f.val = cfg.get_double("data.split.val", 0.10);
    f.test = cfg.get_double("data.split.test", 0.15);
    return f;
}

CostCurve curve_from(const RunConfig& cfg) {
    return CostCurve::two_region(cfg.get_double("reward.d", 1.0),
                                 cfg.get_double("reward.t_cap", 34.0));
}

RewardScheme scheme_from(const RunConfig& cfg) {
    long id = cfg.get_int("reward.scheme", 3);
    if (id < 1 || id > 5) throw std::runtime_error("reward.scheme out of 1..5");
    return RewardScheme::preset(static_cast<int>(id), curve_from(cfg));
}

GoalMetric parse_goal_metric(const std::string& name) {
    if (name == "recall") return GoalMetric::kRecall;
    if (name == "precision") return GoalMetric::kPrecision;
    if (name == "accuracy") return GoalMetric::kAccuracy;
    if (name == "f1") return GoalMetric::kF1;
    throw std::runtime_error("goal.metric must be recall|precision|accuracy|f1");
}

std::optional<MetricGoal> goal_from(const RunConfig& cfg) {
    if (!cfg.has("goal.metric")) return std::nullopt;
    MetricGoal g;
    g.metric = parse_goal_metric(cfg.require_string("goal.metric"));
    g.lower = cfg.require_double("goal.lower");
    g.upper = cfg.require_double("goal.upper");
    g.bonus = cfg.get_double("goal.bonus", 2.0);
    g.batch_size = static_cast<int>(cfg.get_int("goal.batch", 256));
    std::string mode = cfg.get_string("goal.sign_mode", "literal");
    if (mode == "literal") g.sign_mode = SignMode::kLiteral;
    else if (mode == "sign_preserving") g.sign_mode = SignMode::kSignPreserving;
    else throw std::runtime_error("goal.sign_mode must be literal|sign_preserving");
    g.validate();
    return g;
}

TrainConfig train_config_from(const RunConfig& cfg) {
    TrainConfig tc;
    std::uint64_t global_seed = cfg.get_seed("seed", 0);
    tc.seed = cfg.get_seed("train.seed", global_seed);
    tc.lr = cfg.get_double("train.lr", 1e-3);
    tc.lr_decay = cfg.get_double("train.lr_decay", 1.0);
    tc.decay = cfg.get_double("train.decay", 0.99);
    tc.epsilon = cfg.get_double("train.epsilon", 1e-8);
    tc.gamma = cfg.get_double("train.gamma", 1.0);
    tc.epochs = static_cast<int>(cfg.get_int("train.epochs", 20));
    tc.entropy_coef = cfg.get_double("train.entropy_coef", 0.01);
    tc.value_coef = cfg.get_double("train.value_coef", 0.5);
    tc.explore_eps = cfg.get_double("train.explore_eps", 0.05);
    tc.optimistic_init = cfg.get_bool("train.optimistic_init", true);
    tc.minibatch = static_cast<int>(cfg.get_int("train.minibatch", 32));
    tc.replay_capacity = static_cast<int>(cfg.get_int("train.replay_capacity", 5000));
    tc.warmup_episodes = static_cast<int>(cfg.get_int("train.warmup_episodes", 100));
    tc.hidden = static_cast<int>(cfg.get_int("train.hidden", 32));
    tc.validate();
    return tc;
}

SynthSpec synth_spec_from(const RunConfig& cfg) {
    SynthSpec spec;
    long n = cfg.require_int("data.synth.n_detectors");
    spec.n_samples = static_cast<int>(cfg.require_int("data.synth.n_samples"));
    spec.class_balance = cfg.get_double("data.synth.class_balance", 0.5);
    spec.seed = cfg.get_seed("data.synth.seed", cfg.get_seed("seed", 0));
    for (long i = 0; i < n; ++i) {
        std::string prefix = "data.synth.det" + std::to_string(i) + ".";
        SynthDetector d;
        d.accuracy = cfg.require_double(prefix + "accuracy");
        d.noise = cfg.get_double(prefix + "noise", 0.0);
        if (cfg.has(prefix + "cost_mu") || cfg.has(prefix + "cost_sigma")) {
            d.cost_law = CostLaw::kLognormal;
            d.cost_mu = cfg.require_double(prefix + "cost_mu");
            d.cost_sigma = cfg.require_double(prefix + "cost_sigma");
        } else {
            d.cost_law = CostLaw::kConstant;
            d.cost_constant = cfg.get_double(prefix + "cost", 1.0);
        }
        spec.detectors.push_back(d);
    }
    spec.validate();
    return spec;
}

std::string pool_ids(const ScoreTable& table) {
    std::string out;
    for (const auto& d : table.pool) {
        if (!out.empty()) out += ",";
        out += d.id;
    }
    return out;
}

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// ---------------------------------------------------------------- gen ----

int cmd_gen(const CliArgs& cli) {
    RunConfig cfg = assemble_config(cli);
    SynthSpec spec = synth_spec_from(cfg);
    ScoreTable table = synthesize(spec);
    std::string out = out_path(cli, cfg.require_string("data.out"));
    save_table(table, out);
    std::cout << "wrote " << table.samples.size() << " samples x " << table.pool.size()
              << " detectors to " << out << "\n";
    return 0;
}

// -------------------------------------------------------------- train ----

void check_pool_match(const Checkpoint& ckpt, const ScoreTable& table);

int cmd_train(const CliArgs& cli) {
    RunConfig cfg = assemble_config(cli);
    ScoreTable table = load_table(cfg.require_string("data.table"));
    auto splits = split(table, split_fractions(cfg), cfg.get_seed("data.split.seed", cfg.get_seed("seed", 0)));
    RewardScheme scheme = scheme_from(cfg);
    auto goal = goal_from(cfg);
    TrainConfig tc = train_config_from(cfg);

    std::optional<PolicyParams> warm_start;
    if (cfg.has("train.init_checkpoint")) {
        Checkpoint init = load_checkpoint(cfg.require_string("train.init_checkpoint"));
        check_pool_match(init, table);
        warm_start = init.params;
    }
    TrainResult result = train(splits[0], splits[1], scheme, goal, tc, warm_start);

    Checkpoint ckpt;
    ckpt.params = result.params;
    ckpt.config.emplace_back("pool", pool_ids(table));
    ckpt.config.emplace_back("reward.scheme", std::to_string(scheme.scheme_id));
    ckpt.config.emplace_back("reward.d", fmt(cfg.get_double("reward.d", 1.0)));
    ckpt.config.emplace_back("reward.t_cap", fmt(cfg.get_double("reward.t_cap", 34.0)));
    ckpt.config.emplace_back("train.seed", std::to_string(tc.seed));
    ckpt.config.emplace_back("best_epoch", std::to_string(result.best_epoch));
    ckpt.config.emplace_back("best_val_reward", fmt(result.best_val_reward));
    if (goal) {
        ckpt.config.emplace_back("goal.metric", cfg.require_string("goal.metric"));
        ckpt.config.emplace_back("goal.lower", fmt(goal->lower));
        ckpt.config.emplace_back("goal.upper", fmt(goal->upper));
        ckpt.config.emplace_back("goal.bonus", fmt(goal->bonus));
        ckpt.config.emplace_back("goal.batch", std::to_string(goal->batch_size));
    }
    std::string ckpt_path = out_path(cli, cfg.require_string("train.checkpoint"));
    save_checkpoint(ckpt, ckpt_path);

    if (cfg.has("train.log")) {
        std::ofstream log(out_path(cli, cfg.require_string("train.log")));
        if (!log) throw std::runtime_error("cannot write train.log");
        for (const auto& e : result.log)
            log << "epoch " << e.epoch << " train_reward " << fmt(e.mean_train_reward, "%.6f")
                << " val_reward " << fmt(e.val_reward, "%.6f") << " replay " << e.replay_size
                << "\n";
    }
    std::cout << "trained " << tc.epochs << " epochs; best epoch " << result.best_epoch
              << " val_reward " << fmt(result.best_val_reward, "%.6f") << "; checkpoint "
              << ckpt_path << "\n";
    return 0;
}

// --------------------------------------------------------------- eval ----

struct ReportRow {
    std::string combination;
    std::string aggregation;
    MetricsReport metrics;
};

json row_to_json(const ReportRow& row) {
    json j;
    j["combination"] = row.combination;
    j["aggregation"] = row.aggregation;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
        else j[key] = nullptr;
    };
    put("auc", row.metrics.auc);
    put("f1", row.metrics.f1);
    j["time"] = row.metrics.mean_time;
    put("precision", row.metrics.precision);
    put("recall", row.metrics.recall);
    put("accuracy", row.metrics.accuracy);
    j["tp"] = row.metrics.tp;
    j["tn"] = row.metrics.tn;
    j["fp"] = row.metrics.fp;
    j["fn"] = row.metrics.fn;
    return j;
}

std::string cell(const std::optional<double>& v) {
    if (!v) return "-";
    return fmt(*v * 100.0, "%.2f");
}

void print_table(std::ostream& os, const std::vector<ReportRow>& rows) {
    os << "Combination                      Aggregation      AUC      F1    Time(s)  "
          "Precision  Recall  Accuracy\n";
    for (const auto& r : rows) {
        char line[256];
        std::snprintf(line, sizeof line, "%-32s %-11s %7s %7s %10.6f %9s %8s %8s\n",
                      r.combination.c_str(), r.aggregation.c_str(), cell(r.metrics.auc).c_str(),
                      cell(r.metrics.f1).c_str(), r.metrics.mean_time,
                      cell(r.metrics.precision).c_str(), cell(r.metrics.recall).c_str(),
                      cell(r.metrics.accuracy).c_str());
        os << line;
    }
}

void sort_rows(std::vector<ReportRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        double fa = a.metrics.f1.value_or(-1.0), fb = b.metrics.f1.value_or(-1.0);
        return fa > fb;
    });
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

void check_pool_match(const Checkpoint& ckpt, const ScoreTable& table) {
    const std::string* pool = ckpt.find("pool");
    if (pool == nullptr) throw std::runtime_error("checkpoint lacks a detector pool record");
    if (*pool != pool_ids(table))
        throw std::runtime_error("detector pools do not match: checkpoint has '" + *pool +
                                 "', table has '" + pool_ids(table) + "'");
}

RewardScheme scheme_from_checkpoint(const Checkpoint& ckpt, const RunConfig& cfg) {
    // checkpoint echo wins; config fills anything missing
    RunConfig merged = cfg;
    if (const auto* v = ckpt.find("reward.scheme")) merged.set("reward.scheme", *v);
    if (const auto* v = ckpt.find("reward.d")) merged.set("reward.d", *v);
    if (const auto* v = ckpt.find("reward.t_cap")) merged.set("reward.t_cap", *v);
    return scheme_from(merged);
}

int cmd_eval(const CliArgs& cli) {
    RunConfig cfg = assemble_config(cli);
    Checkpoint ckpt = load_checkpoint(cfg.require_string("eval.checkpoint"));

    std::string table_path =
        cli.test_table.empty() ? cfg.require_string("data.table") : cli.test_table;
    ScoreTable table = load_table(table_path);
    check_pool_match(ckpt, table);
    auto splits = split(table, split_fractions(cfg),
                        cfg.get_seed("data.split.seed", cfg.get_seed("seed", 0)));
    const ScoreTable& test = splits[2];
    const int n = static_cast<int>(test.n_detectors());

    RewardScheme scheme = scheme_from_checkpoint(ckpt, cfg);
    std::string mode_str = cfg.get_string("eval.mode", "deterministic");
    ActMode mode;
    if (mode_str == "deterministic") mode = ActMode::kDeterministic;
    else if (mode_str == "stochastic") mode = ActMode::kStochastic;
    else throw std::runtime_error("eval.mode must be deterministic|stochastic");

    auto labels = labels_of(test);
    std::vector<ReportRow> rows;

    auto agent_evals = evaluate_policy(ckpt.params, test, scheme, mode,
                                       cfg.get_seed("eval.seed", cfg.get_seed("seed", 0)));
    rows.push_back({"agent", "DRL", compute_metrics(to_pred_rows(agent_evals), labels)});

    if (cfg.get_bool("eval.baselines", true)) {
        for (const auto& ens : enumerate_baselines(n)) {
            auto preds = evaluate_ensemble(ens, test);
            rows.push_back({ens.name(test.pool), ens.rule_name(), compute_metrics(preds, labels)});
        }
    }

    std::string quality_key = cfg.get_string("eval.quality", "f1");
    if (quality_key != "f1" && quality_key != "auc")
        throw std::runtime_error("eval.quality must be f1|auc");
    std::vector<ParetoPoint> points;
    for (const auto& r : rows) {
        auto q = quality_key == "f1" ? r.metrics.f1 : r.metrics.auc;
        if (q) points.push_back({r.combination + "/" + r.aggregation, *q, r.metrics.mean_time});
    }
    auto front = pareto_front(points);

    sort_rows(rows);

    json report;
    report["table"] = table_path;
    report["test_samples"] = test.samples.size();
    report["quality"] = quality_key;
    report["rows"] = json::array();
    for (const auto& r : rows) report["rows"].push_back(row_to_json(r));
    report["pareto"] = json::array();
    for (const auto& p : front) report["pareto"].push_back(p.name);

    // complementarity: fraction of detector i's mistakes that detector j
    // gets right, at threshold 0.5
    auto comp = complementarity_matrix(test);
    report["complementarity"] = json::array();
    for (int i = 0; i < comp.n; ++i) {
        json row = json::array();
        for (int j = 0; j < comp.n; ++j) {
            if (comp.is_defined(i, j)) row.push_back(comp.at(i, j));
            else row.push_back(nullptr);
        }
        report["complementarity"].push_back(row);
    }

    if (cfg.has("eval.report")) {
        std::ofstream out(out_path(cli, cfg.require_string("eval.report")));
        if (!out) throw std::runtime_error("cannot write eval.report");
        out << report.dump(2) << "\n";
    }
    if (cfg.has("eval.table_out")) {
        std::ofstream out(out_path(cli, cfg.require_string("eval.table_out")));
        if (!out) throw std::runtime_error("cannot write eval.table_out");
        print_table(out, rows);
    }
    print_table(std::cout, rows);
    std::cout << "pareto front:";
    for (const auto& p : front) std::cout << " " << p.name;
    std::cout << "\n";
    return 0;
}

// ------------------------------------------------------------- attack ----

int cmd_attack(const CliArgs& cli) {
    RunConfig cfg = assemble_config(cli);
    std::string ckpt_path = cfg.get_string("attack.checkpoint", cfg.get_string("eval.checkpoint", ""));
    if (ckpt_path.empty()) throw std::runtime_error("missing required config key 'attack.checkpoint'");
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    ScoreTable table = load_table(cfg.require_string("data.table"));
    check_pool_match(ckpt, table);
    auto splits = split(table, split_fractions(cfg),
                        cfg.get_seed("data.split.seed", cfg.get_seed("seed", 0)));
    const ScoreTable& test = splits[2];
    const int n = static_cast<int>(test.n_detectors());

    AttackConfig ac;
    ac.epsilon = cfg.get_double("attack.epsilon", 0.5);
    std::string sched = cfg.get_string("attack.schedule", "uniform");
    if (sched == "all_at_once") ac.schedule = ScheduleKind::kAllAtOnce;
    else if (sched == "uniform") ac.schedule = ScheduleKind::kUniform;
    else if (sched == "geometric") ac.schedule = ScheduleKind::kGeometric;
    else throw std::runtime_error("attack.schedule must be all_at_once|uniform|geometric");
    ac.all_at_once_step = static_cast<int>(cfg.get_int("attack.schedule_k", 1));
    ac.geometric_q = cfg.get_double("attack.schedule_q", 0.5);
    std::string method = cfg.get_string("attack.method", "pgd");
    if (method == "pgd") ac.method = AttackMethod::kPgd;
    else if (method == "fgsm") ac.method = AttackMethod::kFgsm;
    else throw std::runtime_error("attack.method must be pgd|fgsm");
    ac.pgd_steps = static_cast<int>(cfg.get_int("attack.pgd_steps", 10));
    ac.pgd_step_frac = cfg.get_double("attack.pgd_step_frac", 0.25);
    std::string goal = cfg.get_string("attack.goal", "evade");
    if (goal == "evade") ac.goal = AttackGoal::kEvade;
    else if (goal == "resource") ac.goal = AttackGoal::kResource;
    else throw std::runtime_error("attack.goal must be evade|resource");
    std::string defense = cfg.get_string("attack.defense", "deterministic");
    if (defense == "deterministic") ac.defense = DefenseMode::kDeterministic;
    else if (defense == "stochastic") ac.defense = DefenseMode::kStochastic;
    else throw std::runtime_error("attack.defense must be deterministic|stochastic");
    ac.defense_runs = static_cast<int>(cfg.get_int("attack.defense_runs", 10));
    ac.seed = cfg.get_seed("attack.seed", cfg.get_seed("seed", 0));
    ac.validate(n);

    const int n_samples = static_cast<int>(cfg.get_int("attack.samples", 1000));
    std::string kind = cfg.get_string("attack.kind", "whitebox");
    std::string target = cfg.get_string("attack.target", "agent");

    CampaignReport report;
    if (target == "ensemble") {
        if (kind != "blackbox")
            throw std::runtime_error("gradient attacks do not apply to static ensembles; "
                                     "use attack.kind = blackbox");
        StaticEnsemble ens;
        std::string rule = cfg.get_string("attack.ensemble_rule", "or");
        if (rule == "or") ens.rule = StaticEnsemble::Rule::kOr;
        else if (rule == "majority") ens.rule = StaticEnsemble::Rule::kMajority;
        else throw std::runtime_error("attack.ensemble_rule must be majority|or");
        std::string subset = cfg.get_string("attack.ensemble_subset", "all");
        if (subset == "all") {
            ens.subset_mask = (1u << n) - 1;
        } else {
            for (const auto& tok : split_list(subset, ',')) {
                int idx = std::stoi(tok);
                if (idx < 0 || idx >= n) throw std::runtime_error("ensemble subset index out of range");
                ens.subset_mask |= 1u << idx;
            }
        }
        report = run_campaign_ensemble(ens, test, ac, n_samples);
    } else if (target == "agent") {
        if (kind == "whitebox") report = run_campaign(ckpt.params, test, ac, n_samples);
        else if (kind == "blackbox") report = run_blackbox_campaign(ckpt.params, test, ac, n_samples);
        else throw std::runtime_error("attack.kind must be whitebox|blackbox");
    } else {
        throw std::runtime_error("attack.target must be agent|ensemble");
    }

    json j;
    j["config"] = json::object();
    for (const auto& [k, v] : cfg.values()) j["config"][k] = v;
    j["kind"] = kind;
    j["target"] = target;
    j["rounds"] = report.rounds;
    j["samples_per_round"] = report.samples_per_round;
    if (report.success_rate_defined) j["success_rate"] = report.success_rate;
    else j["success_rate"] = nullptr;
    j["round_rates"] = report.round_rates;
    j["mean_detectors_changed"] = report.mean_detectors_changed;
    j["mean_perturbation"] = report.mean_perturbation;
    j["mean_original_cost"] = report.mean_original_cost;
    j["mean_perturbed_cost"] = report.mean_perturbed_cost;
    j["max_budget_spent"] = report.max_budget_spent;

    if (cfg.has("attack.report")) {
        std::ofstream out(out_path(cli, cfg.require_string("attack.report")));
        if (!out) throw std::runtime_error("cannot write attack.report");
        out << j.dump(2) << "\n";
    }
    if (report.success_rate_defined)
        std::cout << "attack success rate " << fmt(report.success_rate, "%.4f") << " over "
                  << report.rounds << " rounds x " << report.samples_per_round << " samples\n";
    else
        std::cout << "attack campaign empty; success rate undefined\n";
    return 0;
}

// ----------------------------------------------------------- transfer ----

Segment parse_segment(const std::string& spec) {
    auto parts = split_list(spec, ':');
    if (parts.empty()) throw std::runtime_error("empty curve segment descriptor");
    // linear:a:b reads as a*t + b; log:scale:shift:denom as
    // 1 + log2((scale*t + shift)/denom)
    if (parts[0] == "linear") {
        if (parts.size() != 3) throw std::runtime_error("linear segment needs linear:a:b");
        return Segment::linear(0.0, std::stod(parts[2]), std::stod(parts[1]));
    }
    if (parts[0] == "log") {
        if (parts.size() != 4) throw std::runtime_error("log segment needs log:scale:shift:denom");
        return Segment::log2_of(0.0, std::stod(parts[2]), std::stod(parts[1]),
                                std::stod(parts[3]));
    }
    throw std::runtime_error("segment kind must be linear|log");
}

CostCurve source_curve_from(const RunConfig& cfg) {
    std::string bounds = cfg.get_string("transfer.source.boundaries", "0,1,34");
    std::string segs = cfg.get_string("transfer.source.segments", "linear:1:0;log:1:0:1");
    CostCurve curve;
    for (const auto& tok : split_list(bounds, ',')) curve.boundaries.push_back(std::stod(tok));
    for (const auto& tok : split_list(segs, ';')) curve.segments.push_back(parse_segment(tok));
    curve.validate();
    return curve;
}

int cmd_transfer(const CliArgs& cli) {
    RunConfig cfg = assemble_config(cli);
    TransferProblem problem;
    problem.source = source_curve_from(cfg);
    problem.target_start = cfg.get_double("transfer.target.d0", 0.0);
    problem.target_end = cfg.require_double("transfer.target.d_cap");
    problem.epsilon = cfg.get_double("transfer.epsilon", 1e-8);
    problem.alpha = cfg.get_double("transfer.alpha", 1.0);
    problem.boundary_tol = cfg.get_double("transfer.boundary_tol", 1e-4);
    problem.seed = cfg.get_seed("transfer.seed", cfg.get_seed("seed", 0));

    DensityModel source_model = likelihood_ratios(problem.source);
    TransferSolution sol = transfer(problem);

    if (cfg.has("transfer.out")) {
        std::ofstream out(out_path(cli, cfg.require_string("transfer.out")));
        if (!out) throw std::runtime_error("cannot write transfer.out");
        out << "# transferred cost-curve parameters\n";
        out << "# boundaries:";
        for (double b : sol.boundaries) out << " " << fmt(b);
        out << "\n";
        out << "reward.d = " << fmt(sol.boundaries[1]) << "\n";
        out << "reward.t_cap = " << fmt(sol.boundaries.back()) << "\n";
    }

    json j;
    j["beta_source"] = source_model.beta;
    j["beta_target"] = sol.beta_target;
    j["sym_kl"] = sol.achieved_sym_kl;
    j["iterations"] = sol.iterations;
    j["sweeps"] = sol.sweeps;
    j["boundaries"] = sol.boundaries;
    j["epsilon"] = problem.epsilon;
    if (cfg.has("transfer.report")) {
        std::ofstream out(out_path(cli, cfg.require_string("transfer.report")));
        if (!out) throw std::runtime_error("cannot write transfer.report");
        out << j.dump(2) << "\n";
    }
    std::cout << "transfer solved: d = " << fmt(sol.boundaries[1])
              << ", sym_kl = " << fmt(sol.achieved_sym_kl) << " after " << sol.iterations
              << " iterations\n";
    return 0;
}

// ------------------------------------------------------------- report ----

int cmd_report(const CliArgs& cli) {
    RunConfig cfg = assemble_config(cli);
    auto inputs = split_list(cfg.require_string("report.inputs"), ',');
    if (inputs.empty()) throw std::runtime_error("report.inputs lists no files");

    json merged;
    merged["rows"] = json::array();
    for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open report input '" + path + "'");
        json j = json::parse(in);
        if (j.contains("rows"))
            for (auto& row : j["rows"]) merged["rows"].push_back(row);
        else
            merged["attacks"].push_back(j);
    }
    auto& rows = merged["rows"];
    auto f1_of = [](const json& r) {
        return r.contains("f1") && !r["f1"].is_null() ? r["f1"].get<double>() : -1.0;
    };
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const json& a, const json& b) { return f1_of(a) > f1_of(b); });

    if (cfg.has("report.out")) {
        std::ofstream out(out_path(cli, cfg.require_string("report.out")));
        if (!out) throw std::runtime_error("cannot write report.out");
        out << merged.dump(2) << "\n";
    }

    std::vector<ReportRow> table_rows;
    for (const auto& row : rows) {
        ReportRow r;
        r.combination = row.value("combination", "?");
        r.aggregation = row.value("aggregation", "?");
        auto opt = [&](const char* key) -> std::optional<double> {
            if (!row.contains(key) || row[key].is_null()) return std::nullopt;
            return row[key].get<double>();
        };
        r.metrics.auc = opt("auc");
        r.metrics.f1 = opt("f1");
        r.metrics.precision = opt("precision");
        r.metrics.recall = opt("recall");
        r.metrics.accuracy = opt("accuracy");
        r.metrics.mean_time = row.value("time", 0.0);
        table_rows.push_back(std::move(r));
    }
    print_table(std::cout, table_rows);
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CliArgs cli;
    try {
        if (args.empty())
            throw std::runtime_error(
                "usage: cascadeforge <gen|train|eval|attack|transfer|report> "
                "[--config file]... [--set key=value]... [--test-table file] [--out dir]");
        cli.subcommand = args[0];
        for (std::size_t i = 1; i < args.size(); ++i) {
            const std::string& a = args[i];
            auto need_value = [&](const char* flag) -> const std::string& {
                if (i + 1 >= args.size())
                    throw std::runtime_error(std::string(flag) + " needs a value");
                return args[++i];
            };
            if (a == "--config") cli.config_files.push_back(need_value("--config"));
            else if (a == "--set") cli.overrides.push_back(need_value("--set"));
            else if (a == "--test-table") cli.test_table = need_value("--test-table");
            else if (a == "--out") cli.out_dir = need_value("--out");
            else throw std::runtime_error("unknown flag '" + a + "'");
        }
        if (!cli.test_table.empty() && cli.subcommand != "eval")
            throw std::runtime_error("--test-table only applies to the eval subcommand");

        if (cli.subcommand == "gen") return cmd_gen(cli);
        if (cli.subcommand == "train") return cmd_train(cli);
        if (cli.subcommand == "eval") return cmd_eval(cli);
        if (cli.subcommand == "attack") return cmd_attack(cli);
        if (cli.subcommand == "transfer") return cmd_transfer(cli);
        if (cli.subcommand == "report") return cmd_report(cli);
        throw std::runtime_error("unknown subcommand '" + cli.subcommand + "'");
    } catch (const std::exception& e) {
        std::cerr << "cascadeforge: " << e.what() << "\n";
        return 1;
    }
}

} // namespace cascadeforge
