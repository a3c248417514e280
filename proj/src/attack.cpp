#include "cascadeforge/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cascadeforge/env.hpp"
#include "cascadeforge/trainer.hpp"

namespace cascadeforge {

void AttackConfig::validate(int n_detectors) const {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("attack: epsilon must be >= 0");
    if (schedule == ScheduleKind::kAllAtOnce &&
        (all_at_once_step < 1 || all_at_once_step > n_detectors))
        throw std::invalid_argument("attack: all-at-once step must be in 1..n");
    if (schedule == ScheduleKind::kGeometric && !(geometric_q > 0.0 && geometric_q <= 0.5))
        throw std::invalid_argument("attack: geometric q must be in (0, 1/2]");
    if (pgd_steps < 1) throw std::invalid_argument("attack: pgd steps must be >= 1");
    if (!(pgd_step_frac > 0.0 && pgd_step_frac <= 1.0))
        throw std::invalid_argument("attack: pgd step fraction must be in (0,1]");
    if (defense_runs < 1) throw std::invalid_argument("attack: defense runs must be >= 1");
}

std::vector<double> schedule_budgets(ScheduleKind schedule, double epsilon, int n, int k,
                                     double q) {
    if (n < 1) throw std::invalid_argument("schedule_budgets: n must be >= 1");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("schedule_budgets: epsilon >= 0");
    std::vector<double> budgets(static_cast<std::size_t>(n), 0.0);
    switch (schedule) {
    case ScheduleKind::kAllAtOnce:
        if (k < 1 || k > n) throw std::invalid_argument("schedule_budgets: k must be in 1..n");
        budgets[static_cast<std::size_t>(k - 1)] = epsilon;
        break;
    case ScheduleKind::kUniform:
        for (auto& b : budgets) b = epsilon / static_cast<double>(n);
        break;
    case ScheduleKind::kGeometric: {
        if (!(q > 0.0 && q <= 0.5))
            throw std::invalid_argument("schedule_budgets: q must be in (0, 1/2]");
        double factor = q;
        for (auto& b : budgets) {
            b = epsilon * factor;
            factor *= q;
        }
        break;
    }
    }
    return budgets;
}

namespace {

double linf(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Target action set for the crafting loss; empty means nothing to push for.
std::vector<int> attack_targets(const AttackConfig& cfg, const State& state, int n) {
    std::vector<int> targets;
    if (cfg.goal == AttackGoal::kEvade) {
        targets.push_back(n + kBenign);
        return targets;
    }
    for (int i = 0; i < n; ++i)
        if (!state.invoked(static_cast<std::size_t>(i))) targets.push_back(i);
    return targets;
}

// FGSM/PGD step on the invoked score entries, within the step budget and
// [0,1], descending -log(sum of target-action probabilities).
State craft_perturbation(const PolicyParams& params, const State& state,
                         const AttackConfig& cfg, double step_budget) {
    const int n = static_cast<int>(state.size());
    auto targets = attack_targets(cfg, state, n);
    if (targets.empty() || step_budget <= 0.0) return state;

    State crafted = state;
    const int iters = cfg.method == AttackMethod::kFgsm ? 1 : cfg.pgd_steps;
    const double step = cfg.method == AttackMethod::kFgsm
                            ? step_budget
                            : step_budget * cfg.pgd_step_frac;
    for (int it = 0; it < iters; ++it) {
        auto grad = input_gradient(params, crafted, targets);
        bool moved = false;
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            if (!state.invoked(idx)) continue; // sentinel entries stay untouched
            double g = grad[idx];
            if (g == 0.0) continue;
            double v = crafted.entries[idx] - step * (g > 0.0 ? 1.0 : -1.0);
            v = std::clamp(v, state.entries[idx] - step_budget,
                           state.entries[idx] + step_budget);
            v = std::clamp(v, 0.0, 1.0);
            if (v != crafted.entries[idx]) moved = true;
            crafted.entries[idx] = v;
        }
        if (!moved) break;
    }
    return crafted;
}

struct RolloutResult {
    int predicted = 0;
    double cost = 0.0;
    int invoked = 0;
};

RolloutResult plain_rollout(const PolicyParams& params, const SampleRecord& sample,
                            DefenseMode defense, std::uint64_t run_seed) {
    Rng rng(mix_seed(run_seed, 0xc1ea0));
    Episode ep = rollout(params, sample,
                         defense == DefenseMode::kStochastic ? ActMode::kStochastic
                                                             : ActMode::kDeterministic,
                         defense == DefenseMode::kStochastic ? &rng : nullptr);
    return {ep.predicted, ep.total_cost, ep.detectors_invoked()};
}

} // namespace

AttackOutcome white_box_attack(const PolicyParams& params, const SampleRecord& sample,
                               const AttackConfig& config, std::uint64_t run_seed) {
    const int n = static_cast<int>(sample.scores.size());
    config.validate(n);
    if (config.goal == AttackGoal::kEvade && sample.label != kPhishing)
        throw std::invalid_argument("white_box_attack: evade goal expects a phishing sample");

    AttackOutcome out;
    out.sample_id = sample.sample_id;

    // Clean reference trajectory; under the stochastic defense it uses the
    // same action-draw stream as the attacked rollout.
    RolloutResult clean = plain_rollout(params, sample, config.defense, run_seed);
    out.original_predicted = clean.predicted;
    out.original_cost = clean.cost;
    out.original_invoked = clean.invoked;

    if (clean.invoked == 0) {
        out.attackable = false;
        out.failure_reason = "clean policy classifies without invoking detectors";
        out.perturbed_predicted = clean.predicted;
        out.perturbed_cost = clean.cost;
        out.perturbed_invoked = clean.invoked;
        return out;
    }

    auto budgets = schedule_budgets(config.schedule, config.epsilon, n, config.all_at_once_step,
                                    config.geometric_q);

    Rng act_rng(mix_seed(run_seed, 0xc1ea0)); // common random numbers with the clean run
    const ActMode mode = config.defense == DefenseMode::kStochastic ? ActMode::kStochastic
                                                                    : ActMode::kDeterministic;
    State state = initial_state(n);
    std::vector<bool> touched(static_cast<std::size_t>(n), false);
    int perturb_events = 0;
    double perturb_total = 0.0;
    double cost = 0.0;
    int invoked = 0;
    int predicted = -1;
    for (int step_i = 0; step_i <= n; ++step_i) {
        int j = state.invoked_count();
        State crafted = state;
        if (j >= 1) {
            double eps_t = budgets[static_cast<std::size_t>(j - 1)];
            if (eps_t > 0.0) {
                crafted = craft_perturbation(params, state, config, eps_t);
                double moved = linf(crafted.entries, state.entries);
                out.budget_spent += moved;
                if (moved > 0.0) {
                    ++perturb_events;
                    perturb_total += moved;
                    for (std::size_t i = 0; i < crafted.entries.size(); ++i)
                        if (crafted.entries[i] != state.entries[i]) touched[i] = true;
                }
            }
        }
        Action a = act(params, crafted, mode, mode == ActMode::kStochastic ? &act_rng : nullptr);
        if (!a.is_invoke()) {
            predicted = a.predicted_class();
            break;
        }
        Transition t = step(crafted, a, sample);
        cost += t.step_cost;
        ++invoked;
        state = *t.next;
    }
    if (predicted < 0)
        throw std::logic_error("white_box_attack: rollout failed to classify");

    out.perturbed_predicted = predicted;
    out.perturbed_cost = cost;
    out.perturbed_invoked = invoked;
    out.detectors_changed = static_cast<int>(std::count(touched.begin(), touched.end(), true));
    out.mean_perturbation = perturb_events ? perturb_total / perturb_events : 0.0;

    if (config.goal == AttackGoal::kEvade) {
        out.success = clean.predicted == kPhishing && predicted == kBenign;
    } else {
        out.success = predicted == clean.predicted &&
                      (cost > clean.cost || invoked > clean.invoked);
    }
    return out;
}

SampleRecord black_box_attack(const SampleRecord& sample, double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("black_box_attack: epsilon >= 0");
    SampleRecord out = sample;
    for (auto& s : out.scores) {
        double delta = rng.next_u64() & 1u ? epsilon : -epsilon;
        s = std::clamp(s + delta, 0.0, 1.0);
    }
    return out;
}

namespace {

std::vector<std::size_t> pick_round_samples(const ScoreTable& table, const AttackConfig& cfg,
                                            int n_samples, int round) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < table.samples.size(); ++i)
        if (table.samples[i].label == kPhishing) eligible.push_back(i);
    if (static_cast<std::size_t>(n_samples) > eligible.size())
        throw std::invalid_argument("campaign: not enough phishing samples");
    Rng rng(mix_seed(cfg.seed, 0x70c4, static_cast<std::uint64_t>(round)));
    rng.shuffle(eligible);
    eligible.resize(static_cast<std::size_t>(n_samples));
    return eligible;
}

// Per-sample white-box attack, averaged over defense runs when stochastic.
// The representative outcome keeps the first run's trajectory statistics and
// carries the averaged success as a fraction in [0,1].
double attacked_sample_whitebox(const PolicyParams& params, const SampleRecord& sample,
                                const AttackConfig& cfg, int round, std::size_t index,
                                AttackOutcome& representative) {
    const int runs = cfg.defense == DefenseMode::kStochastic ? cfg.defense_runs : 1;
    double successes = 0.0;
    for (int r = 0; r < runs; ++r) {
        std::uint64_t run_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(round) * 131071 + index,
                                          static_cast<std::uint64_t>(r));
        AttackOutcome o = white_box_attack(params, sample, cfg, run_seed);
        if (r == 0) representative = o;
        if (o.success) successes += 1.0;
    }
    return successes / static_cast<double>(runs);
}

double attacked_sample_blackbox(const PolicyParams& params, const SampleRecord& sample,
                                const AttackConfig& cfg, int round, std::size_t index,
                                AttackOutcome& representative) {
    Rng coin_rng(mix_seed(cfg.seed, 0xb1ac, static_cast<std::uint64_t>(round) * 131071 + index));
    SampleRecord perturbed = black_box_attack(sample, cfg.epsilon, coin_rng);

    const int runs = cfg.defense == DefenseMode::kStochastic ? cfg.defense_runs : 1;
    double successes = 0.0;
    for (int r = 0; r < runs; ++r) {
        std::uint64_t run_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(round) * 262147 + index,
                                          static_cast<std::uint64_t>(r));
        RolloutResult clean = plain_rollout(params, sample, cfg.defense, run_seed);
        RolloutResult att = plain_rollout(params, perturbed, cfg.defense, run_seed);
        bool success = clean.predicted == kPhishing && att.predicted == kBenign;
        if (r == 0) {
            AttackOutcome o;
            o.sample_id = sample.sample_id;
            o.success = success;
            o.original_predicted = clean.predicted;
            o.perturbed_predicted = att.predicted;
            o.original_cost = clean.cost;
            o.perturbed_cost = att.cost;
            o.original_invoked = clean.invoked;
            o.perturbed_invoked = att.invoked;
            int changed = 0;
            double mag = 0.0;
            for (std::size_t i = 0; i < sample.scores.size(); ++i) {
                double d = std::abs(perturbed.scores[i] - sample.scores[i]);
                if (d > 0.0) {
                    ++changed;
                    mag = std::max(mag, d);
                }
            }
            o.detectors_changed = changed;
            o.mean_perturbation = mag;
            o.budget_spent = mag;
            representative = o;
        }
        if (success) successes += 1.0;
    }
    return successes / static_cast<double>(runs);
}

CampaignReport campaign_impl(const PolicyParams* params, const StaticEnsemble* ensemble,
                             bool blackbox, const ScoreTable& table, const AttackConfig& cfg,
                             int n_samples, bool parallel) {
    cfg.validate(static_cast<int>(table.n_detectors()));
    CampaignReport report;
    report.rounds = 3;
    report.samples_per_round = n_samples;
    if (n_samples < 0 || static_cast<std::size_t>(n_samples) > table.samples.size())
        throw std::invalid_argument("campaign: n_samples out of range");
    if (n_samples == 0) {
        report.success_rate_defined = false;
        return report;
    }

    double rate_sum = 0.0;
    for (int round = 0; round < report.rounds; ++round) {
        auto picks = pick_round_samples(table, cfg, n_samples, round);
        std::vector<double> success(picks.size(), 0.0);
        std::vector<AttackOutcome> outcomes(picks.size());

        auto run_one = [&](std::size_t p) {
            const SampleRecord& sample = table.samples[picks[p]];
            if (ensemble != nullptr) {
                Rng coin_rng(mix_seed(cfg.seed, 0xb1ac,
                                      static_cast<std::uint64_t>(round) * 131071 + picks[p]));
                SampleRecord perturbed = black_box_attack(sample, cfg.epsilon, coin_rng);
                auto [clean_conf, clean_cost] = aggregate(*ensemble, sample);
                auto [att_conf, att_cost] = aggregate(*ensemble, perturbed);
                AttackOutcome o;
                o.sample_id = sample.sample_id;
                o.original_predicted = classify_confidence(clean_conf);
                o.perturbed_predicted = classify_confidence(att_conf);
                o.original_cost = clean_cost;
                o.perturbed_cost = att_cost;
                o.success = o.original_predicted == kPhishing && o.perturbed_predicted == kBenign;
                int changed = 0;
                double mag = 0.0;
                for (std::size_t i = 0; i < sample.scores.size(); ++i) {
                    double d = std::abs(perturbed.scores[i] - sample.scores[i]);
                    if (d > 0.0) {
                        ++changed;
                        mag = std::max(mag, d);
                    }
                }
                o.detectors_changed = changed;
                o.mean_perturbation = mag;
                o.budget_spent = mag;
                outcomes[p] = o;
                success[p] = o.success ? 1.0 : 0.0;
            } else if (blackbox) {
                success[p] = attacked_sample_blackbox(*params, sample, cfg, round, picks[p],
                                                      outcomes[p]);
            } else {
                success[p] = attacked_sample_whitebox(*params, sample, cfg, round, picks[p],
                                                      outcomes[p]);
            }
        };

        if (parallel) {
            const std::int64_t m = static_cast<std::int64_t>(picks.size());
#pragma omp parallel for schedule(dynamic, 16)
            for (std::int64_t p = 0; p < m; ++p) run_one(static_cast<std::size_t>(p));
        } else {
            for (std::size_t p = 0; p < picks.size(); ++p) run_one(p);
        }

        double round_rate = 0.0;
        for (double s : success) round_rate += s;
        round_rate /= static_cast<double>(picks.size());
        report.round_rates.push_back(round_rate);
        rate_sum += round_rate;
        for (auto& o : outcomes) report.outcomes.push_back(std::move(o));
    }

    report.success_rate_defined = true;
    report.success_rate = rate_sum / static_cast<double>(report.rounds);

    long successful = 0;
    double changed_sum = 0.0, mag_sum = 0.0, orig_cost = 0.0, pert_cost = 0.0;
    for (const auto& o : report.outcomes) {
        orig_cost += o.original_cost;
        pert_cost += o.perturbed_cost;
        report.max_budget_spent = std::max(report.max_budget_spent, o.budget_spent);
        if (o.success) {
            ++successful;
            changed_sum += o.detectors_changed;
            mag_sum += o.mean_perturbation;
        }
    }
    const double total = static_cast<double>(report.outcomes.size());
    report.mean_original_cost = orig_cost / total;
    report.mean_perturbed_cost = pert_cost / total;
    if (successful > 0) {
        report.mean_detectors_changed = changed_sum / static_cast<double>(successful);
        report.mean_perturbation = mag_sum / static_cast<double>(successful);
    }
    return report;
}

} // namespace

CampaignReport run_campaign_serial(const PolicyParams& params, const ScoreTable& table,
                                   const AttackConfig& config, int n_samples) {
    return campaign_impl(&params, nullptr, false, table, config, n_samples, false);
}

CampaignReport run_campaign(const PolicyParams& params, const ScoreTable& table,
                            const AttackConfig& config, int n_samples) {
    return campaign_impl(&params, nullptr, false, table, config, n_samples, true);
}

CampaignReport run_blackbox_campaign_serial(const PolicyParams& params, const ScoreTable& table,
                                            const AttackConfig& config, int n_samples) {
    return campaign_impl(&params, nullptr, true, table, config, n_samples, false);
}

CampaignReport run_blackbox_campaign(const PolicyParams& params, const ScoreTable& table,
                                     const AttackConfig& config, int n_samples) {
    return campaign_impl(&params, nullptr, true, table, config, n_samples, true);
}

CampaignReport run_campaign_ensemble(const StaticEnsemble& ensemble, const ScoreTable& table,
                                     const AttackConfig& config, int n_samples) {
    return campaign_impl(nullptr, &ensemble, true, table, config, n_samples, true);
}

} // namespace cascadeforge
