#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cascadeforge/baselines.hpp"
#include "cascadeforge/policy_net.hpp"
#include "cascadeforge/score_table.hpp"

namespace cascadeforge {

enum class ScheduleKind { kAllAtOnce, kUniform, kGeometric };
enum class AttackMethod { kFgsm, kPgd };
enum class AttackGoal { kEvade, kResource };
enum class DefenseMode { kDeterministic, kStochastic };

// L-infinity attack configuration. The per-step budgets always sum to at
// most epsilon.
struct AttackConfig {
    double epsilon = 0.5;
    ScheduleKind schedule = ScheduleKind::kUniform;
    int all_at_once_step = 1;  // k in 1..n
    double geometric_q = 0.5;  // q in (0, 1/2]
    AttackMethod method = AttackMethod::kPgd;
    int pgd_steps = 10;
    double pgd_step_frac = 0.25; // step size as a fraction of the step budget
    AttackGoal goal = AttackGoal::kEvade;
    DefenseMode defense = DefenseMode::kDeterministic;
    int defense_runs = 10;
    std::uint64_t seed = 0;

    void validate(int n_detectors) const;
};

// Budget sequence over the n perturbation slots.
std::vector<double> schedule_budgets(ScheduleKind schedule, double epsilon, int n, int k = 1,
                                     double q = 0.5);

struct AttackOutcome {
    std::string sample_id;
    bool success = false;
    bool attackable = true;
    std::string failure_reason;
    int detectors_changed = 0;
    double mean_perturbation = 0.0; // mean L-inf of the per-step perturbations
    double budget_spent = 0.0;      // sum of per-step L-inf perturbations
    double original_cost = 0.0;
    double perturbed_cost = 0.0;
    int original_invoked = 0;
    int perturbed_invoked = 0;
    int original_predicted = 0;
    int perturbed_predicted = 0;
};

// One attacked rollout against the agent. Stochastic defense draws actions
// from the policy with an rng derived from run_seed; the clean reference
// rollout uses the same draw stream.
AttackOutcome white_box_attack(const PolicyParams& params, const SampleRecord& sample,
                               const AttackConfig& config, std::uint64_t run_seed = 0);

// Each score entry independently gets +eps or -eps (fair coin), clamped to
// [0,1]; costs untouched.
SampleRecord black_box_attack(const SampleRecord& sample, double epsilon, Rng& rng);

struct CampaignReport {
    int rounds = 0;
    int samples_per_round = 0;
    bool success_rate_defined = false;
    double success_rate = 0.0;
    std::vector<double> round_rates;
    double mean_detectors_changed = 0.0; // over successful attacks
    double mean_perturbation = 0.0;      // over successful attacks
    double mean_original_cost = 0.0;
    double mean_perturbed_cost = 0.0;
    double max_budget_spent = 0.0;
    std::vector<AttackOutcome> outcomes; // all rounds concatenated
};

// White-box campaign against the agent: three seeded rounds of uniformly
// chosen phishing samples, averaged; stochastic defense averages
// config.defense_runs rollouts per sample.
CampaignReport run_campaign_serial(const PolicyParams& params, const ScoreTable& table,
                                   const AttackConfig& config, int n_samples);
CampaignReport run_campaign(const PolicyParams& params, const ScoreTable& table,
                            const AttackConfig& config, int n_samples);

// Black-box campaign against the agent.
CampaignReport run_blackbox_campaign_serial(const PolicyParams& params, const ScoreTable& table,
                                            const AttackConfig& config, int n_samples);
CampaignReport run_blackbox_campaign(const PolicyParams& params, const ScoreTable& table,
                                     const AttackConfig& config, int n_samples);

// Black-box campaign against a static ensemble (gradient attacks do not
// apply to them).
CampaignReport run_campaign_ensemble(const StaticEnsemble& ensemble, const ScoreTable& table,
                                     const AttackConfig& config, int n_samples);

} // namespace cascadeforge
