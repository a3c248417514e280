// Benchmark comparing the serial reference kernels against their
// OpenMP-parallel counterparts on a synthetic workload.

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cascadeforge/attack.hpp"
#include "cascadeforge/eval_runner.hpp"
#include "cascadeforge/trainer.hpp"

using namespace cascadeforge;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
    fn(); // warm-up
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel kernels run serially\n");
#endif

    SynthSpec spec;
    spec.n_samples = 20000;
    spec.class_balance = 0.5;
    spec.seed = 99;
    spec.detectors = {
        {0.92, CostLaw::kConstant, 0.02, 0, 0, 0.0},
        {0.90, CostLaw::kConstant, 0.05, 0, 0, 0.0},
        {0.95, CostLaw::kLognormal, 0, -1.0, 0.5, 0.0},
        {0.97, CostLaw::kConstant, 1.5, 0, 0, 0.0},
        {0.99, CostLaw::kConstant, 6.0, 0, 0, 0.0},
    };
    ScoreTable table = synthesize(spec);

    Rng rng(7);
    PolicyParams params = PolicyParams::init(5, 32, rng);
    RewardScheme scheme = RewardScheme::preset(3, CostCurve::two_region(1.0, 34.0));

    report("policy evaluation",
           time_ms([&] { evaluate_policy_serial(params, table, scheme, ActMode::kDeterministic, 1); }, 3),
           time_ms([&] { evaluate_policy(params, table, scheme, ActMode::kDeterministic, 1); }, 3));

    auto ensembles = enumerate_baselines(5);
    report("baseline evaluation",
           time_ms([&] {
               for (const auto& e : ensembles) evaluate_ensemble_serial(e, table);
           }, 3),
           time_ms([&] {
               for (const auto& e : ensembles) evaluate_ensemble(e, table);
           }, 3));

    AttackConfig ac;
    ac.epsilon = 0.5;
    ac.method = AttackMethod::kPgd;
    ac.goal = AttackGoal::kEvade;
    ac.seed = 11;
    report("white-box campaign (1k)",
           time_ms([&] { run_campaign_serial(params, table, ac, 1000); }, 1),
           time_ms([&] { run_campaign(params, table, ac, 1000); }, 1));
    return 0;
}
