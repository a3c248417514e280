#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cascadeforge/cost_curve.hpp"

namespace cascadeforge {

// Normalized density induced by a cost curve, with the per-region mass
// vector and the likelihood ratios relative to the first region.
struct DensityModel {
    CostCurve curve;
    double normalizer = 0.0;          // integral of the curve over its domain
    std::vector<double> prob_mass;    // K entries, sums to 1
    std::vector<double> beta;         // K entries, beta[0] == 1
};

DensityModel likelihood_ratios(const CostCurve& curve);

// Symmetrized KL divergence (log base 10) between the categorical
// distributions induced by two positive ratio vectors.
double sym_kl(std::span<const double> beta_a, std::span<const double> beta_b);
double sym_kl(double beta_a, double beta_b); // two-region convenience form

// d sym_kl((1,theta), beta_ref) / d theta, analytic.
std::vector<double> sym_kl_gradient(std::span<const double> theta,
                                    std::span<const double> beta_ref);

struct SolveBetaResult {
    std::vector<double> psi; // (1, theta...)
    double achieved = 0.0;   // sym KL at acceptance, in (0, epsilon)
    std::uint64_t iterations = 0;
};

// Gradient descent on the symmetrized KL until it first enters (0, epsilon).
SolveBetaResult solve_beta(std::span<const double> source_beta, double epsilon, double alpha,
                           std::uint64_t seed, std::uint64_t max_iterations = 1000000);

struct TransferProblem {
    CostCurve source;
    double target_start = 0.0; // d_D^0
    double target_end = 0.0;   // d_D^K
    double epsilon = 1e-8;     // distribution tolerance
    double alpha = 1.0;        // descent learning rate
    double boundary_tol = 1e-4;
    double beta_min = 1e-12;
    std::uint64_t seed = 0;
};

struct TransferSolution {
    std::vector<double> beta_target;
    std::vector<double> boundaries; // full K+1 target boundaries
    CostCurve curve;
    double achieved_sym_kl = 0.0;
    std::uint64_t iterations = 0;
    int sweeps = 0; // boundary sweeps used (1 for two-region curves)
};

// Rebuilds the source curve on new boundaries by composing each segment
// with the linear map between the old and new intervals.
CostCurve compose_target_curve(const CostCurve& source,
                               std::span<const double> target_boundaries);

// Root-finds the internal target boundaries that realize beta_target.
TransferSolution solve_boundaries(const TransferProblem& problem,
                                  std::span<const double> beta_target);

// likelihood_ratios -> solve_beta -> solve_boundaries.
TransferSolution transfer(const TransferProblem& problem);

} // namespace cascadeforge
