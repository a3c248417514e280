#include "cascadeforge/transfer.hpp"

#include <cmath>
#include <stdexcept>

#include "cascadeforge/rng.hpp"

namespace cascadeforge {

namespace {
constexpr double kLn10 = 2.3025850929940456840179914546844;

std::vector<double> normalize(std::span<const double> beta) {
    double total = 0.0;
    for (double b : beta) {
        if (!(b > 0.0)) throw std::invalid_argument("ratio vector entries must be positive");
        total += b;
    }
    std::vector<double> p(beta.size());
    for (std::size_t i = 0; i < beta.size(); ++i) p[i] = beta[i] / total;
    return p;
}
} // namespace

DensityModel likelihood_ratios(const CostCurve& curve) {
    curve.validate();
    DensityModel model;
    model.curve = curve;
    const int k = curve.regions();
    std::vector<double> area(static_cast<std::size_t>(k));
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        area[static_cast<std::size_t>(i)] =
            curve.integrate(curve.boundaries[static_cast<std::size_t>(i)],
                            curve.boundaries[static_cast<std::size_t>(i) + 1]);
        total += area[static_cast<std::size_t>(i)];
    }
    if (!(area[0] > 0.0))
        throw std::runtime_error("first-region integral must be positive");
    model.normalizer = total;
    model.prob_mass.resize(static_cast<std::size_t>(k));
    model.beta.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        model.prob_mass[static_cast<std::size_t>(i)] = area[static_cast<std::size_t>(i)] / total;
        model.beta[static_cast<std::size_t>(i)] = area[static_cast<std::size_t>(i)] / area[0];
    }
    return model;
}

double sym_kl(std::span<const double> beta_a, std::span<const double> beta_b) {
    if (beta_a.size() != beta_b.size() || beta_a.empty())
        throw std::invalid_argument("sym_kl: ratio vectors must be non-empty and equal length");
    auto pa = normalize(beta_a);
    auto pb = normalize(beta_b);
    // KL(a||b) + KL(b||a) = sum (a_i - b_i) ln(a_i/b_i); halve and convert
    // to base 10.
    double acc = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i)
        acc += (pa[i] - pb[i]) * std::log(pa[i] / pb[i]);
    return 0.5 * acc / kLn10;
}

double sym_kl(double beta_a, double beta_b) {
    const double a[2] = {1.0, beta_a};
    const double b[2] = {1.0, beta_b};
    return sym_kl(std::span<const double>(a, 2), std::span<const double>(b, 2));
}

std::vector<double> sym_kl_gradient(std::span<const double> theta,
                                    std::span<const double> beta_ref) {
    if (theta.size() + 1 != beta_ref.size())
        throw std::invalid_argument("sym_kl_gradient: theta must have K-1 entries");
    std::vector<double> psi(beta_ref.size());
    psi[0] = 1.0;
    for (std::size_t j = 0; j < theta.size(); ++j) psi[j + 1] = theta[j];
    auto pd = normalize(psi);
    auto ps = normalize(beta_ref);
    double s = 0.0;
    for (double v : psi) s += v;
    // dh/dpsi_j = -(1/(2 ln10 S)) (G_j - sum_i pd_i G_i),
    // G_i = ln(ps_i/pd_i) + ps_i/pd_i - 1
    std::vector<double> g(psi.size());
    double mean_g = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        g[i] = std::log(ps[i] / pd[i]) + ps[i] / pd[i] - 1.0;
        mean_g += pd[i] * g[i];
    }
    std::vector<double> grad(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j)
        grad[j] = -(g[j + 1] - mean_g) / (2.0 * kLn10 * s);
    return grad;
}

SolveBetaResult solve_beta(std::span<const double> source_beta, double epsilon, double alpha,
                           std::uint64_t seed, std::uint64_t max_iterations) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("solve_beta: epsilon must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("solve_beta: alpha must be positive");
    if (source_beta.size() < 2)
        throw std::invalid_argument("solve_beta: need at least two regions");

    const std::size_t km1 = source_beta.size() - 1;
    double scale = 0.0;
    for (double b : source_beta) scale += b;
    scale /= static_cast<double>(source_beta.size());

    Rng rng(mix_seed(seed, 0xbe7a));
    std::vector<double> theta(km1);
    for (auto& t : theta) t = std::max(1e-12, rng.uniform01() * 2.0 * scale);

    auto eval = [&](std::span<const double> th) {
        std::vector<double> psi(th.size() + 1);
        psi[0] = 1.0;
        for (std::size_t j = 0; j < th.size(); ++j) psi[j + 1] = th[j];
        return sym_kl(psi, source_beta);
    };

    double h = eval(theta);
    double step = alpha;
    std::uint64_t it = 0;
    while (h >= epsilon) {
        if (++it > max_iterations)
            throw std::runtime_error("solve_beta did not converge; last divergence " +
                                     std::to_string(h));
        auto grad = sym_kl_gradient(theta, source_beta);
        // plain descent step, with multiplicative step adaptation so a single
        // alpha works across ratio scales
        std::vector<double> cand(km1);
        double cand_h;
        for (;;) {
            for (std::size_t j = 0; j < km1; ++j)
                cand[j] = std::max(1e-12, theta[j] - step * grad[j]);
            cand_h = eval(cand);
            if (cand_h < h || step < 1e-300) break;
            step *= 0.5;
        }
        theta = cand;
        h = cand_h;
        step *= 2.0;
    }

    // the acceptance region is strict: 0 < h < epsilon
    if (h <= 0.0) {
        for (auto& t : theta) t *= 1.0 + 1e-10;
        h = eval(theta);
    }

    SolveBetaResult res;
    res.psi.resize(source_beta.size());
    res.psi[0] = 1.0;
    for (std::size_t j = 0; j < km1; ++j) res.psi[j + 1] = theta[j];
    res.achieved = h;
    res.iterations = it;
    return res;
}

CostCurve compose_target_curve(const CostCurve& source,
                               std::span<const double> target_boundaries) {
    if (target_boundaries.size() != source.boundaries.size())
        throw std::invalid_argument("compose_target_curve: boundary count mismatch");
    CostCurve target;
    target.boundaries.assign(target_boundaries.begin(), target_boundaries.end());
    for (std::size_t i = 0; i < source.segments.size(); ++i) {
        const double s_lo = source.boundaries[i], s_hi = source.boundaries[i + 1];
        const double t_lo = target_boundaries[i], t_hi = target_boundaries[i + 1];
        if (!(t_lo < t_hi))
            throw std::invalid_argument("compose_target_curve: boundaries must increase");
        // g(t) = s_lo + c*(t - t_lo) maps [t_lo, t_hi] onto [s_lo, s_hi];
        // re-anchoring at t_lo keeps the composition stable even when the
        // map is steep.
        const double c = (s_hi - s_lo) / (t_hi - t_lo);
        const Segment& src = source.segments[i];
        if (src.kind == Segment::Kind::kLinear)
            target.segments.push_back(Segment::linear(t_lo, src.value(s_lo), src.slope * c));
        else
            target.segments.push_back(
                Segment::log2_of(t_lo, src.inner_arg(s_lo), src.slope * c, src.denom));
    }
    target.validate();
    return target;
}

namespace {

// Right-tail mass ratio used by the boundary equations: with candidate
// boundary vector b, sum_{i>m} beta_i == integral from b[m] to b[K] of the
// composed curve divided by the first-region integral.
double tail_ratio(const CostCurve& source, std::vector<double> boundaries, std::size_t m,
                  double candidate) {
    boundaries[m] = candidate;
    CostCurve target = compose_target_curve(source, boundaries);
    double head = target.integrate(target.boundaries[0], target.boundaries[1]);
    if (!(head > 0.0)) throw std::runtime_error("first-region integral must be positive");
    double tail = target.integrate(boundaries[m], boundaries.back());
    return tail / head;
}

} // namespace

TransferSolution solve_boundaries(const TransferProblem& problem,
                                  std::span<const double> beta_target) {
    const CostCurve& source = problem.source;
    source.validate();
    const std::size_t k = source.segments.size();
    if (beta_target.size() != k)
        throw std::invalid_argument("solve_boundaries: beta size must match region count");
    if (!(problem.target_start < problem.target_end))
        throw std::invalid_argument("solve_boundaries: target endpoints must increase");
    if (!(problem.boundary_tol > 0.0))
        throw std::invalid_argument("solve_boundaries: boundary tolerance must be positive");

    // start from proportionally scaled source boundaries
    std::vector<double> bounds(k + 1);
    const double span_src = source.domain_end() - source.domain_start();
    const double span_dst = problem.target_end - problem.target_start;
    for (std::size_t i = 0; i <= k; ++i)
        bounds[i] = problem.target_start +
                    (source.boundaries[i] - source.domain_start()) / span_src * span_dst;
    bounds[0] = problem.target_start;
    bounds[k] = problem.target_end;

    std::vector<double> tail_targets(k + 1, 0.0);
    for (std::size_t m = 1; m < k; ++m) {
        double t = 0.0;
        for (std::size_t i = m; i < k; ++i) t += beta_target[i];
        tail_targets[m] = t; // sum over regions m+1..K in 1-based terms
    }

    auto bisect_boundary = [&](std::size_t m) {
        const double target = tail_targets[m];
        double lo = bounds[m - 1] + problem.boundary_tol;
        double hi = bounds[m + 1] - problem.boundary_tol;
        if (!(lo < hi))
            throw std::runtime_error("no root in interval: boundary " + std::to_string(m) +
                                     " has no room between neighbors");
        double f_lo = tail_ratio(source, bounds, m, lo) - target;
        double f_hi = tail_ratio(source, bounds, m, hi) - target;
        // tail ratio decreases in the boundary, so f_lo >= f_hi
        if (f_lo < 0.0 || f_hi > 0.0)
            throw std::runtime_error("no root in interval: required ratio " +
                                     std::to_string(target) + " unattainable for boundary " +
                                     std::to_string(m));
        // closed-form evaluations are cheap, so run the bisection to machine
        // precision; this lands well inside both the boundary tolerance and
        // the ratio-residual requirement
        double mid = 0.5 * (lo + hi);
        for (int iter = 0; iter < 200; ++iter) {
            mid = 0.5 * (lo + hi);
            double f_mid = tail_ratio(source, bounds, m, mid) - target;
            if (f_mid >= 0.0) lo = mid;
            else hi = mid;
            if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
        }
        return mid;
    };

    TransferSolution sol;
    int sweeps = 0;
    const int max_sweeps = 200;
    for (;;) {
        ++sweeps;
        double max_move = 0.0;
        for (std::size_t m = k - 1; m >= 1; --m) {
            double updated = bisect_boundary(m);
            max_move = std::max(max_move, std::abs(updated - bounds[m]));
            bounds[m] = updated;
            if (m == 1) break;
        }
        if (max_move < problem.boundary_tol || k == 2) break;
        if (sweeps >= max_sweeps)
            throw std::runtime_error("solve_boundaries: coordinate sweep did not converge");
    }

    sol.beta_target.assign(beta_target.begin(), beta_target.end());
    sol.boundaries = bounds;
    sol.curve = compose_target_curve(source, bounds);
    sol.sweeps = sweeps;
    return sol;
}

TransferSolution transfer(const TransferProblem& problem) {
    DensityModel source_model = likelihood_ratios(problem.source);
    SolveBetaResult beta = solve_beta(source_model.beta, problem.epsilon, problem.alpha,
                                      problem.seed);
    for (auto& v : beta.psi) v = std::max(v, problem.beta_min);
    TransferSolution sol = solve_boundaries(problem, beta.psi);
    sol.achieved_sym_kl = beta.achieved;
    sol.iterations = beta.iterations;
    return sol;
}

} // namespace cascadeforge
