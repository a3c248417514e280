#include "cascadeforge/policy_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cascadeforge {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw std::runtime_error(std::string("non-finite ") + what + " encountered");
}

} // namespace

std::size_t PolicyParams::count() const {
    return w1.size() + b1.size() + wp.size() + bp.size() + w1v.size() + b1v.size() +
           wv.size() + 1;
}

void PolicyParams::to_flat(std::vector<double>& out) const {
    out.clear();
    out.reserve(count());
    out.insert(out.end(), w1.begin(), w1.end());
    out.insert(out.end(), b1.begin(), b1.end());
    out.insert(out.end(), wp.begin(), wp.end());
    out.insert(out.end(), bp.begin(), bp.end());
    out.insert(out.end(), w1v.begin(), w1v.end());
    out.insert(out.end(), b1v.begin(), b1v.end());
    out.insert(out.end(), wv.begin(), wv.end());
    out.push_back(bv);
}

void PolicyParams::from_flat(std::span<const double> in) {
    if (in.size() != count())
        throw std::invalid_argument("from_flat: length mismatch");
    std::size_t o = 0;
    auto take = [&](std::vector<double>& dst) {
        std::copy(in.begin() + static_cast<std::ptrdiff_t>(o),
                  in.begin() + static_cast<std::ptrdiff_t>(o + dst.size()), dst.begin());
        o += dst.size();
    };
    take(w1);
    take(b1);
    take(wp);
    take(bp);
    take(w1v);
    take(b1v);
    take(wv);
    bv = in[o];
}

PolicyParams PolicyParams::zeros(int n_inputs, int n_hidden) {
    if (n_inputs < 1 || n_hidden < 1)
        throw std::invalid_argument("PolicyParams: sizes must be positive");
    PolicyParams p;
    p.n_inputs = n_inputs;
    p.n_hidden = n_hidden;
    p.w1.assign(static_cast<std::size_t>(n_hidden) * n_inputs, 0.0);
    p.b1.assign(static_cast<std::size_t>(n_hidden), 0.0);
    p.wp.assign(static_cast<std::size_t>(p.n_actions()) * n_hidden, 0.0);
    p.bp.assign(static_cast<std::size_t>(p.n_actions()), 0.0);
    p.w1v.assign(static_cast<std::size_t>(n_hidden) * n_inputs, 0.0);
    p.b1v.assign(static_cast<std::size_t>(n_hidden), 0.0);
    p.wv.assign(static_cast<std::size_t>(n_hidden), 0.0);
    p.bv = 0.0;
    return p;
}

PolicyParams PolicyParams::init(int n_inputs, int n_hidden, Rng& rng) {
    PolicyParams p = zeros(n_inputs, n_hidden);
    const double s1 = std::sqrt(2.0 / n_inputs);
    const double s2 = std::sqrt(2.0 / n_hidden);
    for (auto& w : p.w1) w = s1 * 0.5 * rng.normal();
    for (auto& w : p.wp) w = s2 * 0.5 * rng.normal();
    for (auto& w : p.w1v) w = s1 * 0.5 * rng.normal();
    for (auto& w : p.wv) w = s2 * 0.5 * rng.normal();
    return p;
}

ForwardResult forward(const PolicyParams& params, const State& state) {
    if (static_cast<int>(state.size()) != params.n_inputs)
        throw std::invalid_argument("forward: state size mismatch");
    const int nh = params.n_hidden;
    const int ni = params.n_inputs;
    const int na = params.n_actions();

    ForwardResult r;
    r.hidden.assign(static_cast<std::size_t>(nh), 0.0);
    for (int h = 0; h < nh; ++h) {
        double acc = params.b1[static_cast<std::size_t>(h)];
        const double* row = &params.w1[static_cast<std::size_t>(h) * ni];
        for (int i = 0; i < ni; ++i) acc += row[i] * state.entries[static_cast<std::size_t>(i)];
        r.hidden[static_cast<std::size_t>(h)] = acc > 0.0 ? acc : 0.0;
        require_finite(acc, "activation");
    }

    r.legal.assign(static_cast<std::size_t>(na), true);
    for (int i = 0; i < ni; ++i)
        r.legal[static_cast<std::size_t>(i)] = !state.invoked(static_cast<std::size_t>(i));

    std::vector<double> logits(static_cast<std::size_t>(na));
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < na; ++a) {
        double acc = params.bp[static_cast<std::size_t>(a)];
        const double* row = &params.wp[static_cast<std::size_t>(a) * nh];
        for (int h = 0; h < nh; ++h) acc += row[h] * r.hidden[static_cast<std::size_t>(h)];
        require_finite(acc, "logit");
        logits[static_cast<std::size_t>(a)] = acc;
        if (r.legal[static_cast<std::size_t>(a)] && acc > max_logit) max_logit = acc;
    }

    r.probs.assign(static_cast<std::size_t>(na), 0.0);
    r.log_probs.assign(static_cast<std::size_t>(na),
                       -std::numeric_limits<double>::infinity());
    double z = 0.0;
    for (int a = 0; a < na; ++a) {
        if (!r.legal[static_cast<std::size_t>(a)]) continue;
        double e = std::exp(logits[static_cast<std::size_t>(a)] - max_logit);
        r.probs[static_cast<std::size_t>(a)] = e;
        z += e;
    }
    const double log_z = std::log(z);
    for (int a = 0; a < na; ++a) {
        if (!r.legal[static_cast<std::size_t>(a)]) continue;
        r.probs[static_cast<std::size_t>(a)] /= z;
        // saturated legal actions underflow in probability space but keep a
        // finite log probability
        r.log_probs[static_cast<std::size_t>(a)] =
            logits[static_cast<std::size_t>(a)] - max_logit - log_z;
    }

    r.hidden_v.assign(static_cast<std::size_t>(nh), 0.0);
    double v = params.bv;
    for (int h = 0; h < nh; ++h) {
        double acc = params.b1v[static_cast<std::size_t>(h)];
        const double* row = &params.w1v[static_cast<std::size_t>(h) * ni];
        for (int i = 0; i < ni; ++i) acc += row[i] * state.entries[static_cast<std::size_t>(i)];
        require_finite(acc, "activation");
        double hv = acc > 0.0 ? acc : 0.0;
        r.hidden_v[static_cast<std::size_t>(h)] = hv;
        v += params.wv[static_cast<std::size_t>(h)] * hv;
    }
    require_finite(v, "value");
    r.value = v;
    return r;
}

Action act(const PolicyParams& params, const State& state, ActMode mode, Rng* rng) {
    ForwardResult r = forward(params, state);
    const int n = params.n_inputs;
    if (mode == ActMode::kDeterministic) {
        int best = -1;
        double best_p = -1.0;
        for (int a = 0; a < params.n_actions(); ++a) {
            if (!r.legal[static_cast<std::size_t>(a)]) continue;
            if (r.probs[static_cast<std::size_t>(a)] > best_p) {
                best_p = r.probs[static_cast<std::size_t>(a)];
                best = a;
            }
        }
        return Action::from_index(best, n);
    }
    if (rng == nullptr) throw std::invalid_argument("act: stochastic mode needs an rng");
    std::size_t idx = rng->categorical(r.probs);
    return Action::from_index(static_cast<int>(idx), n);
}

std::vector<double> compute_targets(const PolicyParams& params,
                                    std::span<const ReplayEntry> batch, double gamma) {
    std::vector<double> targets(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const ReplayEntry& e = batch[i];
        double t = e.reward;
        if (!e.terminal) t += gamma * forward(params, e.next_state).value;
        targets[i] = t;
    }
    return targets;
}

std::vector<double> compute_advantages(const PolicyParams& params,
                                       std::span<const ReplayEntry> batch,
                                       std::span<const double> targets) {
    if (batch.size() != targets.size())
        throw std::invalid_argument("compute_advantages: targets length mismatch");
    std::vector<double> adv(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i)
        adv[i] = targets[i] - forward(params, batch[i].state).value;
    return adv;
}

double loss_with_targets(const PolicyParams& params, std::span<const ReplayEntry> batch,
                         std::span<const double> targets, std::span<const double> advantages,
                         const LossConfig& cfg, std::vector<double>* grad) {
    if (batch.empty()) throw std::invalid_argument("loss_with_targets: empty minibatch");
    if (batch.size() != targets.size() || batch.size() != advantages.size())
        throw std::invalid_argument("loss_with_targets: targets length mismatch");

    const int nh = params.n_hidden;
    const int ni = params.n_inputs;
    const int na = params.n_actions();
    const std::size_t ow1 = 0;
    const std::size_t ob1 = ow1 + static_cast<std::size_t>(nh) * ni;
    const std::size_t owp = ob1 + static_cast<std::size_t>(nh);
    const std::size_t obp = owp + static_cast<std::size_t>(na) * nh;
    const std::size_t ow1v = obp + static_cast<std::size_t>(na);
    const std::size_t ob1v = ow1v + static_cast<std::size_t>(nh) * ni;
    const std::size_t owv = ob1v + static_cast<std::size_t>(nh);
    const std::size_t obv = owv + static_cast<std::size_t>(nh);

    if (grad) grad->assign(params.count(), 0.0);

    const double inv_m = 1.0 / static_cast<double>(batch.size());
    double total_loss = 0.0;

    std::vector<double> dz(static_cast<std::size_t>(na));
    std::vector<double> dh(static_cast<std::size_t>(nh));
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const ReplayEntry& e = batch[s];
        ForwardResult f = forward(params, e.state);
        if (!f.legal[static_cast<std::size_t>(e.action_index)])
            throw std::logic_error("loss: stored action is illegal in its state");
        const double log_pa = f.log_probs[static_cast<std::size_t>(e.action_index)];
        const double adv = advantages[s];          // frozen in the policy term
        const double value_err = targets[s] - f.value;

        double entropy = 0.0;
        for (int a = 0; a < na; ++a) {
            double p = f.probs[static_cast<std::size_t>(a)];
            if (p > 0.0) entropy -= p * f.log_probs[static_cast<std::size_t>(a)];
        }
        const double sample_loss = -log_pa * adv + cfg.value_coef * value_err * value_err -
                                   cfg.entropy_coef * entropy;
        require_finite(sample_loss, "loss");
        total_loss += sample_loss * inv_m;
        if (!grad) continue;

        // d/dlogit of -log p[a] is (p - onehot); of -entropy it is
        // p*(log p + H); illegal logits receive nothing.
        for (int a = 0; a < na; ++a) {
            double p = f.probs[static_cast<std::size_t>(a)];
            if (!f.legal[static_cast<std::size_t>(a)]) {
                dz[static_cast<std::size_t>(a)] = 0.0;
                continue;
            }
            double g = adv * (p - (a == e.action_index ? 1.0 : 0.0));
            if (p > 0.0)
                g += cfg.entropy_coef * p * (f.log_probs[static_cast<std::size_t>(a)] + entropy);
            dz[static_cast<std::size_t>(a)] = g * inv_m;
        }
        const double dv = cfg.value_coef * (-2.0 * value_err) * inv_m;

        std::fill(dh.begin(), dh.end(), 0.0);
        for (int a = 0; a < na; ++a) {
            const double g = dz[static_cast<std::size_t>(a)];
            if (g == 0.0) continue;
            double* wrow = &(*grad)[owp + static_cast<std::size_t>(a) * nh];
            const double* prow = &params.wp[static_cast<std::size_t>(a) * nh];
            for (int h = 0; h < nh; ++h) {
                wrow[h] += g * f.hidden[static_cast<std::size_t>(h)];
                dh[static_cast<std::size_t>(h)] += g * prow[h];
            }
            (*grad)[obp + static_cast<std::size_t>(a)] += g;
        }
        for (int h = 0; h < nh; ++h) {
            if (f.hidden[static_cast<std::size_t>(h)] <= 0.0) continue; // ReLU gate
            const double g = dh[static_cast<std::size_t>(h)];
            double* wrow = &(*grad)[ow1 + static_cast<std::size_t>(h) * ni];
            for (int i = 0; i < ni; ++i)
                wrow[i] += g * e.state.entries[static_cast<std::size_t>(i)];
            (*grad)[ob1 + static_cast<std::size_t>(h)] += g;
        }

        (*grad)[obv] += dv;
        for (int h = 0; h < nh; ++h) {
            const double hv = f.hidden_v[static_cast<std::size_t>(h)];
            (*grad)[owv + static_cast<std::size_t>(h)] += dv * hv;
            if (hv <= 0.0) continue; // ReLU gate
            const double g = dv * params.wv[static_cast<std::size_t>(h)];
            double* wrow = &(*grad)[ow1v + static_cast<std::size_t>(h) * ni];
            for (int i = 0; i < ni; ++i)
                wrow[i] += g * e.state.entries[static_cast<std::size_t>(i)];
            (*grad)[ob1v + static_cast<std::size_t>(h)] += g;
        }
    }

    if (grad)
        for (double g : *grad) require_finite(g, "gradient");
    return total_loss;
}

std::vector<double> gradients(const PolicyParams& params, std::span<const ReplayEntry> batch,
                              const LossConfig& cfg) {
    auto targets = compute_targets(params, batch, cfg.gamma);
    auto advantages = compute_advantages(params, batch, targets);
    std::vector<double> grad;
    loss_with_targets(params, batch, targets, advantages, cfg, &grad);
    return grad;
}

std::vector<double> input_gradient(const PolicyParams& params, const State& state,
                                   std::span<const int> target_action_indices) {
    if (target_action_indices.empty())
        throw std::invalid_argument("input_gradient: no target actions");
    ForwardResult f = forward(params, state);
    const int nh = params.n_hidden;
    const int ni = params.n_inputs;
    const int na = params.n_actions();

    std::vector<bool> in_target(static_cast<std::size_t>(na), false);
    double max_target_log = -std::numeric_limits<double>::infinity();
    bool any_legal_target = false;
    for (int a : target_action_indices) {
        if (a < 0 || a >= na) throw std::invalid_argument("input_gradient: bad action index");
        in_target[static_cast<std::size_t>(a)] = true;
        if (f.legal[static_cast<std::size_t>(a)]) {
            any_legal_target = true;
            max_target_log = std::max(max_target_log, f.log_probs[static_cast<std::size_t>(a)]);
        }
    }
    if (!any_legal_target)
        throw std::runtime_error("input_gradient: no legal target action");

    // d(-log sum_T p)/dz_j = p_j - q_j with q the softmax restricted to T;
    // q comes from log probabilities so saturated policies keep a usable
    // direction.
    double target_z = 0.0;
    for (int a = 0; a < na; ++a)
        if (in_target[static_cast<std::size_t>(a)] && f.legal[static_cast<std::size_t>(a)])
            target_z += std::exp(f.log_probs[static_cast<std::size_t>(a)] - max_target_log);
    std::vector<double> dz(static_cast<std::size_t>(na), 0.0);
    for (int a = 0; a < na; ++a) {
        if (!f.legal[static_cast<std::size_t>(a)]) continue;
        double q = 0.0;
        if (in_target[static_cast<std::size_t>(a)])
            q = std::exp(f.log_probs[static_cast<std::size_t>(a)] - max_target_log) / target_z;
        dz[static_cast<std::size_t>(a)] = f.probs[static_cast<std::size_t>(a)] - q;
    }

    std::vector<double> dh(static_cast<std::size_t>(nh), 0.0);
    for (int a = 0; a < na; ++a) {
        const double g = dz[static_cast<std::size_t>(a)];
        if (g == 0.0) continue;
        const double* prow = &params.wp[static_cast<std::size_t>(a) * nh];
        for (int h = 0; h < nh; ++h) dh[static_cast<std::size_t>(h)] += g * prow[h];
    }
    std::vector<double> ds(static_cast<std::size_t>(ni), 0.0);
    for (int h = 0; h < nh; ++h) {
        if (f.hidden[static_cast<std::size_t>(h)] <= 0.0) continue;
        const double g = dh[static_cast<std::size_t>(h)];
        const double* wrow = &params.w1[static_cast<std::size_t>(h) * ni];
        for (int i = 0; i < ni; ++i) ds[static_cast<std::size_t>(i)] += g * wrow[i];
    }
    return ds;
}

void RmsProp::step(PolicyParams& params, std::span<const double> grad) {
    params.to_flat(scratch_);
    if (v_.empty()) v_.assign(scratch_.size(), 0.0);
    if (grad.size() != scratch_.size())
        throw std::invalid_argument("RmsProp::step: gradient length mismatch");
    for (std::size_t i = 0; i < scratch_.size(); ++i) {
        v_[i] = decay_ * v_[i] + (1.0 - decay_) * grad[i] * grad[i];
        scratch_[i] -= lr_ * grad[i] / (std::sqrt(v_[i]) + eps_);
    }
    params.from_flat(scratch_);
}

} // namespace cascadeforge
