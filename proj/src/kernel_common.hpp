#pragma once

// Weight evaluation and stream layout shared by the single and coupled kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "csmc/cxpf.hpp"
#include "csmc/model.hpp"
#include "csmc/sampling.hpp"

namespace csmc::detail {

// Stream purposes. Each sweep forks these from its stream; per-time and
// per-particle streams are forked below them.
enum StreamTag : std::uint64_t {
    kInitial = 1,
    kResample = 2,
    kPropose = 3,
    kReferenceAncestor = 4,
    kTerminal = 5,
    kBackward = 6,
};

inline void log_to_linear(std::span<double> w) noexcept
{
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : w) mx = std::max(mx, v);
    if (!(mx > -std::numeric_limits<double>::infinity()) || !std::isfinite(mx)) {
        std::fill(w.begin(), w.end(), 0.0);
        return;
    }
    for (double& v : w) v = std::exp(v - mx);
}

/// w_t^(i) = G_t(parent_i, X_t^(i)) for all slots.
inline void compute_weights(const Model& model, ParticleSystem& ps, int t)
{
    auto w = ps.weights_at(t);
    const bool log_path = model.uses_log_weights();
    for (int i = 0; i < ps.N; ++i) {
        const auto prev = t == 0 ? std::span<const double>{} : ps.parent(t, i);
        w[i] = log_path ? model.log_potential(t, prev, ps.state(t, i)) : model.potential(t, prev, ps.state(t, i));
    }
    if (log_path) log_to_linear(w);
    checked_weight_sum(w, t);
}

/// b^(i) = w_t^(i) M_{t+1}(X_t^(i), next) G_{t+1}(X_t^(i), next).
///
/// Used both for backward sampling at time t and for ancestor sampling of the
/// reference slot at time t+1. The potential factor is skipped when it does
/// not depend on the previous state, since it is then constant in i.
inline void backward_weights(const Model& model, const ParticleSystem& ps, int t,
                             std::span<const double> next, std::span<double> out)
{
    const auto w = ps.weights_at(t);
    const bool with_potential = !model.potential_depends_only_on_current();
    if (model.uses_log_weights()) {
        for (int i = 0; i < ps.N; ++i) {
            if (!(w[i] > 0.0)) {
                out[i] = -std::numeric_limits<double>::infinity();
                continue;
            }
            double lb = std::log(w[i]) + model.log_transition_density(t + 1, ps.state(t, i), next);
            if (with_potential) lb += model.log_potential(t + 1, ps.state(t, i), next);
            out[i] = lb;
        }
        log_to_linear(out);
        return;
    }
    for (int i = 0; i < ps.N; ++i) {
        if (!(w[i] > 0.0)) {
            out[i] = 0.0;
            continue;
        }
        double b = w[i] * model.transition_density(t + 1, ps.state(t, i), next);
        if (with_potential) b *= model.potential(t + 1, ps.state(t, i), next);
        out[i] = b;
    }
}

/// compute_weights for both systems of a coupled pair. A tilde slot whose
/// parent and state equal the first system's reuses that potential value.
inline void compute_weights_pair(const Model& model, ParticleSystem& ps, ParticleSystem& pt, int t)
{
    auto w = ps.weights_at(t);
    auto wt = pt.weights_at(t);
    const bool log_path = model.uses_log_weights();
    const auto eval = [&](const ParticleSystem& sys, int i) {
        const auto prev = t == 0 ? std::span<const double>{} : sys.parent(t, i);
        return log_path ? model.log_potential(t, prev, sys.state(t, i)) : model.potential(t, prev, sys.state(t, i));
    };
    for (int i = 0; i < ps.N; ++i) {
        w[i] = eval(ps, i);
        const bool shared = same_state(ps.state(t, i), pt.state(t, i)) &&
                            (t == 0 || same_state(ps.parent(t, i), pt.parent(t, i)));
        wt[i] = shared ? w[i] : eval(pt, i);
    }
    if (log_path) {
        log_to_linear(w);
        log_to_linear(wt);
    }
    checked_weight_sum(w, t);
    checked_weight_sum(wt, t);
}

/// backward_weights for both systems. Slot i of the tilde system reuses the
/// first system's value when its weight and state match and the two `next`
/// states agree.
inline void backward_weights_pair(const Model& model, const ParticleSystem& ps, const ParticleSystem& pt,
                                  int t, std::span<const double> next, std::span<const double> next_tilde,
                                  std::span<double> out, std::span<double> out_tilde)
{
    if (!same_state(next, next_tilde)) {
        backward_weights(model, ps, t, next, out);
        backward_weights(model, pt, t, next_tilde, out_tilde);
        return;
    }
    const auto w = ps.weights_at(t);
    const auto wt = pt.weights_at(t);
    const bool with_potential = !model.potential_depends_only_on_current();
    const bool log_path = model.uses_log_weights();
    const auto eval = [&](const ParticleSystem& sys, double weight, int i) {
        if (log_path) {
            if (!(weight > 0.0)) return -std::numeric_limits<double>::infinity();
            double lb = std::log(weight) + model.log_transition_density(t + 1, sys.state(t, i), next);
            if (with_potential) lb += model.log_potential(t + 1, sys.state(t, i), next);
            return lb;
        }
        if (!(weight > 0.0)) return 0.0;
        double b = weight * model.transition_density(t + 1, sys.state(t, i), next);
        if (with_potential) b *= model.potential(t + 1, sys.state(t, i), next);
        return b;
    };
    for (int i = 0; i < ps.N; ++i) {
        out[i] = eval(ps, w[i], i);
        const bool shared = w[i] == wt[i] && same_state(ps.state(t, i), pt.state(t, i));
        out_tilde[i] = shared ? out[i] : eval(pt, wt[i], i);
    }
    if (log_path) {
        log_to_linear(out);
        log_to_linear(out_tilde);
    }
}

inline void copy_state(std::span<const double> from, std::span<double> to) noexcept
{
    std::copy(from.begin(), from.end(), to.begin());
}

}  // namespace csmc::detail
