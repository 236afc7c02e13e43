#include "csmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csmc {

MixingConstants MixingConstants::from_bounds(std::vector<double> g_lower, std::vector<double> g_upper,
                                             std::vector<double> m_lower, std::vector<double> m_upper,
                                             bool potential_current_only, bool transition_ignores_prev)
{
    const std::size_t T = g_lower.size();
    if (T == 0 || g_upper.size() != T || m_lower.size() != T || m_upper.size() != T)
        throw InvalidInput("mixing bounds must all have one entry per time step");
    for (std::size_t t = 0; t < T; ++t) {
        if (!(g_lower[t] > 0.0) || !(g_upper[t] >= g_lower[t]) || !std::isfinite(g_upper[t]))
            throw InvalidParameter("potential bounds violate 0 < G_* <= G^* < inf");
        if (t > 0 && (!(m_lower[t] > 0.0) || !(m_upper[t] >= m_lower[t]) || !std::isfinite(m_upper[t])))
            throw InvalidParameter("transition bounds violate 0 < M_* <= M^* < inf");
    }

    MixingConstants mc;
    mc.delta = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < T; ++t) mc.delta = std::min(mc.delta, g_lower[t] / g_upper[t]);

    if (T == 1) {
        mc.epsilon = mc.delta;
    } else {
        mc.epsilon = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t + 1 < T; ++t) {
            double r = g_lower[t] / g_upper[t];
            if (!transition_ignores_prev) r *= m_lower[t + 1] / m_upper[t + 1];
            if (!potential_current_only) r *= g_lower[t + 1] / g_upper[t + 1];
            mc.epsilon = std::min(mc.epsilon, r);
        }
    }
    mc.g_lower = std::move(g_lower);
    mc.g_upper = std::move(g_upper);
    mc.m_lower = std::move(m_lower);
    mc.m_upper = std::move(m_upper);
    mc.m_lower[0] = mc.m_upper[0] = 1.0;
    return mc;
}

double Model::transition_density(int, std::span<const double>, std::span<const double>) const
{
    throw CapabilityError("model does not provide transition densities");
}

double Model::log_potential(int t, std::span<const double> prev, std::span<const double> x) const
{
    return std::log(potential(t, prev, x));
}

double Model::log_transition_density(int t, std::span<const double> prev,
                                     std::span<const double> x) const
{
    return std::log(transition_density(t, prev, x));
}

double potential_product(const Model& model, const Trajectory& x)
{
    double prod = model.potential(0, {}, x[0]);
    for (int t = 1; t < x.length() && prod > 0.0; ++t) prod *= model.potential(t, x[t - 1], x[t]);
    return prod;
}

void check_reference(const Model& model, const Trajectory& x)
{
    if (x.length() != model.horizon() || x.dim() != model.state_dim())
        throw InvalidReference("reference trajectory does not match the model's horizon/dimension");
    for (int t = 0; t < x.length(); ++t) {
        const auto prev = t == 0 ? std::span<const double>{} : x[t - 1];
        const bool ok = model.uses_log_weights() ? model.log_potential(t, prev, x[t]) > -HUGE_VAL
                                                 : model.potential(t, prev, x[t]) > 0.0;
        if (!ok)
            throw InvalidReference("reference has zero potential at time step " + std::to_string(t + 1));
    }
}

}  // namespace csmc
