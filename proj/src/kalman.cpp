#include <cmath>

#include "csmc/models.hpp"

namespace csmc {

KalmanResult kalman_smoother(const LgssParams& params, std::span<const double> y, int T)
{
    if (T != static_cast<int>(y.size()))
        throw InvalidInput("observation record length does not match the horizon");
    return kalman_smoother(params, y);
}

KalmanResult kalman_smoother(const LgssParams& params, std::span<const double> y)
{
    if (y.empty()) throw InvalidInput("empty observation record");
    if (!(params.state_sd > 0.0) || !(params.obs_sd > 0.0) || !(params.initial_sd() > 0.0))
        throw InvalidParameter("noise standard deviations must be positive");

    const std::size_t T = y.size();
    const double a = params.ar;
    const double q = params.state_sd * params.state_sd;
    const double r = params.obs_sd * params.obs_sd;

    KalmanResult res;
    res.filter_mean.resize(T);
    res.filter_var.resize(T);
    res.smooth_mean.resize(T);
    res.smooth_var.resize(T);

    double m_pred = 0.0;
    double p_pred = params.initial_sd() * params.initial_sd();
    for (std::size_t t = 0; t < T; ++t) {
        if (t > 0) {
            m_pred = a * res.filter_mean[t - 1];
            p_pred = a * a * res.filter_var[t - 1] + q;
        }
        const double gain = p_pred / (p_pred + r);
        res.filter_mean[t] = m_pred + gain * (y[t] - m_pred);
        res.filter_var[t] = (1.0 - gain) * p_pred;
    }

    res.smooth_mean[T - 1] = res.filter_mean[T - 1];
    res.smooth_var[T - 1] = res.filter_var[T - 1];
    for (std::size_t t = T - 1; t-- > 0;) {
        const double p_next = a * a * res.filter_var[t] + q;
        const double g = res.filter_var[t] * a / p_next;
        res.smooth_mean[t] = res.filter_mean[t] + g * (res.smooth_mean[t + 1] - a * res.filter_mean[t]);
        res.smooth_var[t] = res.filter_var[t] + g * g * (res.smooth_var[t + 1] - p_next);
    }
    return res;
}

}  // namespace csmc
