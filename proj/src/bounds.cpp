#include "csmc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csmc/error.hpp"
#include "csmc/sampling.hpp"

namespace csmc {

namespace {

void check_chain_params(int N, double delta, double epsilon)
{
    if (N < 2) throw InvalidParameter("dominating chain needs N >= 2");
    if (!(epsilon > 0.0) || !(epsilon <= delta) || !(delta <= 1.0))
        throw InvalidParameter("dominating chain needs 0 < epsilon <= delta <= 1");
}

BoundValue from_log(double log_value, bool vacuous)
{
    return {log_value, std::exp(log_value), vacuous};
}

// log(exp(a) + exp(b))
double log_add(double a, double b)
{
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

int geometric_failures(double epsilon, RandomStream& rng)
{
    if (epsilon >= 1.0) return 0;
    const double g = std::floor(std::log(rng.uniform_open()) / std::log1p(-epsilon));
    return g > std::numeric_limits<int>::max() ? std::numeric_limits<int>::max() : static_cast<int>(g);
}

MonteCarloMean finish(double sum, double sum_sq, int n)
{
    MonteCarloMean m;
    m.mean = sum / n;
    if (n > 1) {
        const double var = std::max(0.0, (sum_sq - n * m.mean * m.mean) / (n - 1));
        m.std_error = std::sqrt(var / n);
    }
    return m;
}

}  // namespace

DominatingChain simulate_dominating_chain(int N, double delta, double epsilon, RandomStream& rng)
{
    check_chain_params(N, delta, epsilon);
    DominatingChain out;
    int c = N - 1;
    out.chat.push_back(c);
    while (c > 0) {
        const double p = delta * c / (delta * c + (N - c));
        c = static_cast<int>(binomial(N - 1, p, rng));
        out.chat.push_back(c);
    }
    const int s = static_cast<int>(out.chat.size());
    out.xi.assign(s, 0);
    for (int t = s - 1; t >= 1; --t) {
        const double ct = out.chat[t - 1];
        const double p = out.xi[t] == 0 ? epsilon * ct / N : ct * epsilon / (ct * epsilon + N - ct);
        out.xi[t - 1] = rng.uniform() < p ? 1 : 0;
    }
    if (out.xi[0] == 0) {
        out.tail_zeros = geometric_failures(epsilon, rng);
        out.delta = -out.tail_zeros;
    } else {
        int z = 1;
        while (out.xi[z] != 0) ++z;
        out.delta = z;  // lowest zero at time z + 1
    }
    return out;
}

int simulate_delta(int N, double delta, double epsilon, RandomStream& rng)
{
    return simulate_dominating_chain(N, delta, epsilon, rng).delta;
}

double delta_n(int N, double delta)
{
    return (N - 1) * delta / N;
}

double chat_mean_lower_bound(int N, double delta, int t)
{
    if (N < 2) throw InvalidParameter("chat_mean_lower_bound needs N >= 2");
    if (t < 1) throw InvalidParameter("chat_mean_lower_bound needs t >= 1");
    if (!(delta > 0.0) || delta > 1.0) throw InvalidParameter("chat_mean_lower_bound needs delta in (0, 1]");
    const double a = std::pow(delta_n(N, delta), t - 1) * (N - 1);
    return a / (1.0 + a);
}

double chat_mean_jensen_bound(int N, double delta, int t)
{
    static_cast<void>(chat_mean_lower_bound(N, delta, t));
    const double dn = delta_n(N, delta);
    const double a = std::pow(dn, t - 1);
    const double r = (N - 1.0) / N;
    return a * r / (1.0 - (1.0 - delta) * r * (1.0 - a) / (1.0 - dn));
}

BoundValue coupling_tail_bound(double alpha, double beta, int T, int n)
{
    if (!(alpha > 1.0) || !(beta > 1.0)) throw InvalidParameter("coupling_tail_bound needs alpha, beta > 1");
    if (T < 0) throw InvalidParameter("coupling_tail_bound needs T >= 0");
    const double lv = T * std::log(alpha) - n * std::log(beta);
    return from_log(lv, lv > 0.0);
}

BoundValue oneshot_rate_bound(double c_star, int N, int T)
{
    if (!(c_star > 0.0) || N < 2 || T < 1) throw InvalidParameter("oneshot_rate_bound needs c_* > 0, N >= 2, T >= 1");
    // 1 - x with log x = T log 2 + log T - log((N-1)/(2c_*) + 1)
    const double log_x = T * std::log(2.0) + std::log(static_cast<double>(T)) -
                         std::log1p((N - 1) / (2.0 * c_star));
    BoundValue b;
    if (log_x < 0.0) {
        b.value = -std::expm1(log_x);
        b.log_value = std::log(b.value);
    } else {
        b.value = log_x > 700.0 ? -std::numeric_limits<double>::infinity() : 0.0 - std::expm1(log_x);
        b.log_value = b.value == 0.0 ? -std::numeric_limits<double>::infinity()
                                     : std::numeric_limits<double>::quiet_NaN();
    }
    b.vacuous = b.value < 0.0;
    return b;
}

BoundValue oneshot_coupling_bound(double c, int N)
{
    if (!(c > 0.0) || N < 1) throw InvalidParameter("oneshot_coupling_bound needs c > 0, N >= 1");
    const double v = N / (N + c);
    return {std::log(v), v, false};
}

double ic_res_atom_bound(double eps, int N)
{
    if (!(eps > 0.0) || eps > 1.0 || N < 1) throw InvalidParameter("ic_res_atom_bound needs eps in (0,1], N >= 1");
    return eps / N;
}

double ic_res_set_bound(double eps, int N, int coupled)
{
    if (!(eps > 0.0) || eps > 1.0 || N < 1 || coupled < 0 || coupled > N)
        throw InvalidParameter("ic_res_set_bound needs eps in (0,1], 0 <= |C| <= N");
    const double c = coupled;
    return c * eps / (c * eps + N - c);
}

double c_star_from_epsilon(double epsilon)
{
    if (!(epsilon > 0.0) || epsilon > 1.0) throw InvalidParameter("c_star_from_epsilon needs epsilon in (0, 1]");
    return 1.0 / epsilon;
}

EstimatorCostBounds estimator_cost_bounds(double alpha, double beta, double rho, int T, int b, int N,
                                          double c, double h_norm_sq)
{
    if (!(alpha > 1.0) || !(beta > 1.0)) throw InvalidParameter("estimator_cost_bounds needs alpha, beta > 1");
    if (!(rho > 0.0) || T < 1 || b < 1 || N < 1 || !(c > 0.0) || !(h_norm_sq >= 0.0))
        throw InvalidParameter("estimator_cost_bounds parameter out of range");
    EstimatorCostBounds out;
    const double la = std::log(alpha);
    const double lb = std::log(beta);
    const double lh = std::log(h_norm_sq);
    const double log16 = std::log(16.0);

    const double m = std::max<double>(b, std::ceil(rho * T));
    const double tail = T * la - m * lb - std::log(beta - 1.0);
    out.tau_mixing = from_log(log_add(std::log(m), tail), false);

    out.variance_gap_mixing =
        from_log(log16 + T * la - 2.0 * std::log1p(-1.0 / beta) - 0.5 * b * lb + lh, false);

    const double lr = std::log(c) - std::log(N + c);
    const double second = (b - 1) * lr + std::log(N + c) - std::log(static_cast<double>(N));
    out.tau_oneshot = from_log(log_add(std::log(static_cast<double>(b)), second), false);

    out.variance_gap_oneshot =
        from_log(log16 + lh + 2.0 * (std::log(N + c) - std::log(static_cast<double>(N))) + 0.5 * b * lr, false);
    return out;
}

void BoundParams::validate() const
{
    if (!(alpha > 1.0) || !(beta > 1.0)) throw InvalidParameter("alpha and beta must exceed 1");
    if (!(epsilon > 0.0) || !(epsilon <= delta) || !(delta <= 1.0))
        throw InvalidParameter("need 0 < epsilon <= delta <= 1");
    if (epsilon < 1.0 && !(alpha < 1.0 / (1.0 - epsilon)))
        throw InvalidParameter("alpha must lie below 1/(1 - epsilon)");
}

double BoundParams::rho_min() const
{
    return std::log(alpha) / std::log(beta);
}

DeltaMoments delta_moments(int N, double delta, double epsilon, double alpha, int draws, RandomStream& rng)
{
    check_chain_params(N, delta, epsilon);
    if (draws < 1) throw InvalidParameter("delta_moments needs draws >= 1");
    const double la = std::log(alpha);
    double s = 0, s2 = 0, a = 0, a2 = 0;
    for (int i = 0; i < draws; ++i) {
        const double d = simulate_delta(N, delta, epsilon, rng);
        s += d;
        s2 += d * d;
        const double p = std::exp(-d * la);
        a += p;
        a2 += p * p;
    }
    return {finish(s, s2, draws), finish(a, a2, draws)};
}

DriftCutoff find_drift_cutoff(double delta, double epsilon, double alpha, double beta, int draws,
                              RandomStream& rng, int max_log2)
{
    BoundParams params;
    params.alpha = alpha;
    params.beta = beta;
    params.delta = delta;
    params.epsilon = epsilon;
    params.validate();
    DriftCutoff out;
    for (int k = 1; k <= max_log2; ++k) {
        const int N = 1 << k;
        RandomStream sub = rng.fork(static_cast<std::uint64_t>(N));
        DriftCutoffRow row;
        row.N = N;
        row.moments = delta_moments(N, delta, epsilon, alpha, draws, sub);
        row.satisfied = row.moments.delta.mean >= beta && row.moments.alpha_pow.mean <= 1.0 / beta;
        out.rows.push_back(row);
        if (row.satisfied) {
            out.N = N;
            break;
        }
    }
    return out;
}

std::vector<MonteCarloMean> chat_mean_profile(int N, double delta, int t_max, int draws, RandomStream& rng)
{
    check_chain_params(N, delta, std::min(delta, 1.0));
    if (t_max < 1 || draws < 1) throw InvalidParameter("chat_mean_profile needs t_max, draws >= 1");
    std::vector<double> s(t_max, 0.0), s2(t_max, 0.0);
    for (int i = 0; i < draws; ++i) {
        int c = N - 1;
        for (int t = 0; t < t_max && c > 0; ++t) {
            const double r = static_cast<double>(c) / N;
            s[t] += r;
            s2[t] += r * r;
            const double p = delta * c / (delta * c + (N - c));
            c = static_cast<int>(binomial(N - 1, p, rng));
        }
    }
    std::vector<MonteCarloMean> out(t_max);
    for (int t = 0; t < t_max; ++t) out[t] = finish(s[t], s2[t], draws);
    return out;
}

int chat_cutoff_step(const std::vector<MonteCarloMean>& profile, double level)
{
    for (std::size_t t = 0; t < profile.size(); ++t)
        if (profile[t].mean < level) return static_cast<int>(t) + 1;
    return static_cast<int>(profile.size()) + 1;
}

}  // namespace csmc
