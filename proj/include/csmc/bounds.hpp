#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "csmc/random.hpp"

namespace csmc {

/// One realisation of the dominating chain for the CCBPF coupling boundary.
///
/// Time t = 1, 2, ... is stored at index t - 1. `chat` runs until its first
/// zero at time s (so `chat.back() == 0`), and `xi` holds the indicators
/// xi_1..xi_s with xi_s = 0. When xi_1 = 0 the indicators continue below
/// t = 1 as a run of `tail_zeros` further zeros before the first one.
struct DominatingChain {
    std::vector<int> chat;
    std::vector<std::uint8_t> xi;
    int tail_zeros = 0;
    /// min{t : xi_t = 0} - 1; negative when the lowest zero lies below t = 1.
    int delta = 0;
};

/// Simulates (C^, xi, Delta) for N particles and strong-mixing constants
/// 0 < epsilon <= delta <= 1:
///  (i)  C^_1 = N-1, C^_{s+1} ~ Binom(N-1, d C^_s / (d C^_s + N - C^_s)) until C^_s = 0;
///  (ii) xi_s = 0 and for t = s-1, ..., 1, xi_t ~ Bernoulli(p_t) with
///       p_t = e C^_t / N after a zero and e C^_t / (e C^_t + N - C^_t) after a one;
///  below t = 1, C^ = N so a one is absorbing and after a zero the next
///  indicator is zero with probability 1 - e; that segment is drawn as one
///  geometric variate.
DominatingChain simulate_dominating_chain(int N, double delta, double epsilon, RandomStream& rng);
int simulate_delta(int N, double delta, double epsilon, RandomStream& rng);

/// delta_N = (N-1) delta / N.
double delta_n(int N, double delta);

/// Closed form delta_N^{t-1}(N-1) / (1 + delta_N^{t-1}(N-1)) offered as a lower
/// bound on E[C^_t / N]. It exceeds the true mean for t >= 2: with delta = 1,
/// E[C^_t / N] = ((N-1)/N)^t exactly. See chat_mean_jensen_bound.
double chat_mean_lower_bound(int N, double delta, int t);

/// A valid lower bound on E[C^_t / N] from iterating Jensen's inequality on
/// E[R_t | R_{t-1}] = delta_N R_{t-1} / (1 - (1 - delta) R_{t-1}):
///   delta_N^{t-1} r / (1 - (1 - delta) r (1 - delta_N^{t-1}) / (1 - delta_N)),
/// with r = (N-1)/N. Exact for t <= 2 and, when delta = 1, for every t.
double chat_mean_jensen_bound(int N, double delta, int t);

/// A bound evaluated in log space. `vacuous` marks values that carry no
/// information (a probability bound above 1, a lower bound below 0).
struct BoundValue {
    double log_value = 0.0;
    double value = 0.0;
    bool vacuous = false;
};

/// Tail bound P(tau >= n) <= alpha^T beta^{-n}.
BoundValue coupling_tail_bound(double alpha, double beta, int T, int n);

/// One-shot CCPF coupling lower bound 1 - 2^T T / ((2 c_*)^{-1}(N-1) + 1);
/// reported as-is, vacuous when negative.
BoundValue oneshot_rate_bound(double c_star, int N, int T);

/// One-shot CCPF coupling lower bound 1 - c/(N+c) for a known constant c.
BoundValue oneshot_coupling_bound(double c, int N);

/// Index-coupled resampling guarantees for weights in [w_*, w^*], eps = w_*/w^*:
/// P(I = I~ = i) >= eps/N and P(I = I~ in C) >= |C| eps / (|C| eps + N - |C|).
double ic_res_atom_bound(double eps, int N);
double ic_res_set_bound(double eps, int N, int coupled);

/// c_* = 1/epsilon.
double c_star_from_epsilon(double epsilon);

struct EstimatorCostBounds {
    /// E[tau] <= b v ceil(rho T) + alpha^T beta^{-(ceil(rho T) v b)} / (beta - 1)   (CCBPF)
    BoundValue tau_mixing;
    /// |var Z - var_pi h| <= 16 alpha^T (1 - 1/beta)^{-2} beta^{-b/2} |h|^2   (CCBPF)
    BoundValue variance_gap_mixing;
    /// E[tau] <= b + (c/(N+c))^{b-1} (N+c)/N   (CCPF)
    BoundValue tau_oneshot;
    /// |var Z - var_pi h| <= 16 |h|^2 ((N+c)/N)^2 (c/(N+c))^{b/2}   (CCPF)
    BoundValue variance_gap_oneshot;
};

/// `h_norm_sq` is the squared sup-norm of the centred test function.
EstimatorCostBounds estimator_cost_bounds(double alpha, double beta, double rho, int T, int b, int N,
                                          double c, double h_norm_sq = 1.0);

/// Parameters of the coupling-time statements.
struct BoundParams {
    double alpha = 1.0;
    double beta = 1.0;
    double rho = 0.0;
    int n0 = 2;
    double delta = 1.0;
    double epsilon = 1.0;

    /// Throws InvalidParameter unless alpha, beta > 1 and
    /// alpha < 1/(1 - epsilon) (no upper limit when epsilon = 1).
    void validate() const;
    /// rho_min = log(alpha) / log(beta); linear-time statements need rho > rho_min.
    [[nodiscard]] double rho_min() const;
    [[nodiscard]] double delta_n(int N) const { return csmc::delta_n(N, delta); }
};

struct MonteCarloMean {
    double mean = 0.0;
    double std_error = 0.0;
};

struct DeltaMoments {
    MonteCarloMean delta;
    /// E[alpha^{-Delta}]
    MonteCarloMean alpha_pow;
};

DeltaMoments delta_moments(int N, double delta, double epsilon, double alpha, int draws, RandomStream& rng);

struct DriftCutoffRow {
    int N = 0;
    DeltaMoments moments;
    bool satisfied = false;
};

struct DriftCutoff {
    /// Smallest N in {2, 4, ..., 2^max_log2} with E[Delta] >= beta and
    /// E[alpha^{-Delta}] <= 1/beta (Monte Carlo estimates).
    std::optional<int> N;
    std::vector<DriftCutoffRow> rows;
};

DriftCutoff find_drift_cutoff(double delta, double epsilon, double alpha, double beta, int draws,
                              RandomStream& rng, int max_log2 = 14);

/// Monte Carlo E[C^_t / N] for t = 1..t_max.
std::vector<MonteCarloMean> chat_mean_profile(int N, double delta, int t_max, int draws, RandomStream& rng);

/// First t (1-based) at which a profile drops below `level`, or t_max + 1.
int chat_cutoff_step(const std::vector<MonteCarloMean>& profile, double level = 0.5);

}  // namespace csmc
