#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "csmc/model.hpp"
#include "csmc/random.hpp"

namespace csmc {

/// Sum of a weight vector; throws DegenerateWeights when an entry is negative
/// or non-finite, or when all entries are zero.
double checked_weight_sum(std::span<const double> weights, int time = -1);

/// One draw from Categ(weights) by linear-scan inverse CDF.
int categorical(std::span<const double> weights, RandomStream& rng);

/// Prefix sums of a weight vector for repeated inverse-CDF draws. Gives the
/// same index as `categorical` for the same uniform.
class CumulativeWeights {
  public:
    CumulativeWeights() = default;
    explicit CumulativeWeights(std::span<const double> weights, int time = -1) { assign(weights, time); }

    void assign(std::span<const double> weights, int time = -1);

    [[nodiscard]] int draw(double u) const noexcept;
    int draw(RandomStream& rng) const noexcept { return draw(rng.uniform()); }

    [[nodiscard]] double total() const noexcept { return cumsum_.empty() ? 0.0 : cumsum_.back(); }
    [[nodiscard]] std::size_t size() const noexcept { return cumsum_.size(); }

  private:
    friend class MaximalCoupling;
    // For weights already known to be finite and non-negative with a positive sum.
    void assign_trusted(std::span<const double> weights);

    std::vector<double> cumsum_;
    int last_positive_ = 0;
};

/// Maximal coupling of Categ(w) and Categ(w~) (index-coupled resampling).
///
/// With normalised weights, p_c = sum_i min(w_i, w~_i). A pair is drawn from
/// the overlap min(w, w~)/p_c with probability p_c, otherwise independently
/// from the two residuals (w - min)/(1 - p_c) and (w~ - min)/(1 - p_c).
/// Residuals are formed as max(w - w~, 0), so they are never negative. When
/// either residual mass is below 1e-12 the coupling is treated as exact and
/// residual tables are never built.
class MaximalCoupling {
  public:
    MaximalCoupling() = default;
    MaximalCoupling(std::span<const double> weights, std::span<const double> weights_tilde,
                    int time = -1)
    {
        assign(weights, weights_tilde, time);
    }

    void assign(std::span<const double> weights, std::span<const double> weights_tilde, int time = -1);

    /// Probability that a draw lands on a common index.
    [[nodiscard]] double coupling_probability() const noexcept { return p_couple_; }
    [[nodiscard]] bool always_coupled() const noexcept { return always_coupled_; }

    /// P(I = i, I~ = j) under the coupling.
    [[nodiscard]] double joint_probability(int i, int j) const;

    std::pair<int, int> draw(RandomStream& rng) const;

  private:
    std::vector<double> overlap_;
    std::vector<double> residual_;
    std::vector<double> residual_tilde_;
    CumulativeWeights overlap_table_;
    CumulativeWeights residual_table_;
    CumulativeWeights residual_tilde_table_;
    double p_couple_ = 0.0;
    bool always_coupled_ = false;
};

/// CRes(w, w~, n): n independent pairs from the maximal coupling.
std::vector<std::pair<int, int>> cres(std::span<const double> weights,
                                      std::span<const double> weights_tilde, int n,
                                      RandomStream& rng);

enum class ProposalMode {
    /// Both sides are driven by the same base draws (common random numbers).
    Common,
    /// The two sides use independent forks of the stream.
    Independent,
};

/// Draws (x, x~) with x ~ M_t(prev, .) and x~ ~ M_t(prev~, .) marginally.
///
/// Equal parents always yield bitwise-equal children. In Common mode both
/// sides replay a copy of `rng`; in Independent mode the tilde side uses a
/// fork of it. `t` is 0-based; for t = 0 the parents are ignored and M_1 is
/// used.
void coupled_propose(const Model& model, int t, std::span<const double> prev,
                     std::span<const double> prev_tilde, ProposalMode mode, const RandomStream& rng,
                     std::span<double> x, std::span<double> x_tilde);

/// Binomial(n, p) by inversion started at the mode; deterministic for a given
/// stream position on every platform.
std::int64_t binomial(std::int64_t n, double p, RandomStream& rng);

}  // namespace csmc
