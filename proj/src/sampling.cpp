#include "csmc/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "csmc/error.hpp"

namespace csmc {

namespace {

constexpr std::uint64_t kIndependentSide = 0x7e1de;
constexpr double kResidualTolerance = 1e-12;

}  // namespace

double checked_weight_sum(std::span<const double> weights, int time)
{
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DegenerateWeights(time, "negative or non-finite weight");
        sum += w;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) throw DegenerateWeights(time);
    return sum;
}

int categorical(std::span<const double> weights, RandomStream& rng)
{
    const double total = checked_weight_sum(weights);
    const double target = rng.uniform() * total;
    double acc = 0.0;
    int last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) last_positive = static_cast<int>(i);
        acc += weights[i];
        if (target < acc) return static_cast<int>(i);
    }
    return last_positive;
}

void CumulativeWeights::assign(std::span<const double> weights, int time)
{
    cumsum_.resize(weights.size());
    double acc = 0.0;
    last_positive_ = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        if (!(w >= 0.0) || !std::isfinite(w)) throw DegenerateWeights(time, "negative or non-finite weight");
        if (w > 0.0) last_positive_ = static_cast<int>(i);
        cumsum_[i] = acc += w;
    }
    if (!(acc > 0.0) || !std::isfinite(acc)) throw DegenerateWeights(time);
}

void CumulativeWeights::assign_trusted(std::span<const double> weights)
{
    cumsum_.resize(weights.size());
    double acc = 0.0;
    int last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        last = weights[i] > 0.0 ? static_cast<int>(i) : last;
        cumsum_[i] = acc += weights[i];
    }
    last_positive_ = last;
}

int CumulativeWeights::draw(double u) const noexcept
{
    // Branch-free upper_bound: weights are random, so a branching search
    // mispredicts about half its comparisons.
    const double target = u * cumsum_.back();
    const double* base = cumsum_.data();
    std::size_t len = cumsum_.size();
    while (len > 1) {
        const std::size_t half = len / 2;
        base += base[half - 1] <= target ? half : 0;
        len -= half;
    }
    const auto i = static_cast<std::size_t>(base - cumsum_.data()) + (*base <= target ? 1 : 0);
    if (i == cumsum_.size()) return last_positive_;
    return static_cast<int>(i);
}

void MaximalCoupling::assign(std::span<const double> weights, std::span<const double> weights_tilde,
                             int time)
{
    if (weights.size() != weights_tilde.size())
        throw InvalidInput("coupled weight vectors must have the same length");
    const double sum = checked_weight_sum(weights, time);
    const double sum_tilde = checked_weight_sum(weights_tilde, time);

    const std::size_t n = weights.size();
    overlap_.resize(n);
    residual_.resize(n);
    residual_tilde_.resize(n);
    double p_overlap = 0.0;
    double q = 0.0;
    double q_tilde = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights[i] / sum;
        const double wt = weights_tilde[i] / sum_tilde;
        const double m = std::min(w, wt);
        overlap_[i] = m;
        residual_[i] = w > m ? w - m : 0.0;
        residual_tilde_[i] = wt > m ? wt - m : 0.0;
        p_overlap += m;
        q += residual_[i];
        q_tilde += residual_tilde_[i];
    }

    always_coupled_ = q <= kResidualTolerance || q_tilde <= kResidualTolerance;
    if (always_coupled_) {
        p_couple_ = 1.0;
        std::fill(residual_.begin(), residual_.end(), 0.0);
        std::fill(residual_tilde_.begin(), residual_tilde_.end(), 0.0);
        overlap_table_.assign_trusted(overlap_);
        return;
    }
    p_couple_ = p_overlap / (p_overlap + 0.5 * (q + q_tilde));
    if (p_overlap > 0.0) overlap_table_.assign_trusted(overlap_);
    residual_table_.assign_trusted(residual_);
    residual_tilde_table_.assign_trusted(residual_tilde_);
}

double MaximalCoupling::joint_probability(int i, int j) const
{
    const auto ii = static_cast<std::size_t>(i);
    const auto jj = static_cast<std::size_t>(j);
    double p = 0.0;
    if (i == j && p_couple_ > 0.0) p += p_couple_ * overlap_[ii] / overlap_table_.total();
    if (!always_coupled_)
        p += (1.0 - p_couple_) * residual_[ii] / residual_table_.total() * residual_tilde_[jj] /
             residual_tilde_table_.total();
    return p;
}

std::pair<int, int> MaximalCoupling::draw(RandomStream& rng) const
{
    // The branch uniform, rescaled, also selects the first index.
    const double u = rng.uniform();
    if (always_coupled_) {
        const int i = overlap_table_.draw(u);
        return {i, i};
    }
    if (u < p_couple_) {
        const int i = overlap_table_.draw(u / p_couple_);
        return {i, i};
    }
    const int i = residual_table_.draw((u - p_couple_) / (1.0 - p_couple_));
    const int j = residual_tilde_table_.draw(rng);
    return {i, j};
}

std::vector<std::pair<int, int>> cres(std::span<const double> weights,
                                      std::span<const double> weights_tilde, int n,
                                      RandomStream& rng)
{
    const MaximalCoupling coupling(weights, weights_tilde);
    std::vector<std::pair<int, int>> out(static_cast<std::size_t>(std::max(n, 0)));
    for (auto& pair : out) pair = coupling.draw(rng);
    return out;
}

void coupled_propose(const Model& model, int t, std::span<const double> prev,
                     std::span<const double> prev_tilde, ProposalMode mode, const RandomStream& rng,
                     std::span<double> x, std::span<double> x_tilde)
{
    RandomStream start = rng;
    start.prefetch();
    RandomStream a = start;
    if (t == 0) {
        model.sample_initial(a, x);
        std::copy(x.begin(), x.end(), x_tilde.begin());
        return;
    }
    model.sample_transition(t, prev, a, x);
    if (same_state(prev, prev_tilde)) {
        std::copy(x.begin(), x.end(), x_tilde.begin());
        return;
    }
    RandomStream b = mode == ProposalMode::Common ? start : rng.fork(kIndependentSide);
    model.sample_transition(t, prev_tilde, b, x_tilde);
}

std::int64_t binomial(std::int64_t n, double p, RandomStream& rng)
{
    if (n < 0 || !(p >= 0.0 && p <= 1.0)) throw InvalidParameter("binomial requires n >= 0 and p in [0, 1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p, rng);

    const double q = 1.0 - p;
    const double odds = p / q;
    const auto mode = static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p));
    const std::int64_t k0 = std::min(mode, n);
    const double log_pmf = std::lgamma(static_cast<double>(n) + 1.0) -
                           std::lgamma(static_cast<double>(k0) + 1.0) -
                           std::lgamma(static_cast<double>(n - k0) + 1.0) +
                           static_cast<double>(k0) * std::log(p) +
                           static_cast<double>(n - k0) * std::log1p(-p);

    double u = rng.uniform();
    double p_hi = std::exp(log_pmf);
    double p_lo = p_hi;
    if (u < p_hi) return k0;
    u -= p_hi;
    std::int64_t hi = k0;
    std::int64_t lo = k0;
    // search outward from the mode, alternating sides
    while (hi < n || lo > 0) {
        if (hi < n) {
            p_hi *= static_cast<double>(n - hi) / static_cast<double>(hi + 1) * odds;
            ++hi;
            if (u < p_hi) return hi;
            u -= p_hi;
        }
        if (lo > 0) {
            p_lo *= static_cast<double>(lo) / static_cast<double>(n - lo + 1) / odds;
            --lo;
            if (u < p_lo) return lo;
            u -= p_lo;
        }
        if (p_hi == 0.0 && p_lo == 0.0) break;
    }
    return k0;
}

}  // namespace csmc
