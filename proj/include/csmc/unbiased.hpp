#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "csmc/ccxpf.hpp"
#include "csmc/model.hpp"
#include "csmc/random.hpp"

namespace csmc {

/// Neumaier's compensated summation.
class CompensatedSum {
  public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

using TestFunction = std::function<double(const Trajectory&)>;

struct EstimatorConfig {
    int burn_in = 1;
    int particles = 2;
    Variant variant{};
    int cap = 10000;
    std::vector<TestFunction> functions;

    /// Throws InvalidParameter unless b >= 1, N >= 2, cap >= b and at least
    /// one test function is given.
    void validate() const;
};

struct EstimatorRun {
    /// One value per test function; empty for a censored run.
    std::vector<double> z;
    /// First n >= 1 with S_n = S~_n.
    std::optional<int> meeting_time;
    /// Iterations of the coupled kernel performed, max(meeting_time, b) when
    /// not censored.
    int iterations = 0;
    bool censored = false;
    /// Key of the stream the run was driven by.
    std::uint64_t stream_key = 0;
};

/// S_0 and S~_0 of the estimator: two independent particle filter draws
/// S~_0 and S_{-1}, then S_0 as the first output of one coupled sweep from
/// (S_{-1}, S_{-1}).
std::pair<Trajectory, Trajectory> initialize_chains(const Model& model, int N, Variant variant,
                                                    const RandomStream& rng);

/// The coupled-sweep stream used for iteration n >= 1 of a chain driven by
/// `rng`.
RandomStream iteration_stream(const RandomStream& rng, int n);

/// Unbiased estimator of E_pi[h_j] for all configured test functions:
///   Z_j = h_j(S_b) + sum_{k=b+1}^{tau} [h_j(S_k) - h_j(S~_k)],
/// with tau the first n >= b at which the chains have met. All functions
/// share one coupled chain.
EstimatorRun unbiased_estimate(const Model& model, const EstimatorConfig& cfg, const RandomStream& rng);

}  // namespace csmc
