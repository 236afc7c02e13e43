#pragma once

#include <cmath>
#include <vector>

#include "csmc/models.hpp"

namespace testing {

/// Three states, sticky transitions, state-dependent potentials.
inline csmc::DiscreteModel sticky3(int T)
{
    return csmc::make_discrete(3, {0.6, 0.2, 0.2, 0.2, 0.6, 0.2, 0.2, 0.2, 0.6}, {1.0, 0.5, 0.25}, T);
}

/// Two states, one time step, M_1 = (.5, .5), G_1 = (1, 3).
inline csmc::DiscreteModel two_state_single_step()
{
    return csmc::make_discrete(2, {0.5, 0.5, 0.5, 0.5}, {1.0, 3.0}, 1, {0.5, 0.5});
}

inline csmc::DiscreteModel singleton(int T)
{
    return csmc::make_discrete(1, {1.0}, {1.0}, T);
}

/// Index of a discrete trajectory with x_1 as the most significant digit.
inline std::size_t trajectory_index(const csmc::Trajectory& x, int K)
{
    std::size_t idx = 0;
    for (int t = 0; t < x.length(); ++t) idx = idx * K + static_cast<std::size_t>(x[t][0]);
    return idx;
}

inline csmc::Trajectory trajectory_from_index(std::size_t idx, int K, int T)
{
    std::vector<double> v(T);
    for (int t = T - 1; t >= 0; --t) {
        v[t] = static_cast<double>(idx % K);
        idx /= K;
    }
    return csmc::Trajectory::scalar(std::move(v));
}

}  // namespace testing

namespace testing {

/// Forwards to another model but hides its transition densities.
class WithoutDensities final : public csmc::Model {
  public:
    explicit WithoutDensities(const csmc::Model& inner) : inner_(inner) {}
    [[nodiscard]] int horizon() const noexcept override { return inner_.horizon(); }
    [[nodiscard]] csmc::StateKind state_kind() const noexcept override { return inner_.state_kind(); }
    void sample_initial(csmc::RandomStream& rng, std::span<double> x) const override { inner_.sample_initial(rng, x); }
    void sample_transition(int t, std::span<const double> prev, csmc::RandomStream& rng,
                           std::span<double> x) const override
    {
        inner_.sample_transition(t, prev, rng, x);
    }
    [[nodiscard]] double potential(int t, std::span<const double> prev, std::span<const double> x) const override
    {
        return inner_.potential(t, prev, x);
    }
    [[nodiscard]] bool potential_depends_only_on_current() const noexcept override
    {
        return inner_.potential_depends_only_on_current();
    }

  private:
    const csmc::Model& inner_;
};

/// Forwards to another model but evaluates weights in log space.
class LogWeights final : public csmc::Model {
  public:
    explicit LogWeights(const csmc::Model& inner) : inner_(inner) {}
    [[nodiscard]] int horizon() const noexcept override { return inner_.horizon(); }
    [[nodiscard]] csmc::StateKind state_kind() const noexcept override { return inner_.state_kind(); }
    void sample_initial(csmc::RandomStream& rng, std::span<double> x) const override { inner_.sample_initial(rng, x); }
    void sample_transition(int t, std::span<const double> prev, csmc::RandomStream& rng,
                           std::span<double> x) const override
    {
        inner_.sample_transition(t, prev, rng, x);
    }
    [[nodiscard]] bool has_transition_density() const noexcept override { return true; }
    [[nodiscard]] double transition_density(int t, std::span<const double> prev,
                                            std::span<const double> x) const override
    {
        return inner_.transition_density(t, prev, x);
    }
    [[nodiscard]] double potential(int t, std::span<const double> prev, std::span<const double> x) const override
    {
        return inner_.potential(t, prev, x);
    }
    [[nodiscard]] bool potential_depends_only_on_current() const noexcept override
    {
        return inner_.potential_depends_only_on_current();
    }
    [[nodiscard]] bool uses_log_weights() const noexcept override { return true; }

  private:
    const csmc::Model& inner_;
};

}  // namespace testing
