#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "csmc/model.hpp"
#include "csmc/random.hpp"

namespace csmc {

/// How the output trajectory's ancestry is selected.
enum class Ancestry {
    Tracing,           ///< AT: follow stored ancestor indices from the terminal draw
    AncestorSampling,  ///< AS: resample the reference slot's ancestor in the forward pass
    BackwardSampling,  ///< BS: redraw each index from the backward weights
};

std::string_view to_string(Ancestry a) noexcept;
/// Parses "AT", "AS" or "BS"; throws InvalidParameter otherwise.
Ancestry parse_ancestry(std::string_view name);

/// Particle states X_t^(i), weights w_t^(i) and ancestor indices I_t^(i) for
/// one forward pass, all 0-based. Slot 0 holds the reference in conditional
/// filters; `ancestor(0, i)` is unused.
struct ParticleSystem {
    int T = 0;
    int N = 0;
    int dim = 1;
    std::vector<double> states;
    std::vector<double> weights;
    std::vector<int> ancestors;

    void resize(int horizon, int particles, int state_dim);

    [[nodiscard]] std::span<double> state(int t, int i) noexcept
    {
        return {states.data() + (static_cast<std::size_t>(t) * N + i) * dim, static_cast<std::size_t>(dim)};
    }
    [[nodiscard]] std::span<const double> state(int t, int i) const noexcept
    {
        return {states.data() + (static_cast<std::size_t>(t) * N + i) * dim, static_cast<std::size_t>(dim)};
    }
    [[nodiscard]] std::span<double> weights_at(int t) noexcept
    {
        return {weights.data() + static_cast<std::size_t>(t) * N, static_cast<std::size_t>(N)};
    }
    [[nodiscard]] std::span<const double> weights_at(int t) const noexcept
    {
        return {weights.data() + static_cast<std::size_t>(t) * N, static_cast<std::size_t>(N)};
    }
    [[nodiscard]] int& ancestor(int t, int i) noexcept { return ancestors[static_cast<std::size_t>(t) * N + i]; }
    [[nodiscard]] int ancestor(int t, int i) const noexcept
    {
        return ancestors[static_cast<std::size_t>(t) * N + i];
    }
    /// State of the parent of particle i at time t >= 1.
    [[nodiscard]] std::span<const double> parent(int t, int i) const noexcept
    {
        return state(t - 1, ancestor(t, i));
    }

    /// Materialises X_{1:T}^(J_{1:T}).
    [[nodiscard]] Trajectory extract(std::span<const int> indices) const;
};

/// Conditional particle filter kernel (CPF with ancestor tracing, or CBPF
/// with backward sampling) on trajectory space. Keeps its particle system
/// between calls so repeated sweeps do not reallocate.
class ConditionalKernel {
  public:
    ConditionalKernel(const Model& model, int N, Ancestry ancestry);

    /// One sweep from `reference`. Uses only forks of `rng`.
    Trajectory step(const Trajectory& reference, const RandomStream& rng);

    [[nodiscard]] const ParticleSystem& particles() const noexcept { return ps_; }
    /// J_{1:T} selected by the last sweep.
    [[nodiscard]] const std::vector<int>& indices() const noexcept { return indices_; }

  private:
    const Model& model_;
    int N_;
    Ancestry ancestry_;
    ParticleSystem ps_;
    std::vector<int> indices_;
    std::vector<double> scratch_;
};

Trajectory cxpf_step(const Model& model, const Trajectory& reference, int N, Ancestry ancestry,
                     const RandomStream& rng);

/// Bootstrap particle filter with multinomial resampling at every step;
/// returns the ancestral line of a terminal particle drawn from Categ(w_T).
/// Throws DegenerateWeights naming the step where all weights vanished.
Trajectory pf_trajectory(const Model& model, int N, const RandomStream& rng);

}  // namespace csmc
