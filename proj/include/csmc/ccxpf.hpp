#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "csmc/cxpf.hpp"
#include "csmc/model.hpp"
#include "csmc/random.hpp"
#include "csmc/sampling.hpp"

namespace csmc {

struct Variant {
    Ancestry ancestry = Ancestry::BackwardSampling;
    /// Common random numbers for proposals from distinct parents.
    bool crn = true;

    [[nodiscard]] ProposalMode proposal_mode() const noexcept
    {
        return crn ? ProposalMode::Common : ProposalMode::Independent;
    }
};

/// Output of one coupled sweep.
struct CoupledPair {
    Trajectory first;
    Trajectory second;
    /// Perfect coupling boundary: length of the longest common prefix.
    int kappa = 0;
    /// |C_t| per time step; empty unless diagnostics were requested.
    std::vector<int> coupled_counts;

    [[nodiscard]] bool coupled() const noexcept { return kappa == first.length(); }
};

/// max{t >= 0 : s_{1:t} = s~_{1:t}} under bitwise state equality.
int coupling_boundary(const Trajectory& s, const Trajectory& s_tilde);

/// Coupled conditional particle filter (CCPF with AT or AS, or CCBPF).
///
/// Forward pass: slots 1..N-1 share their initial draws, ancestor pairs come
/// from the maximal coupling of the two weight vectors, and children of equal
/// parents are equal; other children are proposed by `coupled_propose`. With
/// AS, the reference slot's ancestor pair at each step is drawn from the
/// maximal coupling of the two ancestor-sampling weight vectors. The terminal
/// pair is maximally coupled; the backward pass traces ancestors (AT, AS) or
/// draws each index pair from the maximal coupling of the two backward weight
/// vectors (BS).
class CoupledKernel {
  public:
    CoupledKernel(const Model& model, int N, Variant variant);

    /// One sweep from the pair of references. Uses only forks of `rng`.
    CoupledPair step(const Trajectory& reference, const Trajectory& reference_tilde,
                     const RandomStream& rng);

    /// Record |C_t|: slots whose parents (for t >= 2) and states agree.
    void set_diagnostics(bool on) noexcept { diagnostics_ = on; }

    [[nodiscard]] const ParticleSystem& particles() const noexcept { return ps_; }
    [[nodiscard]] const ParticleSystem& particles_tilde() const noexcept { return pt_; }
    [[nodiscard]] const Model& model() const noexcept { return model_; }
    [[nodiscard]] int particle_count() const noexcept { return N_; }
    [[nodiscard]] Variant variant() const noexcept { return variant_; }

  private:
    const Model& model_;
    int N_;
    Variant variant_;
    bool diagnostics_ = false;
    ParticleSystem ps_;
    ParticleSystem pt_;
    std::vector<int> idx_;
    std::vector<int> idx_tilde_;
    std::vector<double> scratch_;
    std::vector<double> scratch_tilde_;
    MaximalCoupling coupling_;
};

CoupledPair ccxpf_step(const Model& model, const Trajectory& reference,
                       const Trajectory& reference_tilde, int N, Variant variant,
                       const RandomStream& rng);

struct CouplingRun {
    /// First iteration n >= 1 with S_n = S~_n; empty when the cap was hit.
    std::optional<int> tau;
    int cap = 0;
    int iterations = 0;
    /// kappa_n for n = 1, 2, ...
    std::vector<int> kappa_trace;
    std::int64_t wallclock_ns = 0;
    Trajectory first;
    Trajectory second;

    [[nodiscard]] bool censored() const noexcept { return !tau.has_value(); }
};

/// Iterates the coupled kernel from (s0, s~0) until the outputs meet or `cap`
/// iterations have run. Iteration n uses `rng.fork(n)`.
CouplingRun run_until_coupled(CoupledKernel& kernel, const Trajectory& s0, const Trajectory& s0_tilde,
                              int cap, const RandomStream& rng);
CouplingRun run_until_coupled(const Model& model, const Trajectory& s0, const Trajectory& s0_tilde,
                              int N, Variant variant, int cap, const RandomStream& rng);

}  // namespace csmc
