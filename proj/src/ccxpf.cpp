#include "csmc/ccxpf.hpp"

#include <chrono>
#include <tuple>

#include "kernel_common.hpp"

namespace csmc {

using namespace detail;

int coupling_boundary(const Trajectory& s, const Trajectory& s_tilde)
{
    if (s.length() != s_tilde.length() || s.dim() != s_tilde.dim())
        throw InvalidInput("trajectories must have equal lengths to compare");
    int k = 0;
    while (k < s.length() && same_state(s[k], s_tilde[k])) ++k;
    return k;
}

CoupledKernel::CoupledKernel(const Model& model, int N, Variant variant)
    : model_(model), N_(N), variant_(variant)
{
    if (N < 2) throw InvalidParameter("coupled conditional particle filters need N >= 2");
    if (variant.ancestry != Ancestry::Tracing && !model.has_transition_density())
        throw CapabilityError("ancestor and backward sampling require transition densities");
}

CoupledPair CoupledKernel::step(const Trajectory& reference, const Trajectory& reference_tilde,
                                const RandomStream& rng)
{
    check_reference(model_, reference);
    check_reference(model_, reference_tilde);
    const int T = model_.horizon();
    const int dim = model_.state_dim();
    const ProposalMode mode = variant_.proposal_mode();
    ps_.resize(T, N_, dim);
    pt_.resize(T, N_, dim);
    idx_.assign(static_cast<std::size_t>(T), 0);
    idx_tilde_.assign(static_cast<std::size_t>(T), 0);
    scratch_.resize(static_cast<std::size_t>(N_));
    scratch_tilde_.resize(static_cast<std::size_t>(N_));

    CoupledPair out;
    if (diagnostics_) out.coupled_counts.assign(static_cast<std::size_t>(T), 0);

    // t = 1: shared initial particles
    const RandomStream init = rng.fork(kInitial);
    copy_state(reference[0], ps_.state(0, 0));
    copy_state(reference_tilde[0], pt_.state(0, 0));
    for (int i = 1; i < N_; ++i) {
        RandomStream s = init.fork(static_cast<std::uint64_t>(i));
        model_.sample_initial(s, ps_.state(0, i));
        copy_state(ps_.state(0, i), pt_.state(0, i));
    }
    compute_weights_pair(model_, ps_, pt_, 0);
    if (diagnostics_) {
        int c = 0;
        for (int i = 0; i < N_; ++i) c += same_state(ps_.state(0, i), pt_.state(0, i));
        out.coupled_counts[0] = c;
    }

    for (int t = 1; t < T; ++t) {
        coupling_.assign(ps_.weights_at(t - 1), pt_.weights_at(t - 1), t - 1);
        RandomStream res = rng.fork(kResample, static_cast<std::uint64_t>(t));
        for (int i = 1; i < N_; ++i) {
            const auto [a, b] = coupling_.draw(res);
            ps_.ancestor(t, i) = a;
            pt_.ancestor(t, i) = b;
        }

        if (variant_.ancestry == Ancestry::AncestorSampling) {
            backward_weights_pair(model_, ps_, pt_, t - 1, reference[t], reference_tilde[t], scratch_,
                                  scratch_tilde_);
            coupling_.assign(scratch_, scratch_tilde_, t - 1);
            RandomStream as = rng.fork(kReferenceAncestor, static_cast<std::uint64_t>(t));
            const auto [a, b] = coupling_.draw(as);
            ps_.ancestor(t, 0) = a;
            pt_.ancestor(t, 0) = b;
        } else {
            ps_.ancestor(t, 0) = 0;
            pt_.ancestor(t, 0) = 0;
        }
        copy_state(reference[t], ps_.state(t, 0));
        copy_state(reference_tilde[t], pt_.state(t, 0));

        const RandomStream prop = rng.fork(kPropose, static_cast<std::uint64_t>(t));
        for (int i = 1; i < N_; ++i)
            coupled_propose(model_, t, ps_.parent(t, i), pt_.parent(t, i), mode,
                            prop.fork(static_cast<std::uint64_t>(i)), ps_.state(t, i), pt_.state(t, i));

        compute_weights_pair(model_, ps_, pt_, t);
        if (diagnostics_) {
            int c = 0;
            for (int i = 0; i < N_; ++i)
                c += same_state(ps_.parent(t, i), pt_.parent(t, i)) &&
                     same_state(ps_.state(t, i), pt_.state(t, i));
            out.coupled_counts[static_cast<std::size_t>(t)] = c;
        }
    }

    coupling_.assign(ps_.weights_at(T - 1), pt_.weights_at(T - 1), T - 1);
    RandomStream term = rng.fork(kTerminal);
    std::tie(idx_[static_cast<std::size_t>(T - 1)], idx_tilde_[static_cast<std::size_t>(T - 1)]) =
        coupling_.draw(term);

    for (int t = T - 2; t >= 0; --t) {
        const auto ut = static_cast<std::size_t>(t);
        const int next = idx_[ut + 1];
        const int next_tilde = idx_tilde_[ut + 1];
        if (variant_.ancestry == Ancestry::BackwardSampling) {
            backward_weights_pair(model_, ps_, pt_, t, ps_.state(t + 1, next), pt_.state(t + 1, next_tilde),
                                  scratch_, scratch_tilde_);
            coupling_.assign(scratch_, scratch_tilde_, t);
            RandomStream b = rng.fork(kBackward, static_cast<std::uint64_t>(t));
            std::tie(idx_[ut], idx_tilde_[ut]) = coupling_.draw(b);
        } else {
            idx_[ut] = ps_.ancestor(t + 1, next);
            idx_tilde_[ut] = pt_.ancestor(t + 1, next_tilde);
        }
    }

    out.first = ps_.extract(idx_);
    out.second = pt_.extract(idx_tilde_);
    out.kappa = coupling_boundary(out.first, out.second);
    return out;
}

CoupledPair ccxpf_step(const Model& model, const Trajectory& reference,
                       const Trajectory& reference_tilde, int N, Variant variant,
                       const RandomStream& rng)
{
    CoupledKernel kernel(model, N, variant);
    return kernel.step(reference, reference_tilde, rng);
}

CouplingRun run_until_coupled(CoupledKernel& kernel, const Trajectory& s0, const Trajectory& s0_tilde,
                              int cap, const RandomStream& rng)
{
    if (cap < 1) throw InvalidParameter("iteration cap must be at least 1");
    const auto start = std::chrono::steady_clock::now();
    CouplingRun run;
    run.cap = cap;
    run.first = s0;
    run.second = s0_tilde;
    for (int n = 1; n <= cap; ++n) {
        CoupledPair pair = kernel.step(run.first, run.second, rng.fork(static_cast<std::uint64_t>(n)));
        run.iterations = n;
        run.kappa_trace.push_back(pair.kappa);
        run.first = std::move(pair.first);
        run.second = std::move(pair.second);
        if (pair.kappa == kernel.model().horizon()) {
            run.tau = n;
            break;
        }
    }
    run.wallclock_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
    return run;
}

CouplingRun run_until_coupled(const Model& model, const Trajectory& s0, const Trajectory& s0_tilde,
                              int N, Variant variant, int cap, const RandomStream& rng)
{
    CoupledKernel kernel(model, N, variant);
    return run_until_coupled(kernel, s0, s0_tilde, cap, rng);
}

}  // namespace csmc
