#include "csmc/cxpf.hpp"

#include <string>

#include "csmc/sampling.hpp"
#include "kernel_common.hpp"

namespace csmc {

using namespace detail;

std::string_view to_string(Ancestry a) noexcept
{
    switch (a) {
    case Ancestry::Tracing: return "AT";
    case Ancestry::AncestorSampling: return "AS";
    case Ancestry::BackwardSampling: return "BS";
    }
    return "?";
}

Ancestry parse_ancestry(std::string_view name)
{
    if (name == "AT") return Ancestry::Tracing;
    if (name == "AS") return Ancestry::AncestorSampling;
    if (name == "BS") return Ancestry::BackwardSampling;
    throw InvalidParameter("unknown variant '" + std::string(name) + "' (expected AT, AS or BS)");
}

void ParticleSystem::resize(int horizon, int particles, int state_dim)
{
    T = horizon;
    N = particles;
    dim = state_dim;
    const auto tn = static_cast<std::size_t>(T) * static_cast<std::size_t>(N);
    states.resize(tn * static_cast<std::size_t>(dim));
    weights.resize(tn);
    ancestors.assign(tn, 0);
}

Trajectory ParticleSystem::extract(std::span<const int> indices) const
{
    Trajectory out(T, dim);
    for (int t = 0; t < T; ++t) copy_state(state(t, indices[static_cast<std::size_t>(t)]), out[t]);
    return out;
}

ConditionalKernel::ConditionalKernel(const Model& model, int N, Ancestry ancestry)
    : model_(model), N_(N), ancestry_(ancestry)
{
    if (N < 2) throw InvalidParameter("conditional particle filters need N >= 2");
    if (ancestry == Ancestry::AncestorSampling)
        throw InvalidParameter("the single-chain kernel supports AT and BS only");
    if (ancestry == Ancestry::BackwardSampling && !model.has_transition_density())
        throw CapabilityError("backward sampling requires transition densities");
}

Trajectory ConditionalKernel::step(const Trajectory& reference, const RandomStream& rng)
{
    check_reference(model_, reference);
    const int T = model_.horizon();
    ps_.resize(T, N_, model_.state_dim());
    indices_.assign(static_cast<std::size_t>(T), 0);
    scratch_.resize(static_cast<std::size_t>(N_));

    const RandomStream init = rng.fork(kInitial);
    copy_state(reference[0], ps_.state(0, 0));
    for (int i = 1; i < N_; ++i) {
        RandomStream s = init.fork(static_cast<std::uint64_t>(i));
        model_.sample_initial(s, ps_.state(0, i));
    }
    compute_weights(model_, ps_, 0);

    CumulativeWeights table;
    for (int t = 1; t < T; ++t) {
        table.assign(ps_.weights_at(t - 1), t - 1);
        RandomStream res = rng.fork(kResample, static_cast<std::uint64_t>(t));
        const RandomStream prop = rng.fork(kPropose, static_cast<std::uint64_t>(t));
        ps_.ancestor(t, 0) = 0;
        copy_state(reference[t], ps_.state(t, 0));
        for (int i = 1; i < N_; ++i) {
            const int a = table.draw(res);
            ps_.ancestor(t, i) = a;
            RandomStream s = prop.fork(static_cast<std::uint64_t>(i));
            model_.sample_transition(t, ps_.state(t - 1, a), s, ps_.state(t, i));
        }
        compute_weights(model_, ps_, t);
    }

    RandomStream term = rng.fork(kTerminal);
    table.assign(ps_.weights_at(T - 1), T - 1);
    indices_[static_cast<std::size_t>(T - 1)] = table.draw(term);
    for (int t = T - 2; t >= 0; --t) {
        const int next = indices_[static_cast<std::size_t>(t + 1)];
        if (ancestry_ == Ancestry::BackwardSampling) {
            backward_weights(model_, ps_, t, ps_.state(t + 1, next), scratch_);
            table.assign(scratch_, t);
            RandomStream b = rng.fork(kBackward, static_cast<std::uint64_t>(t));
            indices_[static_cast<std::size_t>(t)] = table.draw(b);
        } else {
            indices_[static_cast<std::size_t>(t)] = ps_.ancestor(t + 1, next);
        }
    }
    return ps_.extract(indices_);
}

Trajectory cxpf_step(const Model& model, const Trajectory& reference, int N, Ancestry ancestry,
                     const RandomStream& rng)
{
    ConditionalKernel kernel(model, N, ancestry);
    return kernel.step(reference, rng);
}

Trajectory pf_trajectory(const Model& model, int N, const RandomStream& rng)
{
    if (N < 1) throw InvalidParameter("particle filter needs N >= 1");
    const int T = model.horizon();
    ParticleSystem ps;
    ps.resize(T, N, model.state_dim());

    const RandomStream init = rng.fork(kInitial);
    for (int i = 0; i < N; ++i) {
        RandomStream s = init.fork(static_cast<std::uint64_t>(i));
        model.sample_initial(s, ps.state(0, i));
    }
    compute_weights(model, ps, 0);

    CumulativeWeights table;
    for (int t = 1; t < T; ++t) {
        table.assign(ps.weights_at(t - 1), t - 1);
        RandomStream res = rng.fork(kResample, static_cast<std::uint64_t>(t));
        const RandomStream prop = rng.fork(kPropose, static_cast<std::uint64_t>(t));
        for (int i = 0; i < N; ++i) {
            const int a = table.draw(res);
            ps.ancestor(t, i) = a;
            RandomStream s = prop.fork(static_cast<std::uint64_t>(i));
            model.sample_transition(t, ps.state(t - 1, a), s, ps.state(t, i));
        }
        compute_weights(model, ps, t);
    }

    std::vector<int> idx(static_cast<std::size_t>(T));
    RandomStream term = rng.fork(kTerminal);
    table.assign(ps.weights_at(T - 1), T - 1);
    idx[static_cast<std::size_t>(T - 1)] = table.draw(term);
    for (int t = T - 2; t >= 0; --t)
        idx[static_cast<std::size_t>(t)] = ps.ancestor(t + 1, idx[static_cast<std::size_t>(t + 1)]);
    return ps.extract(idx);
}

}  // namespace csmc
