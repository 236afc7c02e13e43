#include "csmc/unbiased.hpp"

#include "csmc/error.hpp"

namespace csmc {

namespace {

enum : std::uint64_t { kInitTilde = 11, kInitMinusOne = 12, kInitStep = 13, kIterations = 14 };

}  // namespace

void EstimatorConfig::validate() const
{
    if (burn_in < 1) throw InvalidParameter("burn-in b must be at least 1");
    if (particles < 2) throw InvalidParameter("number of particles N must be at least 2");
    if (cap < burn_in) throw InvalidParameter("iteration cap must be at least the burn-in");
    if (functions.empty()) throw InvalidParameter("at least one test function is required");
}

std::pair<Trajectory, Trajectory> initialize_chains(const Model& model, int N, Variant variant,
                                                    const RandomStream& rng)
{
    Trajectory s0_tilde = pf_trajectory(model, N, rng.fork(kInitTilde));
    const Trajectory s_minus_one = pf_trajectory(model, N, rng.fork(kInitMinusOne));
    CoupledKernel kernel(model, N, variant);
    CoupledPair half = kernel.step(s_minus_one, s_minus_one, rng.fork(kInitStep));
    return {std::move(half.first), std::move(s0_tilde)};
}

RandomStream iteration_stream(const RandomStream& rng, int n)
{
    return rng.fork(kIterations, static_cast<std::uint64_t>(n));
}

EstimatorRun unbiased_estimate(const Model& model, const EstimatorConfig& cfg, const RandomStream& rng)
{
    cfg.validate();
    EstimatorRun run;
    run.stream_key = rng.key();

    auto [s, s_tilde] = initialize_chains(model, cfg.particles, cfg.variant, rng);
    CoupledKernel kernel(model, cfg.particles, cfg.variant);
    std::vector<CompensatedSum> acc(cfg.functions.size());

    for (int n = 1; n <= cfg.cap; ++n) {
        CoupledPair pair = kernel.step(s, s_tilde, iteration_stream(rng, n));
        s = std::move(pair.first);
        s_tilde = std::move(pair.second);
        run.iterations = n;
        const bool met = pair.kappa == model.horizon();
        if (met && !run.meeting_time) run.meeting_time = n;

        if (n == cfg.burn_in) {
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j].add(cfg.functions[j](s));
        } else if (n > cfg.burn_in && !met) {
            for (std::size_t j = 0; j < acc.size(); ++j)
                acc[j].add(cfg.functions[j](s) - cfg.functions[j](s_tilde));
        }
        if (met && n >= cfg.burn_in) {
            run.z.reserve(acc.size());
            for (const auto& a : acc) run.z.push_back(a.value());
            return run;
        }
    }
    run.censored = true;
    return run;
}

}  // namespace csmc
