#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "csmc/bounds.hpp"
#include "csmc/ccxpf.hpp"
#include "csmc/error.hpp"
#include "csmc/models.hpp"
#include "fixtures.hpp"
#include "stats.hpp"

using namespace csmc;

namespace {

const Ancestry kAll[] = {Ancestry::Tracing, Ancestry::AncestorSampling, Ancestry::BackwardSampling};

struct Laws {
    std::vector<double> first, second;
};

Laws coupled_marginals(const DiscreteModel& m, const Trajectory& s, const Trajectory& st, Variant v, int N, int reps,
                       std::uint64_t seed)
{
    const auto table = exact_smoothing(m);
    CoupledKernel k(m, N, v);
    Laws out{std::vector<double>(table.probability.size(), 0.0), std::vector<double>(table.probability.size(), 0.0)};
    RandomStream root(seed);
    for (int r = 0; r < reps; ++r) {
        const auto pair = k.step(s, st, root.fork(r));
        out.first[table.index_of(pair.first)] += 1;
        out.second[table.index_of(pair.second)] += 1;
    }
    return out;
}

std::vector<double> single_law(const DiscreteModel& m, const Trajectory& s, Ancestry a, int N, int reps,
                               std::uint64_t seed)
{
    const auto table = exact_smoothing(m);
    ConditionalKernel k(m, N, a);
    std::vector<double> counts(table.probability.size(), 0.0);
    RandomStream root(seed);
    for (int r = 0; r < reps; ++r) counts[table.index_of(k.step(s, root.fork(r)))] += 1;
    return counts;
}

}  // namespace

TEST_SUITE("ccxpf")
{
    TEST_CASE("coupling boundary examples")
    {
        const auto abc = Trajectory::scalar({0, 1, 2});
        CHECK(coupling_boundary(abc, abc) == 3);
        CHECK(coupling_boundary(abc, Trajectory::scalar({0, 1, 3})) == 2);
        CHECK(coupling_boundary(Trajectory::scalar({5, 1, 2}), abc) == 0);
        CHECK_THROWS_AS(coupling_boundary(abc, Trajectory::scalar({0, 1})), InvalidInput);
    }

    TEST_CASE("equal references give bitwise-equal outputs")
    {
        const auto m = make_lgss(LgssParams{}, 30, 3);
        const auto ref = pf_trajectory(m, 16, RandomStream(1));
        for (auto a : kAll)
            for (bool crn : {true, false}) {
                CoupledKernel k(m, 16, Variant{a, crn});
                for (std::uint64_t s = 0; s < 20; ++s) {
                    const auto pair = k.step(ref, ref, RandomStream(s));
                    REQUIRE(pair.first == pair.second);
                    REQUIRE(pair.kappa == 30);
                    REQUIRE(pair.coupled());
                }
                const auto run = run_until_coupled(m, ref, ref, 16, Variant{a, crn}, 5, RandomStream(9));
                CHECK(run.tau == 1);
            }
    }

    TEST_CASE("capability and parameter errors")
    {
        const auto m = testing::sticky3(3);
        const testing::WithoutDensities hidden(m);
        CHECK_THROWS_AS(CoupledKernel(hidden, 4, Variant{Ancestry::BackwardSampling, true}), CapabilityError);
        CHECK_THROWS_AS(CoupledKernel(hidden, 4, Variant{Ancestry::AncestorSampling, true}), CapabilityError);
        CHECK_NOTHROW(CoupledKernel(hidden, 4, Variant{Ancestry::Tracing, true}));
        CHECK_THROWS_AS(CoupledKernel(m, 1, Variant{}), InvalidParameter);
        const auto ref = Trajectory::scalar({0, 0, 0});
        CHECK_THROWS_AS(run_until_coupled(m, ref, ref, 4, Variant{}, 0, RandomStream(1)), InvalidParameter);
    }

    TEST_CASE("coupled sweeps are deterministic")
    {
        const auto m = make_lgss(LgssParams{}, 25, 4);
        const auto a = pf_trajectory(m, 8, RandomStream(1));
        const auto b = pf_trajectory(m, 8, RandomStream(2));
        for (auto v : kAll) {
            const auto p1 = ccxpf_step(m, a, b, 8, Variant{v, true}, RandomStream(3));
            const auto p2 = ccxpf_step(m, a, b, 8, Variant{v, true}, RandomStream(3));
            CHECK(p1.first == p2.first);
            CHECK(p1.second == p2.second);
        }
    }

    TEST_CASE("marginals coincide with the single-chain kernels")
    {
        const auto m = testing::sticky3(4);
        const auto s = Trajectory::scalar({0, 1, 2, 0});
        const auto st = Trajectory::scalar({2, 2, 1, 1});
        const int reps = 100000;
        const auto bs_s = single_law(m, s, Ancestry::BackwardSampling, 8, reps, 100);
        const auto bs_st = single_law(m, st, Ancestry::BackwardSampling, 8, reps, 101);
        const auto at_s = single_law(m, s, Ancestry::Tracing, 8, reps, 102);
        const auto at_st = single_law(m, st, Ancestry::Tracing, 8, reps, 103);

        SUBCASE("BS with common random numbers")
        {
            const auto laws = coupled_marginals(m, s, st, Variant{Ancestry::BackwardSampling, true}, 8, reps, 1);
            CHECK(testing::tv_between_counts(laws.first, bs_s) < 0.02);
            CHECK(testing::tv_between_counts(laws.second, bs_st) < 0.02);
        }
        SUBCASE("BS with independent proposals")
        {
            const auto laws = coupled_marginals(m, s, st, Variant{Ancestry::BackwardSampling, false}, 8, reps, 2);
            CHECK(testing::tv_between_counts(laws.first, bs_s) < 0.02);
            CHECK(testing::tv_between_counts(laws.second, bs_st) < 0.02);
        }
        SUBCASE("AT")
        {
            const auto laws = coupled_marginals(m, s, st, Variant{Ancestry::Tracing, true}, 8, reps, 3);
            CHECK(testing::tv_between_counts(laws.first, at_s) < 0.02);
            CHECK(testing::tv_between_counts(laws.second, at_st) < 0.02);
        }
        SUBCASE("AS matches backward sampling in law")
        {
            const auto laws = coupled_marginals(m, s, st, Variant{Ancestry::AncestorSampling, true}, 8, reps, 4);
            CHECK(testing::tv_between_counts(laws.first, bs_s) < 0.02);
            CHECK(testing::tv_between_counts(laws.second, bs_st) < 0.02);
        }
    }

    TEST_CASE("distinct references couple within the cap and stay coupled")
    {
        const auto m = testing::sticky3(4);
        const auto s = Trajectory::scalar({0, 0, 0, 0});
        const auto st = Trajectory::scalar({2, 2, 2, 2});
        CoupledKernel k(m, 8, Variant{Ancestry::BackwardSampling, true});
        int progressed = 0, steps = 0;
        for (int r = 0; r < 1000; ++r) {
            const auto run = run_until_coupled(k, s, st, 200, RandomStream(r));
            REQUIRE(run.tau.has_value());
            for (std::size_t n = 1; n < run.kappa_trace.size(); ++n) {
                ++steps;
                progressed += run.kappa_trace[n] > run.kappa_trace[n - 1];
            }
            progressed += run.kappa_trace.front() > 0;
            ++steps;
            // absorption
            auto a = run.first, b = run.second;
            REQUIRE(a == b);
            for (int n = 0; n < 3; ++n) {
                auto pair = k.step(a, b, RandomStream(r).fork(7, n));
                REQUIRE(pair.first == pair.second);
                a = pair.first;
                b = pair.second;
            }
        }
        CHECK(progressed > 0);
        CHECK(steps > 0);
    }

    TEST_CASE("diagnostics count coupled slots")
    {
        const auto m = testing::sticky3(6);
        const auto s = Trajectory::scalar({0, 0, 0, 0, 0, 0});
        const auto st = Trajectory::scalar({1, 1, 1, 1, 1, 1});
        CoupledKernel k(m, 10, Variant{});
        k.set_diagnostics(true);
        for (std::uint64_t r = 0; r < 50; ++r) {
            const auto pair = k.step(s, st, RandomStream(r));
            REQUIRE(pair.coupled_counts.size() == 6);
            CHECK(pair.coupled_counts[0] == 9);
            for (int c : pair.coupled_counts) CHECK((c >= 0 && c <= 10));
        }
        const auto same = k.step(s, s, RandomStream(1));
        for (int c : same.coupled_counts) CHECK(c == 10);
        k.set_diagnostics(false);
        CHECK(k.step(s, st, RandomStream(1)).coupled_counts.empty());
    }

    TEST_CASE("boundary increments dominate the simulated chain")
    {
        const auto m = testing::sticky3(4);
        const auto mc = *m.mixing_constants();
        const int N = 16, T = 4, reps = 20000;
        CoupledKernel k(m, N, Variant{Ancestry::BackwardSampling, true});
        RandomStream root(55);
        for (int prefix = 0; prefix < T; ++prefix) {
            std::vector<double> a(T, 0.0), b(T, 0.0);
            for (int t = 0; t < T; ++t) {
                a[t] = t < prefix ? 1.0 : 0.0;
                b[t] = t < prefix ? 1.0 : 2.0;
            }
            const auto s = Trajectory::scalar(a), st = Trajectory::scalar(b);
            REQUIRE(coupling_boundary(s, st) == prefix);
            std::vector<int> inc(reps), dom(reps);
            RandomStream chain = root.fork(1000 + prefix);
            for (int r = 0; r < reps; ++r) {
                inc[r] = k.step(s, st, root.fork(prefix, r)).kappa - prefix;
                dom[r] = std::min(simulate_delta(N, mc.delta, mc.epsilon, chain), T - prefix);
            }
            const auto fi = testing::ecdf(inc, -T, T);
            const auto fd = testing::ecdf(dom, -T, T);
            for (int x = -T; x <= T; ++x) {
                const double band = 3.0 * std::sqrt((fi.at(x) * (1 - fi.at(x)) + fd.at(x) * (1 - fd.at(x))) / reps);
                CHECK(fi.at(x) <= fd.at(x) + band + 1e-12);
            }
        }
    }
}
