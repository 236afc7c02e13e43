#include "csmc/models.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace csmc {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double x, double mean, double sd)
{
    const double z = (x - mean) / sd;
    return kInvSqrt2Pi / sd * std::exp(-0.5 * z * z);
}

void require_positive_sd(double sd, const char* name)
{
    if (!(sd > 0.0) || !std::isfinite(sd))
        throw InvalidParameter(std::string(name) + " must be a positive finite number");
}

constexpr std::uint64_t kDataStream = 0x4c475353;  // "LGSS"

}  // namespace

// ---------------------------------------------------------------------------
// LGSS

LgssModel::LgssModel(LgssParams params, std::vector<double> observations)
    : params_(params), y_(std::move(observations))
{
    require_positive_sd(params_.state_sd, "state noise sd");
    require_positive_sd(params_.obs_sd, "observation noise sd");
    require_positive_sd(params_.initial_sd(), "initial sd");
    if (!std::isfinite(params_.ar)) throw InvalidParameter("ar coefficient must be finite");
    if (y_.empty()) throw InvalidParameter("horizon T must be at least 1");
}

void LgssModel::sample_initial(RandomStream& rng, std::span<double> x) const
{
    x[0] = params_.initial_sd() * rng.normal();
}

void LgssModel::sample_transition(int, std::span<const double> prev, RandomStream& rng,
                                  std::span<double> x) const
{
    x[0] = params_.ar * prev[0] + params_.state_sd * rng.normal();
}

double LgssModel::transition_density(int, std::span<const double> prev,
                                     std::span<const double> x) const
{
    return normal_pdf(x[0], params_.ar * prev[0], params_.state_sd);
}

double LgssModel::potential(int t, std::span<const double>, std::span<const double> x) const
{
    return normal_pdf(y_[static_cast<std::size_t>(t)], x[0], params_.obs_sd);
}

std::optional<double> LgssModel::potential_upper_bound() const
{
    return kInvSqrt2Pi / params_.obs_sd;
}

std::vector<double> simulate_lgss_states(const LgssParams& params, int T, std::uint64_t seed)
{
    if (T < 1) throw InvalidParameter("horizon T must be at least 1");
    require_positive_sd(params.state_sd, "state noise sd");
    require_positive_sd(params.obs_sd, "observation noise sd");
    require_positive_sd(params.initial_sd(), "initial sd");
    RandomStream rng = RandomStream(seed).fork(kDataStream);
    std::vector<double> x(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        // state noise then observation noise, so prefixes agree across T
        const double e = rng.normal();
        x[t] = t == 0 ? params.initial_sd() * e : params.ar * x[t - 1] + params.state_sd * e;
        (void)rng.normal();
    }
    return x;
}

LgssModel make_lgss(const LgssParams& params, int T, std::uint64_t seed)
{
    if (T < 1) throw InvalidParameter("horizon T must be at least 1");
    require_positive_sd(params.state_sd, "state noise sd");
    require_positive_sd(params.obs_sd, "observation noise sd");
    require_positive_sd(params.initial_sd(), "initial sd");
    RandomStream rng = RandomStream(seed).fork(kDataStream);
    std::vector<double> y(static_cast<std::size_t>(T));
    double x = 0.0;
    for (int t = 0; t < T; ++t) {
        const double e = rng.normal();
        x = t == 0 ? params.initial_sd() * e : params.ar * x + params.state_sd * e;
        y[t] = x + params.obs_sd * rng.normal();
    }
    return LgssModel(params, std::move(y));
}

// ---------------------------------------------------------------------------
// Homogeneous random walk with indicator potentials

HomogeneousModel::HomogeneousModel(double s, int T) : s_(s), T_(T)
{
    if (!(s > 0.0)) throw InvalidParameter("half-width s must be positive");
    if (T < 1) throw InvalidParameter("horizon T must be at least 1");
}

void HomogeneousModel::sample_initial(RandomStream& rng, std::span<double> x) const
{
    x[0] = rng.normal();
}

void HomogeneousModel::sample_transition(int, std::span<const double> prev, RandomStream& rng,
                                         std::span<double> x) const
{
    x[0] = prev[0] + rng.normal();
}

double HomogeneousModel::transition_density(int, std::span<const double> prev,
                                            std::span<const double> x) const
{
    return normal_pdf(x[0], prev[0], 1.0);
}

double HomogeneousModel::potential(int, std::span<const double>, std::span<const double> x) const
{
    return std::abs(x[0]) <= s_ ? 1.0 : 0.0;
}

HomogeneousModel make_homogeneous(double s, int T) { return HomogeneousModel(s, T); }

// ---------------------------------------------------------------------------
// Discrete model

namespace {

std::vector<double> cumulative(std::span<const double> p)
{
    std::vector<double> c(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) c[i] = acc += p[i];
    return c;
}

void check_distribution(std::span<const double> p, const char* what)
{
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidParameter(std::string(what) + " has a negative or non-finite entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidParameter(std::string(what) + " does not sum to 1");
}

}  // namespace

DiscreteModel::DiscreteModel(int K, std::vector<double> initial, std::vector<double> transition,
                             std::vector<double> potentials, int T)
    : K_(K), T_(T), initial_(std::move(initial)), transition_(std::move(transition)),
      potentials_(std::move(potentials))
{
    if (K < 1) throw InvalidParameter("number of states K must be at least 1");
    if (T < 1) throw InvalidParameter("horizon T must be at least 1");
    const auto k = static_cast<std::size_t>(K);
    if (initial_.empty()) initial_.assign(k, 1.0 / K);
    if (initial_.size() != k) throw InvalidParameter("initial distribution must have K entries");
    if (transition_.size() != k * k) throw InvalidParameter("transition matrix must be K x K");
    if (potentials_.size() != k && potentials_.size() != k * static_cast<std::size_t>(T))
        throw InvalidParameter("potential table must have K or T*K entries");

    check_distribution(initial_, "initial distribution");
    for (std::size_t r = 0; r < k; ++r)
        check_distribution(std::span(transition_).subspan(r * k, k), "transition matrix row");
    for (double g : potentials_)
        if (!(g > 0.0) || !std::isfinite(g))
            throw InvalidParameter("potentials must be strictly positive and finite");

    initial_cdf_ = cumulative(initial_);
    transition_cdf_.resize(k * k);
    for (std::size_t r = 0; r < k; ++r) {
        const auto row = cumulative(std::span(transition_).subspan(r * k, k));
        std::copy(row.begin(), row.end(), transition_cdf_.begin() + static_cast<std::ptrdiff_t>(r * k));
    }
}

int DiscreteModel::draw(std::span<const double> cdf, RandomStream& rng) const
{
    const double u = rng.uniform() * cdf.back();
    for (int k = 0; k + 1 < K_; ++k)
        if (u < cdf[k]) return k;
    return K_ - 1;
}

void DiscreteModel::sample_initial(RandomStream& rng, std::span<double> x) const
{
    x[0] = draw(initial_cdf_, rng);
}

void DiscreteModel::sample_transition(int, std::span<const double> prev, RandomStream& rng,
                                      std::span<double> x) const
{
    const auto row = static_cast<std::size_t>(prev[0]) * K_;
    x[0] = draw(std::span(transition_cdf_).subspan(row, static_cast<std::size_t>(K_)), rng);
}

double DiscreteModel::transition_density(int, std::span<const double> prev,
                                         std::span<const double> x) const
{
    return transition_probability(static_cast<int>(prev[0]), static_cast<int>(x[0]));
}

double DiscreteModel::potential(int t, std::span<const double>, std::span<const double> x) const
{
    return potential_value(t, static_cast<int>(x[0]));
}

std::optional<double> DiscreteModel::potential_upper_bound() const
{
    double g = 0.0;
    for (double v : potentials_) g = std::max(g, v);
    return g;
}

std::optional<MixingConstants> DiscreteModel::mixing_constants() const
{
    double m_lo = transition_.front();
    double m_hi = transition_.front();
    for (double p : transition_) {
        m_lo = std::min(m_lo, p);
        m_hi = std::max(m_hi, p);
    }
    if (!(m_lo > 0.0)) return std::nullopt;

    bool rows_identical = true;
    for (int r = 1; r < K_ && rows_identical; ++r)
        for (int c = 0; c < K_; ++c)
            if (transition_probability(r, c) != transition_probability(0, c)) {
                rows_identical = false;
                break;
            }

    const auto T = static_cast<std::size_t>(T_);
    std::vector<double> g_lo(T), g_hi(T), mlo(T, m_lo), mhi(T, m_hi);
    for (int t = 0; t < T_; ++t) {
        g_lo[t] = g_hi[t] = potential_value(t, 0);
        for (int k = 1; k < K_; ++k) {
            g_lo[t] = std::min(g_lo[t], potential_value(t, k));
            g_hi[t] = std::max(g_hi[t], potential_value(t, k));
        }
    }
    return MixingConstants::from_bounds(std::move(g_lo), std::move(g_hi), std::move(mlo),
                                        std::move(mhi), true, rows_identical);
}

DiscreteModel make_discrete(int K, std::vector<double> transition, std::vector<double> potentials,
                            int T, std::vector<double> initial)
{
    return DiscreteModel(K, std::move(initial), std::move(transition), std::move(potentials), T);
}

// ---------------------------------------------------------------------------
// Exact smoothing by enumeration

std::size_t SmoothingTable::index_of(const Trajectory& x) const
{
    std::size_t idx = 0;
    for (int t = 0; t < T; ++t) idx = idx * static_cast<std::size_t>(K) + static_cast<std::size_t>(x[t][0]);
    return idx;
}

Trajectory SmoothingTable::trajectory(std::size_t index) const
{
    Trajectory x(T, 1);
    for (int t = T - 1; t >= 0; --t) {
        x[t][0] = static_cast<double>(index % static_cast<std::size_t>(K));
        index /= static_cast<std::size_t>(K);
    }
    return x;
}

std::vector<double> SmoothingTable::marginal(int t) const
{
    std::vector<double> m(static_cast<std::size_t>(K), 0.0);
    for (std::size_t i = 0; i < probability.size(); ++i) m[static_cast<std::size_t>(trajectory(i)[t][0])] += probability[i];
    return m;
}

SmoothingTable exact_smoothing(const DiscreteModel& model)
{
    const int K = model.states();
    const int T = model.horizon();
    double size = 1.0;
    for (int t = 0; t < T; ++t) {
        size *= K;
        if (size > 1e6) throw CapacityError("K^T exceeds the enumeration limit of 10^6 trajectories");
    }

    SmoothingTable table;
    table.K = K;
    table.T = T;
    table.probability.resize(static_cast<std::size_t>(size));
    // gamma for each prefix, reusing the parent prefix value
    std::vector<double> gamma(1, 1.0);
    for (int t = 0; t < T; ++t) {
        std::vector<double> next(gamma.size() * static_cast<std::size_t>(K));
        for (std::size_t p = 0; p < gamma.size(); ++p) {
            const int prev = static_cast<int>(p % static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k) {
                const double m = t == 0 ? model.initial_probability(k) : model.transition_probability(prev, k);
                next[p * static_cast<std::size_t>(K) + k] = gamma[p] * m * model.potential_value(t, k);
            }
        }
        gamma = std::move(next);
    }
    double c = 0.0;
    for (double g : gamma) c += g;
    if (!(c > 0.0)) throw DegenerateModel("normalising constant is zero");
    for (std::size_t i = 0; i < gamma.size(); ++i) table.probability[i] = gamma[i] / c;
    table.normalizer = c;
    return table;
}

// ---------------------------------------------------------------------------
// Observation CSV

void write_observations_csv(std::ostream& out, std::span<const double> y)
{
    out << "t,y\n";
    char buf[64];
    for (std::size_t t = 0; t < y.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%.17g", y[t]);
        out << (t + 1) << ',' << buf << '\n';
    }
}

std::vector<double> read_observations_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("observation CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,y") throw InvalidInput("observation CSV header must be 't,y'");
    std::vector<double> y;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidInput("malformed observation row: " + line);
        long t = 0;
        double v = 0.0;
        try {
            t = std::stol(line.substr(0, comma));
            v = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw InvalidInput("malformed observation row: " + line);
        }
        if (t != static_cast<long>(y.size()) + 1) throw InvalidInput("observation rows must have t = 1, 2, ...");
        y.push_back(v);
    }
    return y;
}

}  // namespace csmc
