#pragma once

#include <bit>
#include <cstring>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csmc/error.hpp"
#include "csmc/random.hpp"

namespace csmc {

enum class StateKind { Discrete, Real };

/// Strong-mixing constants of a Feynman-Kac model.
///
/// Per-time bounds are indexed by 0-based time. `m_lower[0]`/`m_upper[0]` are
/// unused (there is no transition into the first state) and are stored as 1.
struct MixingConstants {
    std::vector<double> g_lower;
    std::vector<double> g_upper;
    std::vector<double> m_lower;
    std::vector<double> m_upper;
    double delta = 1.0;
    double epsilon = 1.0;

    /// Builds the constants from per-time bounds.
    ///
    /// delta   = min_t G_*(t)/G^*(t)
    /// epsilon = min_{t<T-1} [G_*(t)/G^*(t)] [M_*(t+1)/M^*(t+1)] [G_*(t+1)/G^*(t+1)]
    ///
    /// The transition factor is dropped when transitions do not depend on the
    /// previous state, and the second potential factor is dropped when
    /// potentials depend only on the current state. With a single time step
    /// epsilon equals delta.
    static MixingConstants from_bounds(std::vector<double> g_lower, std::vector<double> g_upper,
                                       std::vector<double> m_lower, std::vector<double> m_upper,
                                       bool potential_current_only, bool transition_ignores_prev);
};

/// A state trajectory x_{1:T}; each state is a `dim`-vector of doubles.
/// Discrete labels are stored as exact integer-valued doubles.
class Trajectory {
  public:
    Trajectory() = default;
    Trajectory(int length, int dim) : dim_(dim), data_(static_cast<std::size_t>(length) * dim) {}
    Trajectory(std::vector<double> data, int dim) : dim_(dim), data_(std::move(data))
    {
        if (dim <= 0 || data_.size() % static_cast<std::size_t>(dim) != 0)
            throw InvalidInput("trajectory data size is not a multiple of the state dimension");
    }

    /// Scalar-state convenience constructor.
    static Trajectory scalar(std::vector<double> values) { return Trajectory(std::move(values), 1); }

    [[nodiscard]] int length() const noexcept
    {
        return static_cast<int>(data_.size() / static_cast<std::size_t>(dim_));
    }
    [[nodiscard]] int dim() const noexcept { return dim_; }

    [[nodiscard]] std::span<const double> operator[](int t) const noexcept
    {
        return {data_.data() + static_cast<std::size_t>(t) * dim_, static_cast<std::size_t>(dim_)};
    }
    [[nodiscard]] std::span<double> operator[](int t) noexcept
    {
        return {data_.data() + static_cast<std::size_t>(t) * dim_, static_cast<std::size_t>(dim_)};
    }

    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

    /// Bitwise equality of all states.
    friend bool operator==(const Trajectory& a, const Trajectory& b) noexcept
    {
        return a.dim_ == b.dim_ && a.data_.size() == b.data_.size() &&
               (a.data_.empty() ||
                std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(double)) == 0);
    }

  private:
    int dim_ = 1;
    std::vector<double> data_;
};

inline bool same_state(std::span<const double> a, std::span<const double> b) noexcept
{
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
    return true;
}

/// A Feynman-Kac model
///
///   gamma_T(x_{1:T}) = M_1(x_1) G_1(x_1) prod_{t>=2} M_t(x_{t-1}, x_t) G_t(x_{t-1}, x_t)
///
/// Time indices in this interface are 0-based: `t = 0` is the initial step,
/// for which `prev` is an empty span. Implementations are immutable after
/// construction and may be shared between threads; all randomness comes from
/// the caller's stream.
///
/// Samplers must consume base draws (uniforms/normals) from the stream in a
/// way that does not depend on the previous state, so that two copies of one
/// stream give common random numbers when driven from different parents.
class Model {
  public:
    virtual ~Model() = default;

    [[nodiscard]] virtual int horizon() const noexcept = 0;
    [[nodiscard]] virtual int state_dim() const noexcept { return 1; }
    [[nodiscard]] virtual StateKind state_kind() const noexcept = 0;

    virtual void sample_initial(RandomStream& rng, std::span<double> x) const = 0;
    virtual void sample_transition(int t, std::span<const double> prev, RandomStream& rng,
                                   std::span<double> x) const = 0;

    [[nodiscard]] virtual bool has_transition_density() const noexcept { return false; }
    [[nodiscard]] virtual double transition_density(int t, std::span<const double> prev,
                                                    std::span<const double> x) const;

    /// G_t(prev, x) >= 0.
    [[nodiscard]] virtual double potential(int t, std::span<const double> prev,
                                           std::span<const double> x) const = 0;
    [[nodiscard]] virtual bool potential_depends_only_on_current() const noexcept { return false; }

    /// When true, particle filters evaluate `log_potential` and
    /// `log_transition_density` and convert to linear weights per time step.
    [[nodiscard]] virtual bool uses_log_weights() const noexcept { return false; }
    [[nodiscard]] virtual double log_potential(int t, std::span<const double> prev,
                                               std::span<const double> x) const;
    [[nodiscard]] virtual double log_transition_density(int t, std::span<const double> prev,
                                                        std::span<const double> x) const;

    /// G^* when the potentials are known to be bounded.
    [[nodiscard]] virtual std::optional<double> potential_upper_bound() const { return std::nullopt; }
    [[nodiscard]] virtual std::optional<MixingConstants> mixing_constants() const { return std::nullopt; }
};

/// Product of potentials along a trajectory; zero means the trajectory has no
/// mass under the model and cannot serve as a reference.
double potential_product(const Model& model, const Trajectory& x);

/// Throws InvalidReference unless `x` has the model's horizon and dimension and
/// a strictly positive potential product.
void check_reference(const Model& model, const Trajectory& x);

}  // namespace csmc
