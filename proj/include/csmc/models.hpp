#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "csmc/model.hpp"

namespace csmc {

struct LgssParams {
    double ar = 0.9;
    double state_sd = 1.0;
    double obs_sd = 1.0;
    /// Standard deviation of x_1 ~ N(0, init_sd^2); when unset, state_sd is used.
    std::optional<double> init_sd;

    [[nodiscard]] double initial_sd() const { return init_sd.value_or(state_sd); }
};

/// Scalar linear Gaussian HMM with the bootstrap choice of (M_t, G_t):
///   x_1 ~ N(0, init_sd^2),  x_t = ar x_{t-1} + state_sd * e_t,
///   y_t = x_t + obs_sd * v_t,  G_t(x_t) = N(y_t; x_t, obs_sd^2).
class LgssModel final : public Model {
  public:
    LgssModel(LgssParams params, std::vector<double> observations);

    [[nodiscard]] int horizon() const noexcept override { return static_cast<int>(y_.size()); }
    [[nodiscard]] StateKind state_kind() const noexcept override { return StateKind::Real; }

    void sample_initial(RandomStream& rng, std::span<double> x) const override;
    void sample_transition(int t, std::span<const double> prev, RandomStream& rng,
                           std::span<double> x) const override;

    [[nodiscard]] bool has_transition_density() const noexcept override { return true; }
    [[nodiscard]] double transition_density(int t, std::span<const double> prev,
                                            std::span<const double> x) const override;
    [[nodiscard]] double potential(int t, std::span<const double> prev,
                                   std::span<const double> x) const override;
    [[nodiscard]] bool potential_depends_only_on_current() const noexcept override { return true; }
    [[nodiscard]] std::optional<double> potential_upper_bound() const override;

    [[nodiscard]] const LgssParams& params() const noexcept { return params_; }
    [[nodiscard]] const std::vector<double>& observations() const noexcept { return y_; }

  private:
    LgssParams params_;
    std::vector<double> y_;
};

/// Simulates observations from the LGSS (deterministic in `seed`) and returns
/// the model conditioned on them. Simulation is sequential, so the data for a
/// shorter horizon is a prefix of the data for a longer one with the same seed.
LgssModel make_lgss(const LgssParams& params, int T, std::uint64_t seed);

/// The hidden states that generated `make_lgss(params, T, seed)`'s data.
std::vector<double> simulate_lgss_states(const LgssParams& params, int T, std::uint64_t seed);

/// Random walk with standard normal increments (x_1 ~ N(0,1)) and indicator
/// potentials G_t(x) = 1{|x| <= s}.
class HomogeneousModel final : public Model {
  public:
    HomogeneousModel(double s, int T);

    [[nodiscard]] int horizon() const noexcept override { return T_; }
    [[nodiscard]] StateKind state_kind() const noexcept override { return StateKind::Real; }

    void sample_initial(RandomStream& rng, std::span<double> x) const override;
    void sample_transition(int t, std::span<const double> prev, RandomStream& rng,
                           std::span<double> x) const override;

    [[nodiscard]] bool has_transition_density() const noexcept override { return true; }
    [[nodiscard]] double transition_density(int t, std::span<const double> prev,
                                            std::span<const double> x) const override;
    [[nodiscard]] double potential(int t, std::span<const double> prev,
                                   std::span<const double> x) const override;
    [[nodiscard]] bool potential_depends_only_on_current() const noexcept override { return true; }
    [[nodiscard]] std::optional<double> potential_upper_bound() const override { return 1.0; }

    [[nodiscard]] double half_width() const noexcept { return s_; }

  private:
    double s_;
    int T_;
};

HomogeneousModel make_homogeneous(double s, int T);

/// Finite state space {0, ..., K-1} with a time-homogeneous transition matrix
/// and potentials that depend only on the current state.
class DiscreteModel final : public Model {
  public:
    /// `transition` is K x K row-major. `potentials` holds either K values
    /// (used at every time) or T*K values (row t for time t).
    DiscreteModel(int K, std::vector<double> initial, std::vector<double> transition,
                  std::vector<double> potentials, int T);

    [[nodiscard]] int horizon() const noexcept override { return T_; }
    [[nodiscard]] StateKind state_kind() const noexcept override { return StateKind::Discrete; }

    void sample_initial(RandomStream& rng, std::span<double> x) const override;
    void sample_transition(int t, std::span<const double> prev, RandomStream& rng,
                           std::span<double> x) const override;

    [[nodiscard]] bool has_transition_density() const noexcept override { return true; }
    [[nodiscard]] double transition_density(int t, std::span<const double> prev,
                                            std::span<const double> x) const override;
    [[nodiscard]] double potential(int t, std::span<const double> prev,
                                   std::span<const double> x) const override;
    [[nodiscard]] bool potential_depends_only_on_current() const noexcept override { return true; }
    [[nodiscard]] std::optional<double> potential_upper_bound() const override;
    [[nodiscard]] std::optional<MixingConstants> mixing_constants() const override;

    [[nodiscard]] int states() const noexcept { return K_; }
    [[nodiscard]] double initial_probability(int k) const { return initial_[k]; }
    [[nodiscard]] double transition_probability(int from, int to) const
    {
        return transition_[static_cast<std::size_t>(from) * K_ + to];
    }
    [[nodiscard]] double potential_value(int t, int k) const
    {
        const std::size_t row = potentials_.size() == static_cast<std::size_t>(K_) ? 0 : t;
        return potentials_[row * K_ + k];
    }

  private:
    int draw(std::span<const double> cumulative, RandomStream& rng) const;

    int K_;
    int T_;
    std::vector<double> initial_;
    std::vector<double> transition_;
    std::vector<double> potentials_;
    std::vector<double> initial_cdf_;
    std::vector<double> transition_cdf_;
};

/// Validates the tables (stochastic rows, strictly positive potentials).
DiscreteModel make_discrete(int K, std::vector<double> transition, std::vector<double> potentials,
                            int T, std::vector<double> initial = {});

/// The smoothing distribution of a discrete model, tabulated over all K^T
/// trajectories. Trajectory (x_1, ..., x_T) has index sum_t x_t K^(T-t), i.e.
/// x_1 is the most significant digit.
struct SmoothingTable {
    int K = 0;
    int T = 0;
    std::vector<double> probability;
    /// c_T, the normalising constant of gamma_T.
    double normalizer = 0.0;

    [[nodiscard]] std::size_t index_of(const Trajectory& x) const;
    [[nodiscard]] Trajectory trajectory(std::size_t index) const;
    /// Marginal law of x_t.
    [[nodiscard]] std::vector<double> marginal(int t) const;
};

SmoothingTable exact_smoothing(const DiscreteModel& model);

struct KalmanResult {
    std::vector<double> filter_mean;
    std::vector<double> filter_var;
    std::vector<double> smooth_mean;
    std::vector<double> smooth_var;
};

/// Kalman filter and Rauch-Tung-Striebel smoother for the scalar LGSS.
KalmanResult kalman_smoother(const LgssParams& params, std::span<const double> observations);
/// As above, additionally checking that the record has length T.
KalmanResult kalman_smoother(const LgssParams& params, std::span<const double> observations, int T);

/// Observation records as CSV with header `t,y` and 1-based t.
void write_observations_csv(std::ostream& out, std::span<const double> y);
std::vector<double> read_observations_csv(std::istream& in);

}  // namespace csmc
