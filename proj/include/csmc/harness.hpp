#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csmc/bounds.hpp"
#include "csmc/ccxpf.hpp"
#include "csmc/model.hpp"
#include "csmc/models.hpp"

namespace csmc {

enum class CapRule { Absolute, MultipleOfT, Budget };

struct CapSpec {
    CapRule rule = CapRule::MultipleOfT;
    double value = 10.0;

    /// Absolute: value; multiple of T: floor(value * T); budget: floor(value / (N T)).
    [[nodiscard]] int resolve(int T, int N) const;
};

struct ModelConfig {
    std::string name = "lgss";
    // lgss
    LgssParams lgss{};
    std::uint64_t data_seed = 1;
    /// Observation CSV; horizon T uses its first T rows.
    std::string observations_path;
    // homogeneous
    double s = 10.0;
    // discrete
    int K = 0;
    std::vector<double> initial;
    std::vector<double> transition;
    std::vector<double> potentials;
};

struct SweepConfig {
    ModelConfig model;
    std::vector<int> T;
    std::vector<int> N;
    std::vector<Ancestry> variants;
    bool crn = true;
    int replications = 1;
    int burn_in = 1;
    CapSpec cap{};
    std::uint64_t seed = 0;
    std::string output = "sweep.csv";
    /// Worker threads; 0 picks the hardware concurrency.
    int threads = 1;
    /// When false the wallclock_ns column is written as 0 so reruns are byte-identical.
    bool record_wallclock = true;
    /// Also write per-iteration kappa to `<output>.kappa.csv`.
    bool kappa_traces = false;

    /// Throws ConfigError for empty lists, unknown models, unresolvable caps
    /// and models that cannot be built for some T or do not support a variant.
    void validate() const;
};

/// Parses the JSON config format documented in the README. Throws ConfigError.
SweepConfig parse_sweep_config(const std::string& json_text);
SweepConfig load_sweep_config(const std::string& path);

/// Builds the configured model with horizon T. Throws ConfigError.
std::unique_ptr<Model> build_model(const ModelConfig& cfg, int T);

/// Output path after applying the CSMC_OUTPUT_DIR override, which replaces
/// the directory part only.
std::string resolve_output_path(const SweepConfig& cfg);

struct SweepRecord {
    std::string variant;
    int T = 0;
    int N = 0;
    int replicate = 0;
    /// Meeting time, or the cap when censored; empty when the replicate failed.
    std::optional<int> tau;
    bool censored = false;
    std::int64_t wallclock_ns = 0;
    std::string seed_path;
    /// Not persisted.
    std::string error;
    std::vector<int> kappa_trace;
};

/// Runs every (variant, T, N) cell and replicate. Records come back ordered
/// by cell (config order) then replicate, independent of thread scheduling.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

/// Stream for one replicate and its printable path.
RandomStream replicate_stream(std::uint64_t seed, Ancestry variant, int T, int N, int replicate);
std::string replicate_seed_path(std::uint64_t seed, Ancestry variant, int T, int N, int replicate);

void write_records_csv(std::ostream& out, std::span<const SweepRecord> records);
std::vector<SweepRecord> read_records_csv(std::istream& in);
/// Columns variant,T,N,replicate,iteration,kappa.
void write_kappa_csv(std::ostream& out, std::span<const SweepRecord> records);

struct CellSummary {
    std::string variant;
    int T = 0;
    int N = 0;
    int replications = 0;
    int censored = 0;
    int errors = 0;
    std::optional<double> mean_tau;
    /// Sample standard deviation; absent with fewer than two uncensored runs.
    std::optional<double> sd_tau;
    /// Mean of N tau / T over uncensored runs.
    std::optional<double> mean_cost;
    /// Any censored replicate excludes the cell from comparisons.
    bool excluded = false;
};

std::vector<CellSummary> summarize(std::span<const SweepRecord> records);
void write_summary_csv(std::ostream& out, std::span<const CellSummary> rows);

/// One row of a bound table.
struct BoundRow {
    std::string bound;
    /// `name=value` pairs joined by ';'.
    std::string params;
    BoundValue value;
};

/// Evaluates a JSON bound request file: {"requests": [{"bound": name, ...}]}.
/// Numeric parameters given as lists are expanded over their Cartesian
/// product. Throws ConfigError for unknown bounds or missing parameters.
std::vector<BoundRow> evaluate_bound_requests(const std::string& json_text);
/// Columns bound,params,log_value,value,vacuous.
void write_bounds_csv(std::ostream& out, std::span<const BoundRow> rows);

/// RFC 4180 helpers.
std::string csv_escape(const std::string& field);
/// Reads one record; returns false at end of input.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields);

}  // namespace csmc
