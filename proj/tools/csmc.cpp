// Command-line driver: coupling-time sweeps, summaries and bound tables.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "csmc/error.hpp"
#include "csmc/harness.hpp"

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw csmc::ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw csmc::ConfigError("cannot write '" + path + "'");
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Coupled conditional particle filter experiments"};
    app.require_subcommand(1);

    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    app.add_option("--threads", threads, "Worker threads (0 = all cores)");
    app.add_option("--seed", seed, "Base seed override");

    auto* run = app.add_subcommand("run", "Run a coupling-time sweep");
    std::string config_path;
    run->add_option("--config", config_path, "JSON sweep config")->required()->check(CLI::ExistingFile);

    auto* summ = app.add_subcommand("summarize", "Summarise a sweep CSV per cell");
    std::string input, output;
    summ->add_option("--input", input, "Sweep CSV")->required()->check(CLI::ExistingFile);
    summ->add_option("--output", output, "Summary CSV (stdout when omitted)");

    auto* bounds = app.add_subcommand("bounds", "Evaluate bound tables");
    std::string params_path, bounds_out;
    bounds->add_option("--params", params_path, "JSON bound requests")->required()->check(CLI::ExistingFile);
    bounds->add_option("--output", bounds_out, "Bounds CSV (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = csmc::load_sweep_config(config_path);
            if (threads) cfg.threads = *threads;
            if (seed) cfg.seed = *seed;
            const auto records = csmc::run_sweep(cfg);
            const auto path = csmc::resolve_output_path(cfg);
            {
                auto out = open_out(path);
                csmc::write_records_csv(out, records);
            }
            if (cfg.kappa_traces) {
                auto out = open_out(path + ".kappa.csv");
                csmc::write_kappa_csv(out, records);
            }
            int failed = 0;
            for (const auto& r : records)
                if (!r.error.empty()) {
                    ++failed;
                    std::cerr << "replicate " << r.seed_path << " failed: " << r.error << '\n';
                }
            std::cerr << records.size() << " records written to " << path;
            if (failed) std::cerr << " (" << failed << " failed)";
            std::cerr << '\n';
        } else if (*summ) {
            std::ifstream in(input);
            const auto records = csmc::read_records_csv(in);
            const auto rows = csmc::summarize(records);
            if (output.empty()) {
                csmc::write_summary_csv(std::cout, rows);
            } else {
                auto out = open_out(output);
                csmc::write_summary_csv(out, rows);
            }
        } else if (*bounds) {
            const auto rows = csmc::evaluate_bound_requests(slurp(params_path));
            if (bounds_out.empty()) {
                csmc::write_bounds_csv(std::cout, rows);
            } else {
                auto out = open_out(bounds_out);
                csmc::write_bounds_csv(out, rows);
            }
        }
    } catch (const csmc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
