#include "csmc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "csmc/error.hpp"
#include "csmc/unbiased.hpp"

namespace csmc {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSweepInit = 0x5157;
constexpr std::uint64_t kSweepIterations = 14;

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<T>();
}

std::vector<int> int_list(const json& j, const char* key)
{
    if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
    const json& v = j.at(key);
    if (v.is_number_integer()) return {v.get<int>()};
    if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be an integer or a list");
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) throw ConfigError(std::string("'") + key + "' entries must be integers");
        out.push_back(e.get<int>());
    }
    return out;
}

ModelConfig parse_model(const json& j)
{
    ModelConfig m;
    if (j.is_string()) {
        m.name = j.get<std::string>();
        return m;
    }
    if (!j.is_object()) throw ConfigError("'model' must be a name or an object");
    m.name = get_or<std::string>(j, "name", "");
    m.lgss.ar = get_or(j, "ar", m.lgss.ar);
    m.lgss.state_sd = get_or(j, "state_sd", m.lgss.state_sd);
    m.lgss.obs_sd = get_or(j, "obs_sd", m.lgss.obs_sd);
    if (j.contains("init_sd")) m.lgss.init_sd = j.at("init_sd").get<double>();
    m.data_seed = get_or<std::uint64_t>(j, "data_seed", m.data_seed);
    m.observations_path = get_or<std::string>(j, "observations", "");
    m.s = get_or(j, "s", m.s);
    m.K = get_or(j, "K", 0);
    m.initial = get_or<std::vector<double>>(j, "initial", {});
    m.transition = get_or<std::vector<double>>(j, "transition", {});
    m.potentials = get_or<std::vector<double>>(j, "potentials", {});
    return m;
}

CapSpec parse_cap(const json& j)
{
    CapSpec c;
    if (j.is_number()) {
        c.rule = CapRule::Absolute;
        c.value = j.get<double>();
        return c;
    }
    const auto rule = get_or<std::string>(j, "rule", "multiple_of_T");
    if (rule == "absolute")
        c.rule = CapRule::Absolute;
    else if (rule == "multiple_of_T")
        c.rule = CapRule::MultipleOfT;
    else if (rule == "budget")
        c.rule = CapRule::Budget;
    else
        throw ConfigError("unknown cap rule '" + rule + "'");
    if (!j.contains("value")) throw ConfigError("cap needs a 'value'");
    c.value = j.at("value").get<double>();
    return c;
}

std::vector<double> read_observation_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open observations file '" + path + "'");
    return read_observations_csv(in);
}

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int parse_int(const std::string& s, const char* what)
{
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw InvalidInput(std::string("bad ") + what + " field '" + s + "'");
    }
}

}  // namespace

int CapSpec::resolve(int T, int N) const
{
    double v = 0.0;
    switch (rule) {
    case CapRule::Absolute: v = value; break;
    case CapRule::MultipleOfT: v = std::floor(value * T); break;
    case CapRule::Budget: v = std::floor(value / (static_cast<double>(N) * T)); break;
    }
    if (!(v >= 1.0) || v > 2147483647.0)
        throw ConfigError("iteration cap does not resolve to a positive integer for T=" + std::to_string(T) +
                          ", N=" + std::to_string(N));
    return static_cast<int>(v);
}

std::unique_ptr<Model> build_model(const ModelConfig& cfg, int T)
{
    try {
        if (cfg.name == "lgss") {
            if (!cfg.observations_path.empty()) {
                auto y = read_observation_file(cfg.observations_path);
                if (T < 1 || static_cast<std::size_t>(T) > y.size())
                    throw ConfigError("observations file has " + std::to_string(y.size()) + " rows, T=" +
                                      std::to_string(T) + " requested");
                y.resize(T);
                return std::make_unique<LgssModel>(cfg.lgss, std::move(y));
            }
            return std::make_unique<LgssModel>(make_lgss(cfg.lgss, T, cfg.data_seed));
        }
        if (cfg.name == "homogeneous") return std::make_unique<HomogeneousModel>(make_homogeneous(cfg.s, T));
        if (cfg.name == "discrete")
            return std::make_unique<DiscreteModel>(make_discrete(cfg.K, cfg.transition, cfg.potentials, T, cfg.initial));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("model '" + cfg.name + "' with T=" + std::to_string(T) + ": " + e.what());
    }
    throw ConfigError("unknown model '" + cfg.name + "'");
}

void SweepConfig::validate() const
{
    if (T.empty()) throw ConfigError("T list is empty");
    if (N.empty()) throw ConfigError("N list is empty");
    if (variants.empty()) throw ConfigError("variant list is empty");
    if (replications < 1) throw ConfigError("replications must be at least 1");
    if (burn_in < 1) throw ConfigError("burn_in must be at least 1");
    if (threads < 0) throw ConfigError("threads must be nonnegative");
    for (int n : N)
        if (n < 2) throw ConfigError("particle counts must be at least 2");
    for (int t : T) {
        const auto built = build_model(model, t);
        for (Ancestry a : variants)
            if (a != Ancestry::Tracing && !built->has_transition_density())
                throw ConfigError(std::string("variant ") + std::string(to_string(a)) +
                                  " needs transition densities");
        for (int n : N) static_cast<void>(cap.resolve(t, n));
    }
}

SweepConfig parse_sweep_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    SweepConfig cfg;
    try {
        if (!j.contains("model")) throw ConfigError("missing key 'model'");
        cfg.model = parse_model(j.at("model"));
        cfg.T = int_list(j, "T");
        cfg.N = int_list(j, "N");
        if (!j.contains("variants")) throw ConfigError("missing key 'variants'");
        const json& v = j.at("variants");
        std::vector<std::string> names;
        if (v.is_string())
            names.push_back(v.get<std::string>());
        else
            names = v.get<std::vector<std::string>>();
        for (const auto& name : names) {
            try {
                cfg.variants.push_back(parse_ancestry(name));
            } catch (const InvalidParameter&) {
                throw ConfigError("unknown variant '" + name + "'");
            }
        }
        cfg.crn = get_or(j, "crn", cfg.crn);
        cfg.replications = get_or(j, "replications", cfg.replications);
        cfg.burn_in = get_or(j, "burn_in", cfg.burn_in);
        if (j.contains("cap")) cfg.cap = parse_cap(j.at("cap"));
        cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
        cfg.output = get_or(j, "output", cfg.output);
        cfg.threads = get_or(j, "threads", cfg.threads);
        cfg.record_wallclock = get_or(j, "record_wallclock", cfg.record_wallclock);
        cfg.kappa_traces = get_or(j, "kappa_traces", cfg.kappa_traces);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field has the wrong type: ") + e.what());
    }
    return cfg;
}

SweepConfig load_sweep_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_sweep_config(ss.str());
}

std::string resolve_output_path(const SweepConfig& cfg)
{
    const char* dir = std::getenv("CSMC_OUTPUT_DIR");
    if (dir == nullptr || *dir == '\0') return cfg.output;
    return (std::filesystem::path(dir) / std::filesystem::path(cfg.output).filename()).string();
}

RandomStream replicate_stream(std::uint64_t seed, Ancestry variant, int T, int N, int replicate)
{
    return RandomStream::from_path(seed, {static_cast<std::uint64_t>(variant), static_cast<std::uint64_t>(T),
                                          static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(replicate)});
}

std::string replicate_seed_path(std::uint64_t seed, Ancestry variant, int T, int N, int replicate)
{
    return std::to_string(seed) + "/" + std::string(to_string(variant)) + "/" + std::to_string(T) + "/" +
           std::to_string(N) + "/" + std::to_string(replicate);
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg)
{
    cfg.validate();

    std::vector<std::unique_ptr<Model>> models;
    for (int t : cfg.T) models.push_back(build_model(cfg.model, t));

    struct Job {
        Ancestry variant;
        int ti;
        int N;
        int replicate;
    };
    std::vector<Job> jobs;
    for (Ancestry a : cfg.variants)
        for (std::size_t ti = 0; ti < cfg.T.size(); ++ti)
            for (int n : cfg.N)
                for (int r = 0; r < cfg.replications; ++r) jobs.push_back({a, static_cast<int>(ti), n, r});

    std::vector<SweepRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            const Job& job = jobs[k];
            const int T = cfg.T[job.ti];
            const Model& model = *models[job.ti];
            SweepRecord& rec = records[k];
            rec.variant = std::string(to_string(job.variant));
            rec.T = T;
            rec.N = job.N;
            rec.replicate = job.replicate;
            rec.seed_path = replicate_seed_path(cfg.seed, job.variant, T, job.N, job.replicate);
            const int cap = cfg.cap.resolve(T, job.N);
            try {
                const RandomStream rng = replicate_stream(cfg.seed, job.variant, T, job.N, job.replicate);
                const Variant variant{job.variant, cfg.crn};
                auto [s0, s0_tilde] = initialize_chains(model, job.N, variant, rng.fork(kSweepInit));
                CoupledKernel kernel(model, job.N, variant);
                CouplingRun run = run_until_coupled(kernel, s0, s0_tilde, cap, rng.fork(kSweepIterations));
                rec.censored = run.censored();
                rec.tau = run.tau.value_or(cap);
                rec.wallclock_ns = cfg.record_wallclock ? run.wallclock_ns : 0;
                if (cfg.kappa_traces) rec.kappa_trace = std::move(run.kappa_trace);
            } catch (const std::exception& e) {
                rec.error = e.what();
            }
        }
    };

    int threads = cfg.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : cfg.threads;
    threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (int i = 0; i < threads; ++i) pool.emplace_back(work);
    }
    return records;
}

std::string csv_escape(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

bool read_csv_row(std::istream& in, std::vector<std::string>& fields)
{
    fields.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;
    std::string cur;
    bool quoted = false;
    for (int ch = in.get(); ch != std::char_traits<char>::eof(); ch = in.get()) {
        const char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    cur += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c == '\n') {
            fields.push_back(std::move(cur));
            return true;
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw InvalidInput("unterminated quoted CSV field");
    fields.push_back(std::move(cur));
    return true;
}

void write_records_csv(std::ostream& out, std::span<const SweepRecord> records)
{
    out << "variant,T,N,replicate,tau,censored,wallclock_ns,seed_path\n";
    for (const auto& r : records) {
        out << csv_escape(r.variant) << ',' << r.T << ',' << r.N << ',' << r.replicate << ',';
        if (r.tau) out << *r.tau;
        out << ',' << (r.censored ? 1 : 0) << ',' << r.wallclock_ns << ',' << csv_escape(r.seed_path) << '\n';
    }
}

std::vector<SweepRecord> read_records_csv(std::istream& in)
{
    std::vector<SweepRecord> out;
    std::vector<std::string> f;
    if (!read_csv_row(in, f)) return out;
    const std::vector<std::string> header{"variant", "T", "N", "replicate", "tau", "censored", "wallclock_ns", "seed_path"};
    if (f != header) throw InvalidInput("unexpected sweep CSV header");
    while (read_csv_row(in, f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != header.size())
            throw InvalidInput("sweep CSV row has " + std::to_string(f.size()) + " fields, expected 8");
        SweepRecord r;
        r.variant = f[0];
        r.T = parse_int(f[1], "T");
        r.N = parse_int(f[2], "N");
        r.replicate = parse_int(f[3], "replicate");
        if (!f[4].empty()) r.tau = parse_int(f[4], "tau");
        r.censored = parse_int(f[5], "censored") != 0;
        try {
            r.wallclock_ns = std::stoll(f[6]);
        } catch (const std::exception&) {
            throw InvalidInput("bad wallclock_ns field '" + f[6] + "'");
        }
        r.seed_path = f[7];
        out.push_back(std::move(r));
    }
    return out;
}

void write_kappa_csv(std::ostream& out, std::span<const SweepRecord> records)
{
    out << "variant,T,N,replicate,iteration,kappa\n";
    for (const auto& r : records)
        for (std::size_t n = 0; n < r.kappa_trace.size(); ++n)
            out << csv_escape(r.variant) << ',' << r.T << ',' << r.N << ',' << r.replicate << ',' << n + 1 << ','
                << r.kappa_trace[n] << '\n';
}

std::vector<CellSummary> summarize(std::span<const SweepRecord> records)
{
    struct Acc {
        CellSummary cell;
        std::vector<double> taus;
    };
    std::map<std::tuple<std::string, int, int>, Acc> cells;
    for (const auto& r : records) {
        Acc& a = cells[{r.variant, r.T, r.N}];
        a.cell.variant = r.variant;
        a.cell.T = r.T;
        a.cell.N = r.N;
        ++a.cell.replications;
        if (!r.tau)
            ++a.cell.errors;
        else if (r.censored)
            ++a.cell.censored;
        else
            a.taus.push_back(*r.tau);
    }
    std::vector<CellSummary> out;
    out.reserve(cells.size());
    for (auto& [key, a] : cells) {
        CellSummary c = a.cell;
        c.excluded = c.censored > 0;
        const auto n = a.taus.size();
        if (n > 0) {
            double sum = 0.0;
            for (double t : a.taus) sum += t;
            const double mean = sum / n;
            c.mean_tau = mean;
            c.mean_cost = mean * c.N / c.T;
            if (n > 1) {
                double ss = 0.0;
                for (double t : a.taus) ss += (t - mean) * (t - mean);
                c.sd_tau = std::sqrt(ss / (n - 1));
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

void write_summary_csv(std::ostream& out, std::span<const CellSummary> rows)
{
    out << "variant,T,N,replications,censored,errors,mean_tau,sd_tau,mean_cost,excluded\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& c : rows)
        out << csv_escape(c.variant) << ',' << c.T << ',' << c.N << ',' << c.replications << ',' << c.censored << ','
            << c.errors << ',' << opt(c.mean_tau) << ',' << opt(c.sd_tau) << ',' << opt(c.mean_cost) << ','
            << (c.excluded ? 1 : 0) << '\n';
}

}  // namespace csmc
