#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>

#include <json.hpp>

#include "csmc/bounds.hpp"
#include "csmc/error.hpp"
#include "csmc/harness.hpp"

namespace csmc {

namespace {

using nlohmann::json;
using Params = std::map<std::string, double>;

struct BoundSpec {
    std::vector<std::string> required;
    std::function<std::vector<std::pair<std::string, BoundValue>>(const Params&)> eval;
};

BoundValue plain(double v)
{
    return {std::log(v), v, false};
}

int as_int(const Params& p, const std::string& k)
{
    const double v = p.at(k);
    if (v != std::floor(v)) throw ConfigError("parameter '" + k + "' must be an integer");
    return static_cast<int>(v);
}

const std::map<std::string, BoundSpec>& registry()
{
    static const std::map<std::string, BoundSpec> r{
        {"coupling_tail",
         {{"alpha", "beta", "T", "n"},
          [](const Params& p) {
              return std::vector<std::pair<std::string, BoundValue>>{
                  {"coupling_tail",
                   coupling_tail_bound(p.at("alpha"), p.at("beta"), as_int(p, "T"), as_int(p, "n"))}};
          }}},
        {"cbpf_tv",
         {{"alpha", "beta", "T", "k"},
          [](const Params& p) {
              return std::vector<std::pair<std::string, BoundValue>>{
                  {"cbpf_tv", coupling_tail_bound(p.at("alpha"), p.at("beta"), as_int(p, "T"), as_int(p, "k"))}};
          }}},
        {"oneshot_rate",
         {{"c_star", "N", "T"},
          [](const Params& p) {
              return std::vector<std::pair<std::string, BoundValue>>{
                  {"oneshot_rate", oneshot_rate_bound(p.at("c_star"), as_int(p, "N"), as_int(p, "T"))}};
          }}},
        {"oneshot_coupling",
         {{"c", "N"},
          [](const Params& p) {
              return std::vector<std::pair<std::string, BoundValue>>{
                  {"oneshot_coupling", oneshot_coupling_bound(p.at("c"), as_int(p, "N"))}};
          }}},
        {"chat_mean",
         {{"N", "delta", "t"},
          [](const Params& p) {
              return std::vector<std::pair<std::string, BoundValue>>{
                  {"chat_mean", plain(chat_mean_lower_bound(as_int(p, "N"), p.at("delta"), as_int(p, "t")))}};
          }}},
        {"ic_res_atom",
         {{"eps", "N"},
          [](const Params& p) {
              return std::vector<std::pair<std::string, BoundValue>>{
                  {"ic_res_atom", plain(ic_res_atom_bound(p.at("eps"), as_int(p, "N")))}};
          }}},
        {"ic_res_set",
         {{"eps", "N", "C"},
          [](const Params& p) {
              return std::vector<std::pair<std::string, BoundValue>>{
                  {"ic_res_set", plain(ic_res_set_bound(p.at("eps"), as_int(p, "N"), as_int(p, "C")))}};
          }}},
        {"estimator_cost",
         {{"alpha", "beta", "rho", "T", "b", "N", "c"},
          [](const Params& p) {
              const double h = p.count("h_norm_sq") ? p.at("h_norm_sq") : 1.0;
              const auto b = estimator_cost_bounds(p.at("alpha"), p.at("beta"), p.at("rho"), as_int(p, "T"),
                                                   as_int(p, "b"), as_int(p, "N"), p.at("c"), h);
              return std::vector<std::pair<std::string, BoundValue>>{
                  {"estimator_tau_mixing", b.tau_mixing},
                  {"estimator_variance_mixing", b.variance_gap_mixing},
                  {"estimator_tau_oneshot", b.tau_oneshot},
                  {"estimator_variance_oneshot", b.variance_gap_oneshot}};
          }}},
    };
    return r;
}

// Shortest text that reads back to the same double.
std::string fmt(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void expand(const std::vector<std::pair<std::string, std::vector<double>>>& axes, std::size_t i, Params& cur,
            const std::function<void(const Params&)>& emit)
{
    if (i == axes.size()) {
        emit(cur);
        return;
    }
    for (double v : axes[i].second) {
        cur[axes[i].first] = v;
        expand(axes, i + 1, cur, emit);
    }
}

}  // namespace

std::vector<BoundRow> evaluate_bound_requests(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bound request file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("requests") || !j.at("requests").is_array())
        throw ConfigError("bound request file needs a 'requests' list");

    std::vector<BoundRow> rows;
    for (const auto& req : j.at("requests")) {
        if (!req.is_object() || !req.contains("bound") || !req.at("bound").is_string())
            throw ConfigError("each request needs a 'bound' name");
        const auto name = req.at("bound").get<std::string>();
        const auto it = registry().find(name);
        if (it == registry().end()) throw ConfigError("unknown bound '" + name + "'");

        std::vector<std::pair<std::string, std::vector<double>>> axes;
        for (const auto& [key, value] : req.items()) {
            if (key == "bound") continue;
            std::vector<double> vals;
            if (value.is_number())
                vals.push_back(value.get<double>());
            else if (value.is_array() && !value.empty() &&
                     std::all_of(value.begin(), value.end(), [](const json& e) { return e.is_number(); }))
                vals = value.get<std::vector<double>>();
            else
                throw ConfigError("parameter '" + key + "' of bound '" + name + "' must be a number or a list");
            axes.emplace_back(key, std::move(vals));
        }
        for (const auto& r : it->second.required) {
            const bool present =
                std::any_of(axes.begin(), axes.end(), [&](const auto& a) { return a.first == r; });
            if (!present) throw ConfigError("bound '" + name + "' needs parameter '" + r + "'");
        }
        Params cur;
        expand(axes, 0, cur, [&](const Params& p) {
            std::string label;
            for (const auto& [k, v] : p) {
                if (!label.empty()) label += ';';
                label += k + "=" + fmt(v);
            }
            std::vector<std::pair<std::string, BoundValue>> values;
            try {
                values = it->second.eval(p);
            } catch (const InvalidParameter& e) {
                throw ConfigError("bound '" + name + "' (" + label + "): " + e.what());
            }
            for (auto& [bound, v] : values) rows.push_back({bound, label, v});
        });
    }
    return rows;
}

void write_bounds_csv(std::ostream& out, std::span<const BoundRow> rows)
{
    out << "bound,params,log_value,value,vacuous\n";
    for (const auto& r : rows)
        out << csv_escape(r.bound) << ',' << csv_escape(r.params) << ',' << fmt(r.value.log_value) << ','
            << fmt(r.value.value) << ',' << (r.value.vacuous ? 1 : 0) << '\n';
}

}  // namespace csmc
