// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include "railrelay/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "railrelay/error.hpp"
#include "railrelay/radio_link.hpp"

namespace railrelay {

namespace {

enum class Unit { Length, Speed, Power, Frequency, Decibel, Angle, Plain, Integer, Flag, List };

struct KeySpec {
    Unit unit;
    bool required;
    std::function<void(ExperimentConfig&, double)> set_number;
    std::function<void(ExperimentConfig&, std::string_view)> set_text;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool parse_flag(std::string_view key, std::string_view text) {
    const std::string v = lower(trim(text));
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(std::string(key) + ": expected on/off, got '" + std::string(text) + "'");
}

int to_int(std::string_view key, double v) {
    if (v != std::floor(v) || std::abs(v) > 2e9) {
        throw ConfigError(std::string(key) + ": expected an integer");
    }
    return static_cast<int>(v);
}

const std::map<std::string, KeySpec, std::less<>>& key_table() {
    using C = ExperimentConfig;
    static const std::map<std::string, KeySpec, std::less<>> table = {
        {"d0", {Unit::Length, true, [](C& c, double v) { c.scenario.rrh_distance = v; }, {}}},
        {"d_l", {Unit::Length, true, [](C& c, double v) { c.scenario.cell_width = v; }, {}}},
        {"d_MR", {Unit::Length, true, [](C& c, double v) { c.scenario.relay_spacing = v; }, {}}},
        {"M", {Unit::Integer, true, [](C& c, double v) { c.scenario.relays = to_int("M", v); }, {}}},
        {"N", {Unit::Integer, true, [](C& c, double v) { c.scenario.bins = to_int("N", v); }, {}}},
        {"v", {Unit::Speed, true, [](C& c, double v) { c.scenario.speed = v; }, {}}},
        {"P_T", {Unit::Power, true, [](C& c, double v) { c.scenario.power_budget = v; }, {}}},
        {"B", {Unit::Frequency, true, [](C& c, double v) { c.scenario.bandwidth = v; }, {}}},
        {"NF", {Unit::Decibel, true, [](C& c, double v) { c.scenario.noise_figure_db = v; }, {}}},
        {"n_pl", {Unit::Plain, true, [](C& c, double v) { c.scenario.pathloss_exponent = v; }, {}}},
        {"lambda", {Unit::Length, true, [](C& c, double v) { c.scenario.wavelength = v; }, {}}},
        {"xi", {Unit::Decibel, true, [](C& c, double v) { c.scenario.shadowing_db = v; }, {}}},
        {"theta_3db", {Unit::Angle, true, [](C& c, double v) { c.scenario.beamwidth_deg = v; }, {}}},
        {"rician_K", {Unit::Decibel, false, [](C& c, double v) { c.scenario.rician_k_db = v; }, {}}},
        {"seed",
         {Unit::Integer, false,
          [](C& c, double v) {
              if (v < 0) throw ConfigError("seed: must be nonnegative");
              c.scenario.seed = static_cast<std::uint64_t>(v);
          },
          {}}},
        {"D_min_rho", {Unit::Plain, false, [](C& c, double v) { c.scenario.data_floor.rho = v; }, {}}},
        {"D_min_bits", {Unit::Plain, false, [](C& c, double v) { c.scenario.data_floor.bits = v; }, {}}},
        {"quadrature",
         {Unit::Integer, false, [](C& c, double v) { c.scenario.quadrature_intervals = to_int("quadrature", v); },
          {}}},
        {"csi_alpha", {Unit::Plain, false, [](C& c, double v) { c.csi_alpha = v; }, {}}},
        {"fading", {Unit::Flag, false, {}, [](C& c, std::string_view t) { c.fading = parse_flag("fading", t); }}},
        {"bandwidth_factor",
         {Unit::Flag, false, {},
          [](C& c, std::string_view t) { c.scenario.bandwidth_factor = parse_flag("bandwidth_factor", t); }}},
        {"schemes",
         {Unit::List, false, {},
          [](C& c, std::string_view t) {
              c.schemes.clear();
              std::string item;
              std::istringstream is{std::string(t)};
              while (std::getline(is, item, ',')) {
                  const auto name = trim(item);
                  if (name.empty()) continue;
                  const auto s = parse_scheme(name);
                  if (!s) throw ConfigError("schemes: unknown scheme '" + std::string(name) + "'");
                  if (std::find(c.schemes.begin(), c.schemes.end(), *s) != c.schemes.end()) {
                      throw ConfigError("schemes: '" + std::string(name) + "' listed twice");
                  }
                  c.schemes.push_back(*s);
              }
          }}},
        {"solver.sigma0", {Unit::Plain, false, [](C& c, double v) { c.solver.sigma0 = v; }, {}}},
        {"solver.growth", {Unit::Plain, false, [](C& c, double v) { c.solver.growth = v; }, {}}},
        {"solver.step", {Unit::Plain, false, [](C& c, double v) { c.solver.fixed_step = v; }, {}}},
        {"solver.eps", {Unit::Plain, false, [](C& c, double v) { c.solver.eps = v; }, {}}},
        {"solver.max_cycles",
         {Unit::Integer, false, [](C& c, double v) { c.solver.max_cycles = to_int("solver.max_cycles", v); }, {}}},
        {"solver.max_inner",
         {Unit::Integer, false, [](C& c, double v) { c.solver.max_inner = to_int("solver.max_inner", v); }, {}}},
        {"solver.budget",
         {Unit::List, false, {},
          [](C& c, std::string_view t) {
              const std::string v = lower(trim(t));
              if (v == "inequality") {
                  c.solver.budget = BudgetMode::Inequality;
              } else if (v == "equality") {
                  c.solver.budget = BudgetMode::Equality;
              } else {
                  throw ConfigError("solver.budget: expected inequality or equality");
              }
          }}},
    };
    return table;
}

struct Suffix {
    std::string_view text;
    std::function<double(double)> to_si;
};

const std::vector<Suffix>& suffixes(Unit unit) {
    static const std::vector<Suffix> length = {
        {"km", [](double v) { return v * 1e3; }}, {"mm", [](double v) { return v * 1e-3; }},
        {"m", [](double v) { return v; }}};
    static const std::vector<Suffix> speed = {
        {"km/h", [](double v) { return v / 3.6; }}, {"m/s", [](double v) { return v; }}};
    static const std::vector<Suffix> power = {
        {"dBm", [](double v) { return dbm_to_watts(v); }}, {"mW", [](double v) { return v * 1e-3; }},
        {"W", [](double v) { return v; }}};
    static const std::vector<Suffix> freq = {
        {"GHz", [](double v) { return v * 1e9; }}, {"MHz", [](double v) { return v * 1e6; }},
        {"kHz", [](double v) { return v * 1e3; }}, {"Hz", [](double v) { return v; }}};
    static const std::vector<Suffix> decibel = {{"dB", [](double v) { return v; }}};
    static const std::vector<Suffix> angle = {{"deg", [](double v) { return v; }}};
    static const std::vector<Suffix> none;
    switch (unit) {
        case Unit::Length: return length;
        case Unit::Speed: return speed;
        case Unit::Power: return power;
        case Unit::Frequency: return freq;
        case Unit::Decibel: return decibel;
        case Unit::Angle: return angle;
        default: return none;
    }
}

double parse_with_unit(std::string_view key, Unit unit, std::string_view raw) {
    const std::string_view text = trim(raw);
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || !std::isfinite(value)) {
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
    }
    const std::string_view rest = trim(std::string_view(res.ptr, static_cast<std::size_t>(last - res.ptr)));
    if (rest.empty()) return value;
    for (const Suffix& s : suffixes(unit)) {
        if (rest == s.text) return s.to_si(value);
    }
    throw ConfigError(std::string(key) + ": unknown unit '" + std::string(rest) + "'");
}

void apply(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    const auto& table = key_table();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
    const KeySpec& spec = it->second;
    if (spec.set_text) {
        spec.set_text(cfg, value);
    } else {
        spec.set_number(cfg, parse_with_unit(key, spec.unit, value));
    }
}

}  // namespace

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::Optimized: return "optimized";
        case Scheme::Constant: return "constant";
        case Scheme::Average: return "average";
        case Scheme::Random: return "random";
        case Scheme::Csi: return "csi";
    }
    return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
    for (Scheme s : all_schemes()) {
        if (lower(name) == to_string(s)) return s;
    }
    return std::nullopt;
}

std::vector<Scheme> all_schemes() {
    return {Scheme::Optimized, Scheme::Constant, Scheme::Average, Scheme::Random, Scheme::Csi};
}

void ExperimentConfig::validate() const {
    scenario.validate();
    solver.validate();
    if (schemes.empty()) throw ConfigError("schemes: at least one scheme is required");
    if (!(csi_alpha > 0.0)) throw ConfigError("csi_alpha: must be positive");
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string ExperimentConfig::canonical_text() const {
    const ScenarioConfig& s = scenario;
    std::map<std::string, std::string> kv;
    kv["d0"] = format_number(s.rrh_distance);
    kv["d_l"] = format_number(s.cell_width);
    kv["d_MR"] = format_number(s.relay_spacing);
    kv["M"] = std::to_string(s.relays);
    kv["N"] = std::to_string(s.bins);
    kv["v"] = format_number(s.speed);
    kv["P_T"] = format_number(s.power_budget);
    kv["B"] = format_number(s.bandwidth);
    kv["NF"] = format_number(s.noise_figure_db);
    kv["n_pl"] = format_number(s.pathloss_exponent);
    kv["lambda"] = format_number(s.wavelength);
    kv["xi"] = format_number(s.shadowing_db);
    kv["theta_3db"] = format_number(s.beamwidth_deg);
    kv["rician_K"] = format_number(s.rician_k_db);
    kv["seed"] = std::to_string(s.seed);
    kv["D_min_rho"] = format_number(s.data_floor.rho);
    if (s.data_floor.bits) kv["D_min_bits"] = format_number(*s.data_floor.bits);
    kv["quadrature"] = std::to_string(s.quadrature_intervals);
    kv["bandwidth_factor"] = s.bandwidth_factor ? "on" : "off";
    kv["fading"] = fading ? "on" : "off";
    kv["csi_alpha"] = format_number(csi_alpha);
    std::string names;
    for (Scheme sc : schemes) names += std::string(names.empty() ? "" : ",") + to_string(sc);
    kv["schemes"] = names;
    kv["solver.sigma0"] = format_number(solver.sigma0);
    kv["solver.growth"] = format_number(solver.growth);
    if (solver.fixed_step) kv["solver.step"] = format_number(*solver.fixed_step);
    kv["solver.eps"] = format_number(solver.eps);
    kv["solver.max_cycles"] = std::to_string(solver.max_cycles);
    kv["solver.max_inner"] = std::to_string(solver.max_inner);
    kv["solver.budget"] = to_string(solver.budget);
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

double parse_quantity(std::string_view key, std::string_view text) {
    const auto& table = key_table();
    const auto it = table.find(key);
    if (it == table.end() || it->second.set_text) {
        throw ConfigError("'" + std::string(key) + "' is not a numeric key");
    }
    return parse_with_unit(key, it->second.unit, text);
}

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    apply(cfg, key, value);
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::set<std::string, std::less<>> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", lineno);
        const std::string_view key = trim(body.substr(0, eq));
        const std::string_view value = trim(body.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", lineno);
        if (value.empty()) throw ConfigError("missing value for '" + std::string(key) + "'", lineno);
        if (!seen.insert(std::string(key)).second) {
            throw ConfigError("duplicate key '" + std::string(key) + "'", lineno);
        }
        try {
            apply(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), lineno);
        } catch (const std::exception& e) {
            throw ConfigError(std::string(key) + ": " + e.what(), lineno);
        }
    }
    for (const auto& [key, spec] : key_table()) {
        if (spec.required && !seen.count(key)) throw ConfigError("missing required key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
    std::istringstream is{std::string(text)};
    return parse_config(is);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string scenario_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : cfg.canonical_text()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace railrelay
