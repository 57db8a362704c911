// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include "railrelay/doppler.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "railrelay/error.hpp"
#include "railrelay/radio_link.hpp"

namespace railrelay {

namespace {

double head_distance(const ScenarioConfig& cfg, double x) {
    return std::hypot(cfg.rrh_distance, x - 0.5 * cfg.cell_width);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

double rsrp_at(const ScenarioConfig& cfg, double x, double fading_db) {
    const double g0 = max_antenna_gain(cfg.beamwidth_deg);
    const double d = head_distance(cfg, x);
    return watts_to_dbm(cfg.power_budget) + 2.0 * g0 - cfg.shadowing_db -
           path_loss(d, cfg.wavelength, cfg.pathloss_exponent) - fading_db;
}

double carrier_frequency(const ScenarioConfig& cfg) { return kSpeedOfLight / cfg.wavelength; }

double max_doppler(const ScenarioConfig& cfg, std::optional<double> speed) {
    return carrier_frequency(cfg) * speed.value_or(cfg.speed) / kSpeedOfLight;
}

double relative_doppler(const ScenarioConfig& cfg, double x) {
    // Cosine between the velocity and the line of sight to the radio head.
    return (0.5 * cfg.cell_width - x) / head_distance(cfg, x);
}

double true_doppler(const ScenarioConfig& cfg, double x) {
    return relative_doppler(cfg, x) * max_doppler(cfg);
}

RsrpWindow make_window(const ScenarioConfig& cfg, double center, double spacing, int half_width,
                       double noise_db_std, std::mt19937_64* rng) {
    if (!(spacing > 0.0)) throw DomainError("RSRP sample spacing must be positive");
    if (half_width < 0) throw DomainError("window half-width must be nonnegative");
    if (noise_db_std > 0.0 && !rng) throw DomainError("noisy window needs an rng");
    RsrpWindow w;
    w.center = center;
    w.spacing = spacing;
    w.values.resize(2 * half_width + 1);
    std::normal_distribution<double> noise(0.0, noise_db_std > 0.0 ? noise_db_std : 1.0);
    for (int k = 0; k < static_cast<int>(w.values.size()); ++k) {
        const double gamma = noise_db_std > 0.0 ? noise(*rng) : 0.0;
        w.values[k] = rsrp_at(cfg, w.position(k), gamma);
    }
    return w;
}

DopplerTable::DopplerTable(double spacing, int half_width, std::vector<Entry> entries)
    : spacing_(spacing), half_width_(half_width), entries_(std::move(entries)) {
    for (const Entry& e : entries_) {
        if (static_cast<int>(e.rsrp.size()) != window_length()) {
            throw DomainError("table entry window length does not match 2L+1");
        }
        if (!(e.relative_doppler >= -1.0 && e.relative_doppler <= 1.0)) {
            throw DomainError("relative Doppler outside [-1, 1]");
        }
    }
}

DopplerTable DopplerTable::build(const ScenarioConfig& cfg, double spacing, int half_width) {
    if (!(spacing > 0.0)) throw DomainError("RSRP sample spacing must be positive");
    if (half_width < 0) throw DomainError("window half-width must be nonnegative");
    const int samples = static_cast<int>(std::floor(cfg.cell_width / spacing));

    std::vector<Entry> entries;
    for (int k = half_width; k + half_width < samples; ++k) {
        Entry e;
        e.position = (k + 0.5) * spacing;
        e.relative_doppler = relative_doppler(cfg, e.position);
        e.rsrp = make_window(cfg, e.position, spacing, half_width).values;
        entries.push_back(std::move(e));
    }
    return DopplerTable(spacing, half_width, std::move(entries));
}

const DopplerTable::Entry& DopplerTable::nearest(const RsrpWindow& window) const {
    if (entries_.empty()) throw DomainError("Doppler table is empty");
    if (static_cast<int>(window.values.size()) != window_length()) {
        throw DomainError("query window length does not match the table");
    }
    const Entry* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const Entry& e : entries_) {
        double dist = 0.0;
        for (std::size_t k = 0; k < e.rsrp.size(); ++k) {
            const double diff = e.rsrp[k] - window.values[k];
            dist += diff * diff;
        }
        if (dist < best_dist) {
            best_dist = dist;
            best = &e;
        }
    }
    return *best;
}

void DopplerTable::write(std::ostream& os) const {
    os << "# railrelay doppler table v1\n";
    os << "# spacing " << format_double(spacing_) << " half_width " << half_width_ << '\n';
    for (const Entry& e : entries_) {
        os << format_double(e.position) << ' ' << format_double(e.relative_doppler);
        for (double r : e.rsrp) os << ' ' << format_double(r);
        os << '\n';
    }
}

DopplerTable DopplerTable::read(std::istream& is) {
    std::string line;
    double spacing = 0.0;
    int half_width = -1;
    std::vector<Entry> entries;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, key;
            ls >> hash >> key;
            if (key == "spacing") {
                std::string hw;
                ls >> spacing >> hw >> half_width;
                if (!ls || hw != "half_width") throw ConfigError("malformed table header", lineno);
            }
            continue;
        }
        if (half_width < 0) throw ConfigError("table row before spacing header", lineno);
        Entry e;
        ls >> e.position >> e.relative_doppler;
        e.rsrp.resize(2 * half_width + 1);
        for (double& r : e.rsrp) ls >> r;
        if (!ls) throw ConfigError("table row has fewer than 2L+3 numbers", lineno);
        std::string extra;
        if (ls >> extra) throw ConfigError("table row has trailing fields", lineno);
        entries.push_back(std::move(e));
    }
    if (half_width < 0) throw ConfigError("missing spacing/half_width header");
    return DopplerTable(spacing, half_width, std::move(entries));
}

double estimate_doppler(const DopplerTable& table, const RsrpWindow& window, const ScenarioConfig& cfg,
                        std::optional<double> speed) {
    return table.nearest(window).relative_doppler * max_doppler(cfg, speed);
}

}  // namespace railrelay
