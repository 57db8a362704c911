// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include "railrelay/scenario.hpp"

#include <cmath>
#include <string>

#include "railrelay/error.hpp"

namespace railrelay {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError(std::string(name) + " must be positive and finite");
    }
}

void check_relay(const ScenarioConfig& cfg, int relay) {
    if (relay < 0 || relay >= cfg.relays) {
        throw DomainError("relay index " + std::to_string(relay) + " outside [0, " +
                          std::to_string(cfg.relays - 1) + "]");
    }
}

}  // namespace

void ScenarioConfig::validate() const {
    require_positive(rrh_distance, "d0");
    require_positive(cell_width, "d_l");
    require_positive(relay_spacing, "d_MR");
    require_positive(speed, "v");
    require_positive(power_budget, "P_T");
    require_positive(bandwidth, "B");
    require_positive(pathloss_exponent, "n_pl");
    require_positive(wavelength, "lambda");
    if (relays < 1) throw ConfigError("M must be at least 1");
    if (bins < 1) throw ConfigError("N must be at least 1");
    if (!(beamwidth_deg > 0.0 && beamwidth_deg < 180.0)) {
        throw ConfigError("theta_3db must lie in (0, 180) degrees");
    }
    if (!(cell_width > (relays - 1) * relay_spacing)) {
        throw ConfigError("d_l must exceed (M-1)*d_MR so that all relays fit in the cell");
    }
    if (!(data_floor.rho > 0.0 && data_floor.rho <= 1.0)) {
        throw ConfigError("D_min_rho must lie in (0, 1]");
    }
    if (data_floor.bits && !(*data_floor.bits >= 0.0)) {
        throw ConfigError("D_min_bits must be nonnegative");
    }
    if (quadrature_intervals < 2 || quadrature_intervals % 2 != 0) {
        throw ConfigError("quadrature must be an even number >= 2");
    }
}

SegmentSchedule segment_boundaries(const ScenarioConfig& cfg) {
    cfg.validate();
    const int m = cfg.relays;
    const int n = cfg.bins;
    const double dmr = cfg.relay_spacing;
    const double dl = cfg.cell_width;
    const double v = cfg.speed;

    SegmentSchedule s;
    s.boundaries.reserve(2 * m + n - 1);
    s.boundaries.push_back(0.0);
    // Closed form of the head-relay crossing times, one branch per stage.
    for (int i = 1; i <= 2 * m + n - 2; ++i) {
        double t;
        if (i <= m - 1) {
            t = i * dmr / v;
        } else if (i <= m + n - 1) {
            const double a = double(n + m - i - 1) * (m - 1);
            const double b = double(i - m + 1);
            t = (a * dmr + b * dl) / (v * n);
        } else {
            const double c = double(i - m - n + 1);
            t = (c * dmr + dl) / v;
        }
        s.boundaries.push_back(t);
    }
    s.durations.resize(s.boundaries.size() - 1);
    for (std::size_t j = 0; j + 1 < s.boundaries.size(); ++j) {
        s.durations[j] = s.boundaries[j + 1] - s.boundaries[j];
    }
    return s;
}

double head_position(const ScenarioConfig& cfg, double t) {
    if (t < 0.0) throw DomainError("time must be nonnegative");
    return cfg.speed * t;
}

double mr_position(const ScenarioConfig& cfg, int relay, double t) {
    check_relay(cfg, relay);
    return head_position(cfg, t) - relay * cfg.relay_spacing;
}

double mr_rrh_distance(const ScenarioConfig& cfg, int relay, double t) {
    const double dx = mr_position(cfg, relay, t) - 0.5 * cfg.cell_width;
    return std::hypot(cfg.rrh_distance, dx);
}

int mrs_in_cell(const ScenarioConfig& cfg, int segment) {
    const int m = cfg.relays;
    const int n = cfg.bins;
    if (segment < 0 || segment >= cfg.segment_count()) {
        throw DomainError("segment index " + std::to_string(segment) + " out of range");
    }
    if (segment < m - 1) return segment + 1;
    if (segment <= m + n - 2) return m;
    return 2 * m + n - 2 - segment;
}

SegmentRange active_segments(const ScenarioConfig& cfg, int relay) {
    check_relay(cfg, relay);
    return {relay, relay + cfg.relays + cfg.bins - 2};
}

}  // namespace railrelay
