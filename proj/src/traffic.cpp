// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include "railrelay/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "railrelay/error.hpp"
#include "railrelay/radio_link.hpp"

namespace railrelay {

AllocationMatrix AllocationMatrix::zeros(const ScenarioConfig& cfg) {
    AllocationMatrix p;
    p.relays_ = cfg.relays;
    p.segments_ = cfg.segment_count();
    p.values_.assign(static_cast<std::size_t>(p.relays_) * p.segments_, 0.0);
    p.mask_.assign(p.values_.size(), 0);
    for (int i = 0; i < p.relays_; ++i) {
        const SegmentRange r = active_segments(cfg, i);
        for (int j = r.first; j <= r.last; ++j) p.set_active(i, j, true);
    }
    return p;
}

std::size_t AllocationMatrix::index(int relay, int segment) const {
    if (relay < 0 || relay >= relays_ || segment < 0 || segment >= segments_) {
        throw DomainError("matrix index (" + std::to_string(relay) + ", " + std::to_string(segment) +
                          ") out of range");
    }
    return static_cast<std::size_t>(relay) * segments_ + segment;
}

double AllocationMatrix::column_sum(int segment) const {
    double s = 0.0;
    for (int i = 0; i < relays_; ++i) s += (*this)(i, segment);
    return s;
}

double AllocationMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

AllocationMatrix AllocationMatrix::scaled(double factor) const {
    AllocationMatrix out = *this;
    for (double& v : out.values_) v *= factor;
    return out;
}

ChannelTable::ChannelTable(const ScenarioConfig& cfg, const SegmentSchedule& sched, const ChannelOptions& opts)
    : relays_(cfg.relays), segments_(cfg.segment_count()), nodes_(cfg.quadrature_intervals + 1) {
    if (sched.segments() != segments_) throw DomainError("schedule does not match scenario");

    const LinkConstants consts = LinkConstants::from_config(cfg);
    const double speed = opts.true_speed.value_or(cfg.speed);
    const double coverage_tol = 1e-9 * cfg.cell_width;
    const double bw = cfg.bandwidth_factor ? cfg.bandwidth : 1.0;
    const int n = cfg.quadrature_intervals;

    mask_.assign(static_cast<std::size_t>(relays_) * segments_, 0);
    gain_.assign(mask_.size() * nodes_, 0.0);
    weight_.assign(gain_.size(), 0.0);

    for (int i = 0; i < relays_; ++i) {
        const SegmentRange r = active_segments(cfg, i);
        for (int j = r.first; j <= r.last; ++j) {
            mask_[static_cast<std::size_t>(i) * segments_ + j] = 1;
            const double a = sched.boundaries[j];
            const double h = sched.durations[j] / n;
            const std::size_t base = offset(i, j);
            for (int q = 0; q <= n; ++q) {
                const double t = a + q * h;
                const double x = speed * t - i * cfg.relay_spacing;
                double w = (q == 0 || q == n) ? 1.0 : (q % 2 == 1 ? 4.0 : 2.0);
                w *= h / 3.0 * bw;
                if (opts.true_speed &&
                    (x < -coverage_tol || x > cfg.cell_width + coverage_tol)) {
                    w = 0.0;
                }
                const double d = std::hypot(cfg.rrh_distance, x - 0.5 * cfg.cell_width);
                const double fade = opts.fading ? opts.fading(i, j, t) : 0.0;
                gain_[base + q] = snr_per_watt(d, fade, consts, cfg);
                weight_[base + q] = w;
            }
        }
    }
}

double ChannelTable::entry_data(int relay, int segment, double power) const {
    if (!mask_[static_cast<std::size_t>(relay) * segments_ + segment]) return 0.0;
    const std::size_t base = offset(relay, segment);
    double s = 0.0;
    for (int q = 0; q < nodes_; ++q) s += weight_[base + q] * std::log1p(gain_[base + q] * power);
    return s / std::numbers::ln2;
}

double ChannelTable::entry_derivative(int relay, int segment, double power) const {
    if (!mask_[static_cast<std::size_t>(relay) * segments_ + segment]) return 0.0;
    const std::size_t base = offset(relay, segment);
    double s = 0.0;
    for (int q = 0; q < nodes_; ++q) {
        const double g = gain_[base + q];
        s += weight_[base + q] * g / (1.0 + g * power);
    }
    return s / std::numbers::ln2;
}

double ChannelTable::total_data(const AllocationMatrix& p) const {
    double d = 0.0;
    for (int i = 0; i < relays_; ++i) {
        for (int j = 0; j < segments_; ++j) {
            if (p.active(i, j)) d += entry_data(i, j, p(i, j));
        }
    }
    return d;
}

AllocationMatrix ChannelTable::gradient(const AllocationMatrix& p) const {
    AllocationMatrix g = p;
    for (int i = 0; i < relays_; ++i) {
        for (int j = 0; j < segments_; ++j) g(i, j) = p.active(i, j) ? entry_derivative(i, j, p(i, j)) : 0.0;
    }
    return g;
}

std::vector<double> ChannelTable::data_per_segment(const AllocationMatrix& p) const {
    std::vector<double> out(segments_, 0.0);
    for (int j = 0; j < segments_; ++j) {
        for (int i = 0; i < relays_; ++i) {
            if (p.active(i, j)) out[j] += entry_data(i, j, p(i, j));
        }
    }
    return out;
}

std::vector<double> energy_per_segment(const AllocationMatrix& p, const SegmentSchedule& sched) {
    if (p.segments() != sched.segments()) throw DomainError("matrix shape does not match schedule");
    std::vector<double> out(sched.segments());
    for (int j = 0; j < sched.segments(); ++j) out[j] = sched.durations[j] * p.column_sum(j);
    return out;
}

double total_energy(const AllocationMatrix& p, const SegmentSchedule& sched) {
    double e = 0.0;
    for (double v : energy_per_segment(p, sched)) e += v;
    return e;
}

double segment_data(double power, int relay, int segment, const ScenarioConfig& cfg,
                    const SegmentSchedule& sched, const ChannelOptions& opts) {
    if (!active_segments(cfg, relay).contains(segment)) {
        throw DomainError("relay " + std::to_string(relay) + " is not in the cell during segment " +
                          std::to_string(segment));
    }
    if (!(power >= 0.0)) throw DomainError("transmit power must be nonnegative");
    return ChannelTable(cfg, sched, opts).entry_data(relay, segment, power);
}

namespace {

void check_allocation(const AllocationMatrix& p, const ScenarioConfig& cfg) {
    if (p.relays() != cfg.relays || p.segments() != cfg.segment_count()) {
        throw DomainError("allocation shape does not match scenario");
    }
}

}  // namespace

double total_data(const AllocationMatrix& p, const ScenarioConfig& cfg, const SegmentSchedule& sched,
                  const ChannelOptions& opts) {
    check_allocation(p, cfg);
    return ChannelTable(cfg, sched, opts).total_data(p);
}

AllocationMatrix grad_total_data(const AllocationMatrix& p, const ScenarioConfig& cfg,
                                 const SegmentSchedule& sched) {
    check_allocation(p, cfg);
    return ChannelTable(cfg, sched).gradient(p);
}

double energy_efficiency(double data_bits, double energy_j) {
    if (!(energy_j > 0.0)) throw DomainError("energy efficiency undefined for zero energy");
    return data_bits / energy_j;
}

double spectral_efficiency(double data_bits, const ScenarioConfig& cfg, const SegmentSchedule& sched) {
    return data_bits / (cfg.bandwidth * sched.total());
}

MetricsRecord evaluate_metrics(const AllocationMatrix& p, const ScenarioConfig& cfg,
                               const SegmentSchedule& sched, const ChannelOptions& opts) {
    check_allocation(p, cfg);
    const ChannelTable table(cfg, sched, opts);
    MetricsRecord m;
    m.energy_per_segment = energy_per_segment(p, sched);
    m.data_per_segment = table.data_per_segment(p);
    for (double e : m.energy_per_segment) m.energy += e;
    m.data = table.total_data(p);
    m.energy_efficiency = m.energy > 0.0 ? energy_efficiency(m.data, m.energy) : 0.0;
    m.spectral_efficiency = spectral_efficiency(m.data, cfg, sched);
    return m;
}

AllocationMatrix mirrored(const AllocationMatrix& p) {
    AllocationMatrix out = p;
    const int m = p.relays();
    const int s = p.segments();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < s; ++j) {
            out(i, j) = p(m - 1 - i, s - 1 - j);
            out.set_active(i, j, p.active(m - 1 - i, s - 1 - j));
        }
    }
    return out;
}

}  // namespace railrelay
