// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "railrelay/scenario.hpp"

namespace railrelay {

/// M x (2M+N-2) matrix indexed (relay, segment) with an activity mask.
///
/// The mask is fixed by the scenario: entry (i, j) is active exactly when
/// relay i is inside the cell during segment j. Transmit powers are in watts;
/// the same container also carries per-entry derivatives.
class AllocationMatrix {
public:
    AllocationMatrix() = default;

    /// All-zero matrix with the scenario's activity mask.
    static AllocationMatrix zeros(const ScenarioConfig& cfg);

    int relays() const noexcept { return relays_; }
    int segments() const noexcept { return segments_; }

    double& operator()(int relay, int segment) { return values_[index(relay, segment)]; }
    double operator()(int relay, int segment) const { return values_[index(relay, segment)]; }

    bool active(int relay, int segment) const { return mask_[index(relay, segment)] != 0; }
    void set_active(int relay, int segment, bool on) { mask_[index(relay, segment)] = on ? 1 : 0; }

    double column_sum(int segment) const;
    double max_abs() const;

    /// Same mask, every value multiplied by `factor`.
    AllocationMatrix scaled(double factor) const;

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    bool same_shape(const AllocationMatrix& other) const noexcept {
        return relays_ == other.relays_ && segments_ == other.segments_;
    }

    bool operator==(const AllocationMatrix&) const = default;

private:
    std::size_t index(int relay, int segment) const;

    int relays_ = 0;
    int segments_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

/// Fading attenuation (dB) seen by `relay` at time t within `segment`.
using FadingTrace = std::function<double(int relay, int segment, double t)>;

/// Options for evaluating the data integral away from the planner's ideal.
struct ChannelOptions {
    /// Attenuation added to every quadrature node; none means deterministic.
    FadingTrace fading;
    /// Kinematics used to place the relays. When set, the relays move at this
    /// speed while power follows the schedule's time segments, and a node only
    /// delivers data if its relay is inside [0, d_l].
    std::optional<double> true_speed;
};

/// Quadrature tabulation of the per-entry rate integrand.
///
/// For every active (i, j) the composite-Simpson nodes over segment j hold
/// the linear SNR per watt and the weight B * w (or w without the bandwidth
/// factor). Data and its gradient then cost one log per node.
class ChannelTable {
public:
    ChannelTable(const ScenarioConfig& cfg, const SegmentSchedule& sched, const ChannelOptions& opts = {});

    int relays() const noexcept { return relays_; }
    int segments() const noexcept { return segments_; }
    int nodes() const noexcept { return nodes_; }

    double entry_data(int relay, int segment, double power) const;
    double entry_derivative(int relay, int segment, double power) const;

    double total_data(const AllocationMatrix& p) const;
    AllocationMatrix gradient(const AllocationMatrix& p) const;

    /// Data delivered in each segment (summed over relays).
    std::vector<double> data_per_segment(const AllocationMatrix& p) const;

private:
    std::size_t offset(int relay, int segment) const {
        return (static_cast<std::size_t>(relay) * segments_ + segment) * nodes_;
    }

    int relays_ = 0;
    int segments_ = 0;
    int nodes_ = 0;
    std::vector<std::uint8_t> mask_;
    std::vector<double> gain_;    // SNR per watt at each node
    std::vector<double> weight_;  // quadrature weight * bandwidth factor
};

double total_energy(const AllocationMatrix& p, const SegmentSchedule& sched);

double segment_data(double power, int relay, int segment, const ScenarioConfig& cfg,
                    const SegmentSchedule& sched, const ChannelOptions& opts = {});

double total_data(const AllocationMatrix& p, const ScenarioConfig& cfg, const SegmentSchedule& sched,
                  const ChannelOptions& opts = {});

AllocationMatrix grad_total_data(const AllocationMatrix& p, const ScenarioConfig& cfg,
                                 const SegmentSchedule& sched);

double energy_efficiency(double data_bits, double energy_j);
double spectral_efficiency(double data_bits, const ScenarioConfig& cfg, const SegmentSchedule& sched);

struct MetricsRecord {
    double energy = 0.0;               // J
    double data = 0.0;                 // bits
    double energy_efficiency = 0.0;    // bits/J, 0 when energy is 0
    double spectral_efficiency = 0.0;  // bits/s/Hz
    std::vector<double> energy_per_segment;
    std::vector<double> data_per_segment;
};

MetricsRecord evaluate_metrics(const AllocationMatrix& p, const ScenarioConfig& cfg,
                               const SegmentSchedule& sched, const ChannelOptions& opts = {});

/// Energy with the power held for `sched`'s durations; used when the planned
/// and the realised kinematics differ.
std::vector<double> energy_per_segment(const AllocationMatrix& p, const SegmentSchedule& sched);

/// Mirror image of the traversal: relay i -> M-1-i, segment j -> S-1-j.
AllocationMatrix mirrored(const AllocationMatrix& p);

}  // namespace railrelay
