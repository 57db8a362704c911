// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace railrelay {

/// Rule producing the data floor D_min of the power-control problem.
///
/// By default the floor is a fraction `rho` of what the average allocation
/// delivers on the same scenario; `bits` replaces it with a fixed value.
struct DataFloorPolicy {
    double rho = 0.8;
    std::optional<double> bits;
};

/// Physical and numerical parameters of one traversal of a trackside cell.
///
/// All quantities are SI linear units (m, m/s, W, Hz) except the fields
/// suffixed `_db`/`_deg`. Unit conversion from km/h or dBm happens when a
/// configuration file is parsed, never here.
///
/// Coordinates: the track is the x axis, the cell spans [0, cell_width] and
/// the head relay sits at x = 0 at t = 0. The radio head is at
/// x = cell_width / 2, offset `rrh_distance` from the rail.
struct ScenarioConfig {
    double rrh_distance = 20.0;           // d0
    double cell_width = 200.0;            // d_l
    double relay_spacing = 25.0;          // d_MR
    int relays = 4;                       // M
    int bins = 6;                         // N, location bins while all relays are covered
    double speed = 300.0 / 3.6;           // v
    double power_budget = 10.0;           // P_T per segment, W
    double bandwidth = 2.16e9;            // B
    double noise_figure_db = 6.0;
    double pathloss_exponent = 2.0;
    double wavelength = 0.005;
    double shadowing_db = 10.0;           // xi
    double beamwidth_deg = 30.0;          // theta_-3dB
    double rician_k_db = 10.0;
    DataFloorPolicy data_floor{};
    /// Multiply the Shannon rate by B so data is in bits. When false the
    /// integral is the bare log2(1 + SNR) and data is in bit/s/Hz * s.
    bool bandwidth_factor = true;
    /// Composite-Simpson subintervals per segment (even).
    int quadrature_intervals = 32;
    std::uint64_t seed = 1;

    /// Throws ConfigError if any invariant is violated.
    void validate() const;

    int segment_count() const noexcept { return 2 * relays + bins - 2; }
    double traversal_length() const noexcept { return cell_width + (relays - 1) * relay_spacing; }
    double traversal_time() const noexcept { return traversal_length() / speed; }
};

/// Time boundaries t_0..t_{2M+N-2} of the traversal and the durations T_j
/// between them. Segment j (0-based) is [boundaries[j], boundaries[j+1]).
struct SegmentSchedule {
    std::vector<double> boundaries;
    std::vector<double> durations;

    int segments() const noexcept { return static_cast<int>(durations.size()); }
    double total() const noexcept { return boundaries.empty() ? 0.0 : boundaries.back(); }
};

/// Inclusive range of segment indices.
struct SegmentRange {
    int first = 0;
    int last = -1;

    bool contains(int j) const noexcept { return j >= first && j <= last; }
    int size() const noexcept { return last - first + 1; }
};

// Relay and segment indices are 0-based throughout the library: relay 0 is
// the head of the train, segment 0 starts when it crosses the cell edge.

SegmentSchedule segment_boundaries(const ScenarioConfig& cfg);

double head_position(const ScenarioConfig& cfg, double t);
double mr_position(const ScenarioConfig& cfg, int relay, double t);
double mr_rrh_distance(const ScenarioConfig& cfg, int relay, double t);

/// Number of relays inside the cell during segment j.
int mrs_in_cell(const ScenarioConfig& cfg, int segment);

/// Segments during which `relay` is covered: [relay, relay + M + N - 2].
SegmentRange active_segments(const ScenarioConfig& cfg, int relay);

}  // namespace railrelay
