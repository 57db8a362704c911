// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#pragma once

#include <random>
#include <string>
#include <vector>

#include "railrelay/radio_link.hpp"
#include "railrelay/scenario.hpp"
#include "railrelay/traffic.hpp"

namespace railrelay {

/// Linear channel power gains |h_ij|^2 per (relay, segment), sampled at the
/// temporal midpoint of each segment. Inactive entries are 0.
struct ChannelSnapshot {
    AllocationMatrix gain;
};

/// Deterministic snapshot, or one with a Rician draw per entry when `fading`
/// and `rng` are given.
ChannelSnapshot channel_snapshot(const ScenarioConfig& cfg, const SegmentSchedule& sched,
                                 const FadingModel* fading = nullptr, std::mt19937_64* rng = nullptr);

/// P_T / M to every relay in the cell, whatever the occupancy.
AllocationMatrix constant_alloc(const ScenarioConfig& cfg, const SegmentSchedule& sched);

/// P_T split equally among the relays in the cell.
AllocationMatrix average_alloc(const ScenarioConfig& cfg, const SegmentSchedule& sched);

/// Each column is a uniform draw from the simplex scaled to P_T.
AllocationMatrix random_alloc(const ScenarioConfig& cfg, const SegmentSchedule& sched, std::mt19937_64& rng);

/// Inverse channel weighting: P_ij proportional to (|h_ij|^2)^-alpha, columns
/// normalised to P_T. Weaker links receive more power.
AllocationMatrix csi_alloc(const ScenarioConfig& cfg, const SegmentSchedule& sched, const ChannelSnapshot& snap,
                           double alpha);

struct Violation {
    enum class Kind { Shape, Mask, Negative, Budget };

    Kind kind = Kind::Shape;
    int relay = -1;    // -1 when the violation concerns a whole column
    int segment = -1;
    double value = 0.0;

    std::string describe() const;
};

/// Checks mask, sign and per-segment budget (column sum <= P_T + tol).
/// Violations are returned, not thrown.
std::vector<Violation> validate_alloc(const AllocationMatrix& p, const ScenarioConfig& cfg,
                                      const SegmentSchedule& sched, double tol);

}  // namespace railrelay
