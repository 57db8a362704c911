// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#pragma once

#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "railrelay/scenario.hpp"

namespace railrelay {

/// 2L+1 RSRP samples (dBm) centred on `center`, spaced `spacing` metres.
struct RsrpWindow {
    double center = 0.0;
    double spacing = 1.0;
    std::vector<double> values;

    int half_width() const noexcept { return static_cast<int>(values.size() / 2); }
    double position(int k) const noexcept { return center + (k - half_width()) * spacing; }
};

/// RSRP of the head relay at track position x (dBm), transmit power P_T.
double rsrp_at(const ScenarioConfig& cfg, double x, double fading_db = 0.0);

double carrier_frequency(const ScenarioConfig& cfg);

/// f_c v / c.
double max_doppler(const ScenarioConfig& cfg, std::optional<double> speed = std::nullopt);

/// Doppler shift at x divided by the maximum shift; speed independent.
double relative_doppler(const ScenarioConfig& cfg, double x);

/// Radial Doppler shift at x, positive while approaching the radio head.
double true_doppler(const ScenarioConfig& cfg, double x);

/// Window at `center`; with `noise_db_std` > 0 each sample gets an
/// independent Gaussian dB perturbation from `rng`.
RsrpWindow make_window(const ScenarioConfig& cfg, double center, double spacing, int half_width,
                       double noise_db_std = 0.0, std::mt19937_64* rng = nullptr);

/// Noiseless RSRP windows with their relative Doppler shift, sampled every
/// `spacing` metres at cell centres x_k = (k + 1/2) spacing inside [0, d_l].
/// Positions whose window would leave the cell are dropped.
class DopplerTable {
public:
    struct Entry {
        double position = 0.0;
        double relative_doppler = 0.0;  // in [-1, 1]
        std::vector<double> rsrp;
    };

    DopplerTable() = default;
    DopplerTable(double spacing, int half_width, std::vector<Entry> entries);

    static DopplerTable build(const ScenarioConfig& cfg, double spacing = 1.0, int half_width = 5);

    double spacing() const noexcept { return spacing_; }
    int half_width() const noexcept { return half_width_; }
    int window_length() const noexcept { return 2 * half_width_ + 1; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    /// Entry minimising the Euclidean distance to `window`.
    const Entry& nearest(const RsrpWindow& window) const;

    /// Whitespace-delimited text: two comment lines, then one row per entry
    /// with position, f_rel and the 2L+1 RSRP values.
    void write(std::ostream& os) const;
    static DopplerTable read(std::istream& is);

private:
    double spacing_ = 1.0;
    int half_width_ = 0;
    std::vector<Entry> entries_;
};

/// f_rel of the nearest table entry times f_c v / c. `speed` overrides the
/// scenario speed (e.g. with an estimated velocity).
double estimate_doppler(const DopplerTable& table, const RsrpWindow& window, const ScenarioConfig& cfg,
                        std::optional<double> speed = std::nullopt);

}  // namespace railrelay
