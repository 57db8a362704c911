// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#pragma once

#include <random>

#include "railrelay/scenario.hpp"

namespace railrelay {

inline constexpr double kSpeedOfLight = 299792458.0;

double watts_to_dbm(double watts);
double dbm_to_watts(double dbm);

// Directional antenna model: Gaussian main lobe in linear scale, flat
// sidelobes. Angles in degrees.

double max_antenna_gain(double beamwidth_deg);
double sidelobe_gain(double beamwidth_deg);

struct AntennaPattern {
    double beamwidth_deg = 30.0;
    double mainlobe_deg = 78.0;  // 2.6 * beamwidth
    double max_gain_db = 0.0;
    double sidelobe_db = 0.0;

    static AntennaPattern from_beamwidth(double beamwidth_deg);
};

double antenna_gain(const AntennaPattern& pattern, double theta_deg);

double path_loss(double distance, double wavelength, double exponent);
double noise_power_dbm(double bandwidth_hz, double noise_figure_db);

/// Distance-independent part of the link budget. Both ends are assumed
/// beam-aligned, so tx and rx gains are the boresight gain G0.
struct LinkConstants {
    double tx_gain_db = 0.0;
    double rx_gain_db = 0.0;
    double shadowing_db = 0.0;
    double noise_dbm = 0.0;

    static LinkConstants from_config(const ScenarioConfig& cfg);

    /// C = G_tx + G_rx - xi - P_noise (dB).
    double aggregate_db() const noexcept { return tx_gain_db + rx_gain_db - shadowing_db - noise_dbm; }
};

/// Received SNR in dB. `fading_db` is an attenuation: positive values lower
/// the SNR.
double snr_db(double tx_dbm, double distance, double fading_db, const LinkConstants& consts,
              const ScenarioConfig& cfg);

/// Linear SNR per watt of transmit power at `distance` (SNR = gain * P_W).
double snr_per_watt(double distance, double fading_db, const LinkConstants& consts,
                    const ScenarioConfig& cfg);

/// Rician envelope r = |A + sigma*(X + jY)|, X, Y ~ N(0, 1).
struct FadingModel {
    double los_amplitude = 0.0;  // A
    double scatter_sigma = 1.0;  // per-component standard deviation

    /// K = A^2 / (2 sigma^2), linear.
    double k_factor() const noexcept;
    double second_moment() const noexcept;
    double rms() const noexcept;

    /// Model with the given K factor (dB) and E[r^2] = `power`.
    static FadingModel from_k_factor_db(double k_db, double power = 1.0);

    void validate() const;
};

double sample_rician_envelope(const FadingModel& model, std::mt19937_64& rng);

/// Fading attenuation in dB relative to the RMS envelope: -20 log10(r / r_rms).
double fading_attenuation_db(const FadingModel& model, double envelope);

}  // namespace railrelay
