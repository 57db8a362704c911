// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include "railrelay/radio_link.hpp"

#include <cmath>
#include <numbers>

#include "railrelay/error.hpp"

namespace railrelay {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

double watts_to_dbm(double watts) {
    if (!(watts > 0.0)) throw DomainError("power must be positive to express in dBm");
    return 10.0 * std::log10(watts) + 30.0;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double max_antenna_gain(double beamwidth_deg) {
    if (!(beamwidth_deg > 0.0 && beamwidth_deg < 180.0)) {
        throw DomainError("half-power beamwidth must lie in (0, 180) degrees");
    }
    const double ratio = 1.6162 / std::sin(0.5 * beamwidth_deg * kDegToRad);
    return 10.0 * std::log10(ratio * ratio);
}

double sidelobe_gain(double beamwidth_deg) {
    if (!(beamwidth_deg > 0.0)) throw DomainError("half-power beamwidth must be positive");
    // Degrees inside the logarithm, as in the 802.15.3c reference pattern.
    return -0.4111 * std::log(beamwidth_deg) - 10.579;
}

AntennaPattern AntennaPattern::from_beamwidth(double beamwidth_deg) {
    AntennaPattern p;
    p.beamwidth_deg = beamwidth_deg;
    p.mainlobe_deg = 2.6 * beamwidth_deg;
    p.max_gain_db = max_antenna_gain(beamwidth_deg);
    p.sidelobe_db = sidelobe_gain(beamwidth_deg);
    return p;
}

double antenna_gain(const AntennaPattern& pattern, double theta_deg) {
    if (!(theta_deg >= 0.0 && theta_deg <= 180.0)) {
        throw DomainError("off-boresight angle must lie in [0, 180] degrees");
    }
    if (theta_deg <= 0.5 * pattern.mainlobe_deg) {
        const double u = 2.0 * theta_deg / pattern.beamwidth_deg;
        return pattern.max_gain_db - 3.01 * u * u;
    }
    return pattern.sidelobe_db;
}

double path_loss(double distance, double wavelength, double exponent) {
    if (!(distance > 0.0)) throw DomainError("distance must be positive");
    if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
    return 10.0 * exponent * std::log10(4.0 * std::numbers::pi * distance / wavelength);
}

double noise_power_dbm(double bandwidth_hz, double noise_figure_db) {
    if (!(bandwidth_hz > 0.0)) throw DomainError("bandwidth must be positive");
    return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

LinkConstants LinkConstants::from_config(const ScenarioConfig& cfg) {
    LinkConstants c;
    c.tx_gain_db = max_antenna_gain(cfg.beamwidth_deg);
    c.rx_gain_db = c.tx_gain_db;
    c.shadowing_db = cfg.shadowing_db;
    c.noise_dbm = noise_power_dbm(cfg.bandwidth, cfg.noise_figure_db);
    return c;
}

double snr_db(double tx_dbm, double distance, double fading_db, const LinkConstants& consts,
              const ScenarioConfig& cfg) {
    return tx_dbm - path_loss(distance, cfg.wavelength, cfg.pathloss_exponent) - fading_db +
           consts.aggregate_db();
}

double snr_per_watt(double distance, double fading_db, const LinkConstants& consts,
                    const ScenarioConfig& cfg) {
    // 1 W = 30 dBm.
    return std::pow(10.0, snr_db(30.0, distance, fading_db, consts, cfg) / 10.0);
}

double FadingModel::k_factor() const noexcept {
    return los_amplitude * los_amplitude / (2.0 * scatter_sigma * scatter_sigma);
}

double FadingModel::second_moment() const noexcept {
    return los_amplitude * los_amplitude + 2.0 * scatter_sigma * scatter_sigma;
}

double FadingModel::rms() const noexcept { return std::sqrt(second_moment()); }

FadingModel FadingModel::from_k_factor_db(double k_db, double power) {
    if (!(power > 0.0)) throw DomainError("fading power must be positive");
    const double k = std::pow(10.0, k_db / 10.0);
    FadingModel m;
    m.scatter_sigma = std::sqrt(power / (2.0 * (k + 1.0)));
    m.los_amplitude = std::sqrt(power * k / (k + 1.0));
    return m;
}

void FadingModel::validate() const {
    if (!(los_amplitude >= 0.0)) throw DomainError("line-of-sight amplitude must be nonnegative");
    if (!(scatter_sigma > 0.0)) throw DomainError("scatter sigma must be positive");
}

double sample_rician_envelope(const FadingModel& model, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double re = model.los_amplitude + model.scatter_sigma * gauss(rng);
    const double im = model.scatter_sigma * gauss(rng);
    return std::hypot(re, im);
}

double fading_attenuation_db(const FadingModel& model, double envelope) {
    if (!(envelope > 0.0)) throw DomainError("envelope must be positive");
    return -20.0 * std::log10(envelope / model.rms());
}

}  // namespace railrelay
