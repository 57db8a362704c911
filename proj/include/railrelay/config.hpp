// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "railrelay/optimizer.hpp"
#include "railrelay/scenario.hpp"

namespace railrelay {

enum class Scheme { Optimized, Constant, Average, Random, Csi };

const char* to_string(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view name);
std::vector<Scheme> all_schemes();

/// One scenario plus everything the harness needs to run it.
struct ExperimentConfig {
    ScenarioConfig scenario;
    SolverOptions solver;
    std::vector<Scheme> schemes = all_schemes();
    double csi_alpha = 0.2;
    /// Rician fading on the evaluation channel and the CSI snapshot.
    bool fading = false;

    void validate() const;

    /// Every field as sorted `key = value` lines with round-trip numbers.
    std::string canonical_text() const;
};

/// Parses flat `key = value` text. `#` starts a comment. Quantities accept
/// unit suffixes (km/h, m/s, dBm, mW, W, GHz, MHz, kHz, Hz, km, m, mm, dB,
/// deg). Errors carry the offending line number.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Value of a quantity as written in a config file, converted to SI units.
/// `key` selects the default unit and the accepted suffixes.
double parse_quantity(std::string_view key, std::string_view text);

/// Applies `key = value` on top of an existing config (used by sweeps).
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// FNV-1a over canonical_text(), as 16 hex digits.
std::string scenario_hash(const ExperimentConfig& cfg);

std::string format_number(double v);

}  // namespace railrelay
