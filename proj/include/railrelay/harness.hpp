// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "railrelay/config.hpp"

namespace railrelay {

/// One scheme evaluated at one sweep point and trial. `kind` is "point" for
/// single trials and "mean" for rows aggregated over trials.
struct RunRecord {
    std::string kind = "point";
    std::string hash;
    std::string param = "none";
    double value = 0.0;
    int trial = 0;  // trial index; number of aggregated trials on mean rows
    Scheme scheme = Scheme::Optimized;
    double planned_speed = 0.0;  // m/s, the speed the allocation was computed for
    double energy = 0.0;         // J
    double data = 0.0;           // bits
    double energy_efficiency = 0.0;
    double spectral_efficiency = 0.0;
    double d_min = 0.0;
    bool meets_floor = false;
    bool converged = true;  // always true for the baselines
    int cycles = 0;
    double residual = 0.0;
    double kkt = 0.0;
    double wall_seconds = 0.0;  // not persisted
    std::string error;
};

/// Position of a run inside a study; selects the RNG streams.
struct PointSpec {
    std::string param = "none";
    double value = 0.0;
    int point = 0;
    int trial = 0;
    double sigma_v = 0.0;  // std of the speed estimation error, m/s
};

/// Runs every configured scheme once. The allocation is planned for the
/// speed v + |e|, e ~ N(0, sigma_v^2); energy, data and SE are evaluated with
/// the configured speed. Scheme failures are reported in `error`.
std::vector<RunRecord> run_point(const ExperimentConfig& cfg, const PointSpec& spec);

std::vector<RunRecord> run_scenario(const ExperimentConfig& cfg);

struct SweepSpec {
    std::string param;                // M, d_l, v, P_T or sigma_v
    std::vector<std::string> values;  // config syntax, units allowed
    int trials = 1;
    int jobs = 0;                     // 0: hardware concurrency

    void validate() const;
};

/// Per-trial rows in (value, trial, scheme) order followed by one mean row
/// per (value, scheme).
std::vector<RunRecord> sweep(const ExperimentConfig& cfg, const SweepSpec& spec);

std::vector<RunRecord> monte_carlo_velocity_error(const ExperimentConfig& cfg, const std::vector<double>& sigmas,
                                                  int trials, int jobs = 0);

/// Mean rows over trials for each (param, value, scheme).
std::vector<RunRecord> aggregate(const std::vector<RunRecord>& rows);

/// True when no optimized row failed or stopped before convergence.
bool all_converged(const std::vector<RunRecord>& rows);

void write_csv(std::ostream& os, const std::vector<RunRecord>& rows);
std::vector<RunRecord> read_csv(std::istream& is);

/// Known figure ids: {E,EE,SE,D}-vs-{M,dl,v,PT,sigma}.
std::vector<std::string> figure_ids();

/// Writes `<dir>/<figure>.dat` (x then one column per scheme, from mean rows)
/// and `<dir>/<figure>.manifest`. Returns the paths written.
std::vector<std::string> emit_plot_data(const std::vector<RunRecord>& rows, const std::string& figure,
                                        const std::string& dir);

}  // namespace railrelay
