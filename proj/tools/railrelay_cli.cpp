// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "railrelay/config.hpp"
#include "railrelay/doppler.hpp"
#include "railrelay/error.hpp"
#include "railrelay/harness.hpp"

namespace fs = std::filesystem;
using namespace railrelay;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitUnconverged = 3;

fs::path output_dir() {
    const char* env = std::getenv("RAILRELAY_OUT");
    fs::path dir = env && *env ? fs::path(env) : fs::path(".");
    fs::create_directories(dir);
    return dir;
}

fs::path resolve_output(const std::string& flag, const std::string& fallback) {
    if (!flag.empty()) return fs::path(flag);
    return output_dir() / fallback;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        const auto a = item.find_first_not_of(' ');
        const auto b = item.find_last_not_of(' ');
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

void print_summary(const std::vector<RunRecord>& rows) {
    std::printf("%-6s %-10s %10s %-10s %12s %14s %14s %5s\n", "kind", "param", "value", "scheme", "energy_J",
                "EE_bits_per_J", "SE", "conv");
    for (const RunRecord& r : rows) {
        if (r.kind != "mean" && rows.size() > 20) continue;
        std::printf("%-6s %-10s %10.4g %-10s %12.6g %14.6g %14.6g %5s%s%s\n", r.kind.c_str(), r.param.c_str(),
                    r.value, to_string(r.scheme), r.energy, r.energy_efficiency, r.spectral_efficiency,
                    r.converged ? "yes" : "no", r.error.empty() ? "" : "  ", r.error.c_str());
    }
}

int finish(const std::vector<RunRecord>& rows, const fs::path& path, double seconds) {
    std::ofstream out(path);
    write_csv(out, rows);
    out.close();
    if (!out) {
        std::cerr << "error: failed writing " << path << '\n';
        return 1;
    }
    print_summary(rows);
    std::cerr << "wrote " << path.string() << " (" << rows.size() << " rows, " << seconds << " s)\n";
    if (!all_converged(rows)) {
        std::cerr << "warning: at least one optimized point did not converge\n";
        return kExitUnconverged;
    }
    return 0;
}

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power allocation for train-roof mobile relays under a trackside mmWave radio head"};
    app.require_subcommand(1);
    int jobs = 0;
    app.add_option("-j,--jobs", jobs, "Worker threads for sweeps (0: all cores)");

    std::string config;
    std::string out_file;

    auto* run = app.add_subcommand("run", "Run all configured schemes on one scenario");
    run->add_option("config", config, "Scenario config file")->required();
    run->add_option("-o,--output", out_file, "CSV path (default $RAILRELAY_OUT/run.csv)");

    std::string param;
    std::string values;
    int trials = 1;
    auto* sw = app.add_subcommand("sweep", "Sweep one parameter across a value list");
    sw->add_option("config", config, "Scenario config file")->required();
    sw->add_option("--param", param, "M, d_l, v, P_T or sigma_v")->required();
    sw->add_option("--values", values, "Comma-separated values, units allowed (e.g. 250km/h,300km/h)")
        ->required();
    sw->add_option("--trials", trials, "Trials per value")->check(CLI::PositiveNumber);
    sw->add_option("-o,--output", out_file, "CSV path (default $RAILRELAY_OUT/sweep_<param>.csv)");

    std::string sigmas;
    auto* mc = app.add_subcommand("mc-velocity", "Monte Carlo study of speed estimation error");
    mc->add_option("config", config, "Scenario config file")->required();
    mc->add_option("--sigmas", sigmas, "Comma-separated error std values in m/s")->required();
    mc->add_option("--trials", trials, "Trials per sigma")->required()->check(CLI::PositiveNumber);
    mc->add_option("-o,--output", out_file, "CSV path (default $RAILRELAY_OUT/mc_velocity.csv)");

    std::string csv;
    std::string figure;
    auto* plot = app.add_subcommand("plot-data", "Reshape a sweep CSV into per-figure series files");
    plot->add_option("csv", csv, "CSV written by sweep or mc-velocity")->required();
    plot->add_option("--figure", figure, "Figure id, e.g. E-vs-dl, EE-vs-M")->required();

    double spacing = 1.0;
    int half_width = 5;
    auto* table = app.add_subcommand("doppler-table", "Export the RSRP/Doppler lookup table");
    table->add_option("config", config, "Scenario config file")->required();
    table->add_option("--spacing", spacing, "Sample spacing in m")->check(CLI::PositiveNumber);
    table->add_option("--half-width", half_width, "Samples on each side of the centre")
        ->check(CLI::NonNegativeNumber);
    table->add_option("-o,--output", out_file, "Table path (default $RAILRELAY_OUT/doppler_table.txt)");

    CLI11_PARSE(app, argc, argv);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (*run) {
            const ExperimentConfig cfg = load_config(config);
            const auto rows = run_scenario(cfg);
            return finish(rows, resolve_output(out_file, "run.csv"), since(t0));
        }
        if (*sw) {
            const ExperimentConfig cfg = load_config(config);
            SweepSpec spec{param, split_list(values), trials, jobs};
            const auto rows = sweep(cfg, spec);
            return finish(rows, resolve_output(out_file, "sweep_" + param + ".csv"), since(t0));
        }
        if (*mc) {
            const ExperimentConfig cfg = load_config(config);
            std::vector<double> list;
            for (const std::string& s : split_list(sigmas)) list.push_back(parse_quantity("v", s));
            const auto rows = monte_carlo_velocity_error(cfg, list, trials, jobs);
            return finish(rows, resolve_output(out_file, "mc_velocity.csv"), since(t0));
        }
        if (*plot) {
            std::ifstream in(csv);
            if (!in) throw ConfigError("cannot open CSV '" + csv + "'");
            for (const std::string& path : emit_plot_data(read_csv(in), figure, output_dir().string())) {
                std::cout << path << '\n';
            }
            return 0;
        }
        if (*table) {
            const ExperimentConfig cfg = load_config(config);
            const DopplerTable t = DopplerTable::build(cfg.scenario, spacing, half_width);
            const fs::path path = resolve_output(out_file, "doppler_table.txt");
            std::ofstream out(path);
            t.write(out);
            std::cerr << "wrote " << path.string() << " (" << t.entries().size() << " entries, f_dmax "
                      << max_doppler(cfg.scenario) << " Hz)\n";
            return out ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
