// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "railrelay/allocators.hpp"
#include "railrelay/config.hpp"
#include "railrelay/doppler.hpp"
#include "railrelay/error.hpp"
#include "railrelay/harness.hpp"
#include "railrelay/optimizer.hpp"
#include "railrelay/radio_link.hpp"
#include "railrelay/scenario.hpp"
#include "railrelay/traffic.hpp"

namespace py = pybind11;
using namespace railrelay;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const AllocationMatrix& p) {
    Array out({p.relays(), p.segments()});
    auto v = out.mutable_unchecked<2>();
    for (int i = 0; i < p.relays(); ++i) {
        for (int j = 0; j < p.segments(); ++j) v(i, j) = p(i, j);
    }
    return out;
}

// Entries outside a relay's active window must be zero.
AllocationMatrix from_array(const Array& a, const ScenarioConfig& cfg) {
    AllocationMatrix p = AllocationMatrix::zeros(cfg);
    if (a.ndim() != 2 || a.shape(0) != p.relays() || a.shape(1) != p.segments()) {
        throw DomainError("power array must have shape (" + std::to_string(p.relays()) + ", " +
                          std::to_string(p.segments()) + ")");
    }
    auto v = a.unchecked<2>();
    for (int i = 0; i < p.relays(); ++i) {
        for (int j = 0; j < p.segments(); ++j) {
            if (p.active(i, j)) {
                p(i, j) = v(i, j);
            } else if (v(i, j) != 0.0) {
                throw DomainError("power at relay " + std::to_string(i) + ", segment " + std::to_string(j) +
                                  " lies outside the relay's window");
            }
        }
    }
    return p;
}

py::dict metrics_dict(const MetricsRecord& m) {
    py::dict d;
    d["energy"] = m.energy;
    d["data"] = m.data;
    d["energy_efficiency"] = m.energy_efficiency;
    d["spectral_efficiency"] = m.spectral_efficiency;
    d["energy_per_segment"] = m.energy_per_segment;
    d["data_per_segment"] = m.data_per_segment;
    return d;
}

std::string csv_text(const std::vector<RunRecord>& rows) {
    std::ostringstream os;
    write_csv(os, rows);
    return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Power allocation for train-roof mobile relays under a trackside mmWave radio head.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("rrh_distance", &ScenarioConfig::rrh_distance)
        .def_readwrite("cell_width", &ScenarioConfig::cell_width)
        .def_readwrite("relay_spacing", &ScenarioConfig::relay_spacing)
        .def_readwrite("relays", &ScenarioConfig::relays)
        .def_readwrite("bins", &ScenarioConfig::bins)
        .def_readwrite("speed", &ScenarioConfig::speed)
        .def_readwrite("power_budget", &ScenarioConfig::power_budget)
        .def_readwrite("bandwidth", &ScenarioConfig::bandwidth)
        .def_readwrite("noise_figure_db", &ScenarioConfig::noise_figure_db)
        .def_readwrite("pathloss_exponent", &ScenarioConfig::pathloss_exponent)
        .def_readwrite("wavelength", &ScenarioConfig::wavelength)
        .def_readwrite("shadowing_db", &ScenarioConfig::shadowing_db)
        .def_readwrite("beamwidth_deg", &ScenarioConfig::beamwidth_deg)
        .def_readwrite("rician_k_db", &ScenarioConfig::rician_k_db)
        .def_readwrite("bandwidth_factor", &ScenarioConfig::bandwidth_factor)
        .def_readwrite("quadrature_intervals", &ScenarioConfig::quadrature_intervals)
        .def_readwrite("seed", &ScenarioConfig::seed)
        .def_property(
            "data_floor_rho", [](const ScenarioConfig& c) { return c.data_floor.rho; },
            [](ScenarioConfig& c, double rho) { c.data_floor.rho = rho; })
        .def_property(
            "data_floor_bits", [](const ScenarioConfig& c) { return c.data_floor.bits; },
            [](ScenarioConfig& c, std::optional<double> bits) { c.data_floor.bits = bits; })
        .def("validate", &ScenarioConfig::validate)
        .def_property_readonly("segment_count", &ScenarioConfig::segment_count)
        .def_property_readonly("traversal_time", &ScenarioConfig::traversal_time);

    py::enum_<BudgetMode>(m, "BudgetMode")
        .value("INEQUALITY", BudgetMode::Inequality)
        .value("EQUALITY", BudgetMode::Equality);

    py::class_<SolverOptions>(m, "SolverOptions")
        .def(py::init<>())
        .def_readwrite("sigma0", &SolverOptions::sigma0)
        .def_readwrite("growth", &SolverOptions::growth)
        .def_readwrite("fixed_step", &SolverOptions::fixed_step)
        .def_readwrite("eps", &SolverOptions::eps)
        .def_readwrite("max_cycles", &SolverOptions::max_cycles)
        .def_readwrite("max_inner", &SolverOptions::max_inner)
        .def_readwrite("budget", &SolverOptions::budget)
        .def("validate", &SolverOptions::validate);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("scenario", &ExperimentConfig::scenario)
        .def_readwrite("solver", &ExperimentConfig::solver)
        .def_readwrite("csi_alpha", &ExperimentConfig::csi_alpha)
        .def_readwrite("fading", &ExperimentConfig::fading)
        .def_property(
            "schemes",
            [](const ExperimentConfig& c) {
                std::vector<std::string> names;
                for (Scheme s : c.schemes) names.emplace_back(to_string(s));
                return names;
            },
            [](ExperimentConfig& c, const std::vector<std::string>& names) {
                std::vector<Scheme> out;
                for (const std::string& n : names) {
                    const auto s = parse_scheme(n);
                    if (!s) throw ConfigError("unknown scheme '" + n + "'");
                    out.push_back(*s);
                }
                c.schemes = std::move(out);
            })
        .def("validate", &ExperimentConfig::validate)
        .def("canonical_text", &ExperimentConfig::canonical_text)
        .def("scenario_hash", [](const ExperimentConfig& c) { return scenario_hash(c); });

    m.def("load_config", &load_config, py::arg("path"));
    m.def("parse_config", [](const std::string& text) { return parse_config_text(text); }, py::arg("text"));

    py::class_<SegmentSchedule>(m, "SegmentSchedule")
        .def_readonly("boundaries", &SegmentSchedule::boundaries)
        .def_readonly("durations", &SegmentSchedule::durations);
    m.def("segment_boundaries", &segment_boundaries, py::arg("scenario"));
    m.def("mrs_in_cell", &mrs_in_cell, py::arg("scenario"), py::arg("segment"));
    m.def(
        "active_segments",
        [](const ScenarioConfig& c, int relay) {
            const SegmentRange r = active_segments(c, relay);
            return py::make_tuple(r.first, r.last);
        },
        py::arg("scenario"), py::arg("relay"));

    m.def("max_antenna_gain", &max_antenna_gain, py::arg("beamwidth_deg"));
    m.def("path_loss", &path_loss, py::arg("distance"), py::arg("wavelength"), py::arg("exponent"));
    m.def("noise_power_dbm", &noise_power_dbm, py::arg("bandwidth_hz"), py::arg("noise_figure_db"));
    m.def(
        "rician_samples",
        [](double k_db, std::size_t n, std::uint64_t seed) {
            const FadingModel model = FadingModel::from_k_factor_db(k_db);
            std::mt19937_64 rng(seed);
            std::vector<double> out(n);
            for (double& r : out) r = sample_rician_envelope(model, rng);
            return out;
        },
        py::arg("k_db"), py::arg("n"), py::arg("seed") = 1, "Rician envelopes with unit second moment.");

    m.def(
        "constant_alloc",
        [](const ScenarioConfig& c) { return to_array(constant_alloc(c, segment_boundaries(c))); },
        py::arg("scenario"));
    m.def(
        "average_alloc",
        [](const ScenarioConfig& c) { return to_array(average_alloc(c, segment_boundaries(c))); },
        py::arg("scenario"));
    m.def(
        "random_alloc",
        [](const ScenarioConfig& c, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            return to_array(random_alloc(c, segment_boundaries(c), rng));
        },
        py::arg("scenario"), py::arg("seed"));
    m.def(
        "evaluate",
        [](const Array& power, const ScenarioConfig& c) {
            return metrics_dict(evaluate_metrics(from_array(power, c), c, segment_boundaries(c)));
        },
        py::arg("power"), py::arg("scenario"), "Energy, data, EE and SE of an allocation.");
    m.def("data_floor", [](const ScenarioConfig& c) { return data_floor(c, segment_boundaries(c)); },
          py::arg("scenario"));

    py::class_<SolveResult>(m, "SolveResult")
        .def_property_readonly("power", [](const SolveResult& r) { return to_array(r.power); })
        .def_readonly("converged", &SolveResult::converged)
        .def_readonly("monotone", &SolveResult::monotone)
        .def_readonly("cycles", &SolveResult::cycles)
        .def_readonly("d_min", &SolveResult::d_min)
        .def_readonly("residual", &SolveResult::residual)
        .def_readonly("kkt", &SolveResult::kkt)
        .def_readonly("multipliers", &SolveResult::multipliers);
    m.def(
        "solve",
        [](const ScenarioConfig& c, const SolverOptions& opts, std::optional<double> d_min) {
            const SegmentSchedule sched = segment_boundaries(c);
            return solve(c, sched, average_alloc(c, sched), opts, d_min);
        },
        py::arg("scenario"), py::arg("options") = SolverOptions{}, py::arg("d_min") = py::none(),
        py::call_guard<py::gil_scoped_release>());

    py::class_<RunRecord>(m, "RunRecord")
        .def_readonly("kind", &RunRecord::kind)
        .def_readonly("hash", &RunRecord::hash)
        .def_readonly("param", &RunRecord::param)
        .def_readonly("value", &RunRecord::value)
        .def_readonly("trial", &RunRecord::trial)
        .def_property_readonly("scheme", [](const RunRecord& r) { return std::string(to_string(r.scheme)); })
        .def_readonly("planned_speed", &RunRecord::planned_speed)
        .def_readonly("energy", &RunRecord::energy)
        .def_readonly("data", &RunRecord::data)
        .def_readonly("energy_efficiency", &RunRecord::energy_efficiency)
        .def_readonly("spectral_efficiency", &RunRecord::spectral_efficiency)
        .def_readonly("d_min", &RunRecord::d_min)
        .def_readonly("meets_floor", &RunRecord::meets_floor)
        .def_readonly("converged", &RunRecord::converged)
        .def_readonly("cycles", &RunRecord::cycles)
        .def_readonly("kkt", &RunRecord::kkt)
        .def_readonly("error", &RunRecord::error);

    m.def("run_scenario", &run_scenario, py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def(
        "sweep",
        [](const ExperimentConfig& c, const std::string& param, const std::vector<std::string>& values, int trials,
           int jobs) { return sweep(c, SweepSpec{param, values, trials, jobs}); },
        py::arg("config"), py::arg("param"), py::arg("values"), py::arg("trials") = 1, py::arg("jobs") = 0,
        py::call_guard<py::gil_scoped_release>());
    m.def("monte_carlo_velocity_error", &monte_carlo_velocity_error, py::arg("config"), py::arg("sigmas"),
          py::arg("trials"), py::arg("jobs") = 0, py::call_guard<py::gil_scoped_release>());
    m.def("to_csv", &csv_text, py::arg("rows"));
    m.def(
        "from_csv",
        [](const std::string& text) {
            std::istringstream is(text);
            return read_csv(is);
        },
        py::arg("text"));

    m.def("max_doppler", &max_doppler, py::arg("scenario"), py::arg("speed") = py::none());
    m.def("true_doppler", &true_doppler, py::arg("scenario"), py::arg("x"));
    m.def("relative_doppler", &relative_doppler, py::arg("scenario"), py::arg("x"));

    py::class_<DopplerTable>(m, "DopplerTable")
        .def_static("build", &DopplerTable::build, py::arg("scenario"), py::arg("spacing") = 1.0,
                    py::arg("half_width") = 5)
        .def_property_readonly("spacing", &DopplerTable::spacing)
        .def_property_readonly("half_width", &DopplerTable::half_width)
        .def_property_readonly("positions",
                               [](const DopplerTable& t) {
                                   std::vector<double> out;
                                   for (const auto& e : t.entries()) out.push_back(e.position);
                                   return out;
                               })
        .def(
            "estimate",
            [](const DopplerTable& t, const ScenarioConfig& c, double x, double noise_db_std, std::uint64_t seed,
               std::optional<double> speed) {
                std::mt19937_64 rng(seed);
                const RsrpWindow w = make_window(c, x, t.spacing(), t.half_width(), noise_db_std, &rng);
                return estimate_doppler(t, w, c, speed);
            },
            py::arg("scenario"), py::arg("x"), py::arg("noise_db_std") = 0.0, py::arg("seed") = 1,
            py::arg("speed") = py::none(), "Doppler estimate from an RSRP window centred at x.")
        .def("to_text", [](const DopplerTable& t) {
            std::ostringstream os;
            t.write(os);
            return os.str();
        });
}
