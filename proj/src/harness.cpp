// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include "railrelay/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "railrelay/allocators.hpp"
#include "railrelay/error.hpp"
#include "railrelay/optimizer.hpp"
#include "railrelay/radio_link.hpp"

namespace railrelay {

namespace {

enum Stream : std::uint32_t { kSpeedError = 0, kAllocation = 1, kFading = 2 };

std::mt19937_64 stream_rng(const ExperimentConfig& cfg, const PointSpec& spec, Stream stream) {
    const std::uint64_t seed = cfg.scenario.seed;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(spec.point), static_cast<std::uint32_t>(spec.trial),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    // splitmix64 finaliser over the running state
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

/// Independent envelope per (relay, segment, node time), identical for every
/// scheme that queries the same node.
FadingTrace iid_fading(const FadingModel& model, std::uint64_t seed) {
    return [model, seed](int relay, int segment, double t) {
        std::uint64_t h = mix(seed, static_cast<std::uint64_t>(relay));
        h = mix(h, static_cast<std::uint64_t>(segment));
        h = mix(h, std::bit_cast<std::uint64_t>(t));
        std::mt19937_64 rng(h);
        const double r = std::max(sample_rician_envelope(model, rng), 1e-12);
        return fading_attenuation_db(model, r);
    };
}

std::string clean_error(std::string msg) {
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return msg;
}

template <class F>
void parallel_for(int count, int jobs, F&& body) {
    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, std::max(count, 1));
    if (workers == 1) {
        for (int k = 0; k < count; ++k) body(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int k = next++; k < count; k = next++) body(k);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

std::vector<RunRecord> run_point(const ExperimentConfig& cfg, const PointSpec& spec) {
    cfg.validate();
    if (!(spec.sigma_v >= 0.0)) throw DomainError("sigma_v must be nonnegative");

    const ScenarioConfig& truth = cfg.scenario;
    double speed_error = 0.0;
    if (spec.sigma_v > 0.0) {
        auto rng = stream_rng(cfg, spec, kSpeedError);
        std::normal_distribution<double> err(0.0, spec.sigma_v);
        speed_error = std::abs(err(rng));
    }
    ScenarioConfig plan = truth;
    plan.speed = truth.speed + speed_error;

    const SegmentSchedule sched = segment_boundaries(plan);
    const SegmentSchedule true_sched = segment_boundaries(truth);
    const double d_min = data_floor(plan, sched);

    ChannelOptions eval;
    if (plan.speed != truth.speed) eval.true_speed = truth.speed;
    const FadingModel fading_model = FadingModel::from_k_factor_db(truth.rician_k_db);
    if (cfg.fading) {
        auto rng = stream_rng(cfg, spec, kFading);
        eval.fading = iid_fading(fading_model, rng());
    }
    const std::string hash = scenario_hash(cfg);

    std::vector<RunRecord> out;
    for (Scheme scheme : cfg.schemes) {
        const auto start = std::chrono::steady_clock::now();
        RunRecord rec;
        rec.hash = hash;
        rec.param = spec.param;
        rec.value = spec.value;
        rec.trial = spec.trial;
        rec.scheme = scheme;
        rec.planned_speed = plan.speed;
        rec.d_min = d_min;
        try {
            auto rng = stream_rng(cfg, spec, kAllocation);
            AllocationMatrix p;
            switch (scheme) {
                case Scheme::Optimized: {
                    const SolveResult r = solve(plan, sched, average_alloc(plan, sched), cfg.solver, d_min);
                    p = r.power;
                    rec.converged = r.converged && r.monotone;
                    rec.cycles = r.cycles;
                    rec.residual = r.residual;
                    rec.kkt = r.kkt;
                    break;
                }
                case Scheme::Constant: p = constant_alloc(plan, sched); break;
                case Scheme::Average: p = average_alloc(plan, sched); break;
                case Scheme::Random: p = random_alloc(plan, sched, rng); break;
                case Scheme::Csi: {
                    const ChannelSnapshot snap =
                        channel_snapshot(plan, sched, cfg.fading ? &fading_model : nullptr, &rng);
                    p = csi_alloc(plan, sched, snap, cfg.csi_alpha);
                    break;
                }
            }
            rec.energy = total_energy(p, sched);
            rec.data = total_data(p, plan, sched, eval);
            rec.energy_efficiency = rec.energy > 0.0 ? energy_efficiency(rec.data, rec.energy) : 0.0;
            rec.spectral_efficiency = spectral_efficiency(rec.data, truth, true_sched);
            rec.meets_floor = rec.data >= (1.0 - 1e-3) * d_min;
        } catch (const std::exception& e) {
            rec.error = clean_error(e.what());
            rec.converged = false;
            rec.meets_floor = false;
            rec.energy = rec.data = rec.energy_efficiency = rec.spectral_efficiency = 0.0;
        }
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<RunRecord> run_scenario(const ExperimentConfig& cfg) { return run_point(cfg, PointSpec{}); }

void SweepSpec::validate() const {
    static const std::vector<std::string> known = {"M", "d_l", "v", "P_T", "sigma_v"};
    if (std::find(known.begin(), known.end(), param) == known.end()) {
        throw ConfigError("sweep parameter must be one of M, d_l, v, P_T, sigma_v; got '" + param + "'");
    }
    if (values.empty()) throw ConfigError("sweep value list is empty");
    if (trials < 1) throw ConfigError("trials must be at least 1");
}

namespace {

struct PointJob {
    ExperimentConfig cfg;
    PointSpec spec;
    std::string setup_error;
};

std::vector<RunRecord> run_jobs(const std::vector<PointJob>& jobs, int workers) {
    std::vector<std::vector<RunRecord>> results(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), workers, [&](int k) {
        const PointJob& job = jobs[k];
        if (job.setup_error.empty()) {
            try {
                results[k] = run_point(job.cfg, job.spec);
                return;
            } catch (const std::exception& e) {
                results[k].clear();
                for (Scheme s : job.cfg.schemes) {
                    RunRecord rec;
                    rec.param = job.spec.param;
                    rec.value = job.spec.value;
                    rec.trial = job.spec.trial;
                    rec.scheme = s;
                    rec.converged = false;
                    rec.error = clean_error(e.what());
                    results[k].push_back(rec);
                }
                return;
            }
        }
        for (Scheme s : job.cfg.schemes) {
            RunRecord rec;
            rec.param = job.spec.param;
            rec.value = job.spec.value;
            rec.trial = job.spec.trial;
            rec.scheme = s;
            rec.converged = false;
            rec.error = job.setup_error;
            results[k].push_back(rec);
        }
    });
    std::vector<RunRecord> rows;
    for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
    std::vector<RunRecord> means = aggregate(rows);
    rows.insert(rows.end(), means.begin(), means.end());
    return rows;
}

}  // namespace

std::vector<RunRecord> sweep(const ExperimentConfig& cfg, const SweepSpec& spec) {
    cfg.validate();
    spec.validate();
    if (spec.param == "sigma_v") {
        std::vector<double> sigmas;
        for (const std::string& v : spec.values) sigmas.push_back(parse_quantity("v", v));
        return monte_carlo_velocity_error(cfg, sigmas, spec.trials, spec.jobs);
    }
    std::vector<PointJob> jobs;
    for (int k = 0; k < static_cast<int>(spec.values.size()); ++k) {
        PointJob base;
        base.cfg = cfg;
        base.spec.param = spec.param;
        base.spec.point = k;
        try {
            base.spec.value = parse_quantity(spec.param, spec.values[k]);
            set_config_value(base.cfg, spec.param, spec.values[k]);
            base.cfg.validate();
        } catch (const std::exception& e) {
            base.setup_error = clean_error(e.what());
        }
        for (int t = 0; t < spec.trials; ++t) {
            PointJob job = base;
            job.spec.trial = t;
            jobs.push_back(std::move(job));
        }
    }
    return run_jobs(jobs, spec.jobs);
}

std::vector<RunRecord> monte_carlo_velocity_error(const ExperimentConfig& cfg, const std::vector<double>& sigmas,
                                                  int trials, int jobs) {
    cfg.validate();
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (sigmas.empty()) throw ConfigError("sigma list is empty");
    std::vector<PointJob> list;
    for (int k = 0; k < static_cast<int>(sigmas.size()); ++k) {
        if (!(sigmas[k] >= 0.0)) throw ConfigError("sigma_v values must be nonnegative");
        for (int t = 0; t < trials; ++t) {
            PointJob job;
            job.cfg = cfg;
            job.spec.param = "sigma_v";
            job.spec.value = sigmas[k];
            job.spec.sigma_v = sigmas[k];
            job.spec.point = k;
            job.spec.trial = t;
            list.push_back(std::move(job));
        }
    }
    return run_jobs(list, jobs);
}

std::vector<RunRecord> aggregate(const std::vector<RunRecord>& rows) {
    struct Acc {
        RunRecord first;
        int n = 0;
        int failed = 0;
        double energy = 0, data = 0, se = 0, d_min = 0, speed = 0, residual = 0, kkt = 0;
        int cycles = 0;
        bool meets = true, converged = true;
        std::string hash;
        bool hash_mixed = false;
    };
    std::vector<std::pair<std::tuple<std::string, double, Scheme>, Acc>> groups;
    for (const RunRecord& r : rows) {
        if (r.kind != "point") continue;
        const auto key = std::make_tuple(r.param, r.value, r.scheme);
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
            groups.push_back({key, Acc{}});
            it = std::prev(groups.end());
            it->second.first = r;
            it->second.hash = r.hash;
        }
        Acc& a = it->second;
        if (!r.error.empty()) {
            ++a.failed;
            a.converged = false;
            continue;
        }
        if (!a.hash.empty() && r.hash != a.hash) a.hash_mixed = true;
        if (a.hash.empty()) a.hash = r.hash;
        ++a.n;
        a.energy += r.energy;
        a.data += r.data;
        a.se += r.spectral_efficiency;
        a.d_min += r.d_min;
        a.speed += r.planned_speed;
        a.residual = std::max(a.residual, r.residual);
        a.kkt = std::max(a.kkt, r.kkt);
        a.cycles = std::max(a.cycles, r.cycles);
        a.meets = a.meets && r.meets_floor;
        a.converged = a.converged && r.converged;
    }
    std::vector<RunRecord> out;
    for (const auto& [key, a] : groups) {
        RunRecord m;
        m.kind = "mean";
        m.hash = a.hash_mixed ? "mixed" : a.hash;
        m.param = std::get<0>(key);
        m.value = std::get<1>(key);
        m.scheme = std::get<2>(key);
        m.trial = a.n;
        if (a.n > 0) {
            m.energy = a.energy / a.n;
            m.data = a.data / a.n;
            m.energy_efficiency = m.energy > 0.0 ? m.data / m.energy : 0.0;
            m.spectral_efficiency = a.se / a.n;
            m.d_min = a.d_min / a.n;
            m.planned_speed = a.speed / a.n;
        }
        m.residual = a.residual;
        m.kkt = a.kkt;
        m.cycles = a.cycles;
        m.meets_floor = a.n > 0 && a.meets;
        m.converged = a.converged;
        if (a.failed > 0) m.error = std::to_string(a.failed) + " trial(s) failed";
        out.push_back(std::move(m));
    }
    return out;
}

bool all_converged(const std::vector<RunRecord>& rows) {
    return std::all_of(rows.begin(), rows.end(),
                       [](const RunRecord& r) { return r.scheme != Scheme::Optimized || r.converged; });
}

namespace {

const char* kColumns =
    "kind,hash,param,value,trial,scheme,planned_speed_mps,energy_J,data_bits,ee_bits_per_J,"
    "se_bits_per_s_Hz,d_min_bits,meets_floor,converged,cycles,residual,kkt,error";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, int lineno) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad number '" + s + "' in CSV", lineno);
    }
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<RunRecord>& rows) {
    os << "# railrelay csv v1\n" << kColumns << '\n';
    for (const RunRecord& r : rows) {
        os << r.kind << ',' << r.hash << ',' << r.param << ',' << format_number(r.value) << ',' << r.trial << ','
           << to_string(r.scheme) << ',' << format_number(r.planned_speed) << ',' << format_number(r.energy) << ','
           << format_number(r.data) << ',' << format_number(r.energy_efficiency) << ','
           << format_number(r.spectral_efficiency) << ',' << format_number(r.d_min) << ','
           << (r.meets_floor ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ',' << r.cycles << ','
           << format_number(r.residual) << ',' << format_number(r.kkt) << ',' << r.error << '\n';
    }
}

std::vector<RunRecord> read_csv(std::istream& is) {
    std::vector<RunRecord> rows;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kColumns) throw ConfigError("unexpected CSV header", lineno);
            header_seen = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 18) throw ConfigError("expected 18 CSV fields", lineno);
        RunRecord r;
        r.kind = f[0];
        r.hash = f[1];
        r.param = f[2];
        r.value = to_double(f[3], lineno);
        r.trial = static_cast<int>(to_double(f[4], lineno));
        const auto scheme = parse_scheme(f[5]);
        if (!scheme) throw ConfigError("unknown scheme '" + f[5] + "'", lineno);
        r.scheme = *scheme;
        r.planned_speed = to_double(f[6], lineno);
        r.energy = to_double(f[7], lineno);
        r.data = to_double(f[8], lineno);
        r.energy_efficiency = to_double(f[9], lineno);
        r.spectral_efficiency = to_double(f[10], lineno);
        r.d_min = to_double(f[11], lineno);
        r.meets_floor = f[12] == "1";
        r.converged = f[13] == "1";
        r.cycles = static_cast<int>(to_double(f[14], lineno));
        r.residual = to_double(f[15], lineno);
        r.kkt = to_double(f[16], lineno);
        r.error = f[17];
        rows.push_back(std::move(r));
    }
    if (!header_seen) throw ConfigError("CSV has no column header");
    return rows;
}

namespace {

struct Axis {
    const char* id;
    const char* param;
    const char* label;
    const char* unit;
};

struct Metric {
    const char* id;
    const char* label;
    const char* unit;
    double RunRecord::*field;
};

const std::vector<Axis>& axes() {
    static const std::vector<Axis> a = {{"M", "M", "number of mobile relays", "count"},
                                        {"dl", "d_l", "cell coverage width", "m"},
                                        {"v", "v", "train speed", "m/s"},
                                        {"PT", "P_T", "transmit power budget", "W"},
                                        {"sigma", "sigma_v", "speed estimation error std", "m/s"}};
    return a;
}

const std::vector<Metric>& metrics() {
    static const std::vector<Metric> m = {{"E", "energy", "J", &RunRecord::energy},
                                          {"EE", "energy efficiency", "bits/J", &RunRecord::energy_efficiency},
                                          {"SE", "spectral efficiency", "bits/s/Hz", &RunRecord::spectral_efficiency},
                                          {"D", "delivered data", "bits", &RunRecord::data}};
    return m;
}

}  // namespace

std::vector<std::string> figure_ids() {
    std::vector<std::string> ids;
    for (const Metric& m : metrics()) {
        for (const Axis& a : axes()) ids.push_back(std::string(m.id) + "-vs-" + a.id);
    }
    return ids;
}

std::vector<std::string> emit_plot_data(const std::vector<RunRecord>& rows, const std::string& figure,
                                        const std::string& dir) {
    const Metric* metric = nullptr;
    const Axis* axis = nullptr;
    for (const Metric& m : metrics()) {
        for (const Axis& a : axes()) {
            if (figure == std::string(m.id) + "-vs-" + a.id) {
                metric = &m;
                axis = &a;
            }
        }
    }
    if (!metric) throw ConfigError("unknown figure id '" + figure + "'");

    std::vector<double> xs;
    std::vector<Scheme> schemes;
    std::map<std::pair<double, Scheme>, double> cell;
    for (const RunRecord& r : rows) {
        if (r.kind != "mean" || r.param != axis->param) continue;
        if (std::find(xs.begin(), xs.end(), r.value) == xs.end()) xs.push_back(r.value);
        if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end()) schemes.push_back(r.scheme);
        if (r.trial > 0) cell[{r.value, r.scheme}] = r.*(metric->field);
    }
    if (xs.empty()) {
        throw ConfigError(std::string("no aggregate rows for parameter ") + axis->param + " in CSV");
    }
    std::sort(xs.begin(), xs.end());

    std::filesystem::create_directories(dir);
    const std::string dat = (std::filesystem::path(dir) / (figure + ".dat")).string();
    const std::string manifest = (std::filesystem::path(dir) / (figure + ".manifest")).string();
    std::ofstream out(dat);
    out << "# " << axis->param;
    for (Scheme s : schemes) out << ' ' << to_string(s);
    out << '\n';
    for (double x : xs) {
        out << format_number(x);
        for (Scheme s : schemes) {
            const auto it = cell.find({x, s});
            out << ' ' << (it == cell.end() ? std::string("nan") : format_number(it->second));
        }
        out << '\n';
    }
    std::ofstream man(manifest);
    man << "figure " << figure << '\n';
    man << "data " << std::filesystem::path(dat).filename().string() << '\n';
    man << "x " << axis->param << " \"" << axis->label << "\" " << axis->unit << '\n';
    man << "y " << metric->id << " \"" << metric->label << "\" " << metric->unit << '\n';
    man << "columns " << axis->param;
    for (Scheme s : schemes) man << ' ' << to_string(s);
    man << '\n';
    if (!out || !man) throw std::runtime_error("failed writing plot data to '" + dir + "'");
    return {dat, manifest};
}

}  // namespace railrelay
