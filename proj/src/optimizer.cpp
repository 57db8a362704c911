// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include "railrelay/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "railrelay/allocators.hpp"
#include "railrelay/error.hpp"

namespace railrelay {

const char* to_string(BudgetMode mode) {
    return mode == BudgetMode::Equality ? "equality" : "inequality";
}

const char* to_string(UpdateCase c) {
    switch (c) {
        case UpdateCase::Terminate: return "terminate";
        case UpdateCase::PenaltyDiverging: return "penalty-diverging";
        case UpdateCase::CorrectMultipliers: return "correct-multipliers";
        case UpdateCase::PenaltySlow: return "penalty-slow";
        case UpdateCase::ResumeInner: return "resume-inner";
    }
    return "?";
}

void SolverOptions::validate() const {
    if (!(sigma0 > 0.0)) throw ConfigError("solver.sigma0 must be positive");
    if (!(growth > 1.0)) throw ConfigError("solver.growth must exceed 1");
    if (fixed_step && !(*fixed_step > 0.0)) throw ConfigError("solver.step must be positive");
    if (!(eps > 0.0)) throw ConfigError("solver.eps must be positive");
    if (max_cycles < 1) throw ConfigError("solver.max_cycles must be at least 1");
    if (max_inner < 1) throw ConfigError("solver.max_inner must be at least 1");
}

MultiplierState MultiplierState::initial(int segments, double sigma0) {
    MultiplierState s;
    s.lambda.assign(segments + 1, 0.0);
    s.sigma = sigma0;
    // No predecessor on the first cycle: treat sigma as unchanged.
    s.sigma_prev = sigma0;
    return s;
}

double ConstraintResiduals::inf_norm() const {
    double m = 0.0;
    for (double v : h) m = std::max(m, std::abs(v));
    return m;
}

Scaling Scaling::normalized(const ScenarioConfig& cfg, const SegmentSchedule& sched, double d_min) {
    Scaling s;
    s.power = cfg.power_budget;
    s.data = d_min > 0.0 ? d_min : total_data(average_alloc(cfg, sched), cfg, sched);
    s.energy = cfg.power_budget * sched.total();
    return s;
}

double data_floor(const ScenarioConfig& cfg, const SegmentSchedule& sched) {
    if (cfg.data_floor.bits) {
        if (!(*cfg.data_floor.bits >= 0.0)) throw DomainError("data floor must be nonnegative");
        return *cfg.data_floor.bits;
    }
    const double rho = cfg.data_floor.rho;
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("data floor fraction rho must lie in (0, 1]");
    return rho * total_data(average_alloc(cfg, sched), cfg, sched);
}

AugmentedLagrangian::AugmentedLagrangian(const ScenarioConfig& cfg, const SegmentSchedule& sched, double d_min,
                                         Scaling scaling, BudgetMode mode)
    : cfg_(cfg), durations_(sched.durations), table_(cfg, sched), d_min_(d_min), scaling_(scaling), mode_(mode) {}

double AugmentedLagrangian::energy(const AllocationMatrix& x) const {
    double e = 0.0;
    for (int j = 0; j < x.segments(); ++j) e += durations_[j] * x.column_sum(j);
    return e * scaling_.power / scaling_.energy;
}

double AugmentedLagrangian::data(const AllocationMatrix& x) const {
    return table_.total_data(to_physical(x));
}

ConstraintResiduals AugmentedLagrangian::residuals(const AllocationMatrix& x) const {
    ConstraintResiduals r;
    r.h.resize(constraints());
    r.h[0] = (data(x) - d_min_) / scaling_.data;
    const double budget = cfg_.power_budget / scaling_.power;
    for (int j = 0; j < x.segments(); ++j) r.h[j + 1] = x.column_sum(j) - budget;
    return r;
}

double AugmentedLagrangian::value(const AllocationMatrix& x, const std::vector<double>& lambda,
                                  double sigma) const {
    const ConstraintResiduals r = residuals(x);
    double phi = energy(x) - lambda[0] * r.h[0] + sigma * r.h[0] * r.h[0];
    for (std::size_t j = 1; j < r.h.size(); ++j) {
        const double h = r.h[j];
        if (mode_ == BudgetMode::Equality) {
            phi += -lambda[j] * h + sigma * h * h;
        } else if (sigma == 0.0) {
            phi += -lambda[j] * h;
        } else {
            const double c = std::max(0.0, -lambda[j] + 2.0 * sigma * h);
            phi += (c * c - lambda[j] * lambda[j]) / (4.0 * sigma);
        }
    }
    return phi;
}

AllocationMatrix AugmentedLagrangian::gradient(const AllocationMatrix& x, const std::vector<double>& lambda,
                                               double sigma) const {
    const ConstraintResiduals r = residuals(x);
    const AllocationMatrix dd = table_.gradient(to_physical(x));
    const double data_coef = (-lambda[0] + 2.0 * sigma * r.h[0]) / scaling_.data;

    AllocationMatrix g = x;
    for (int j = 0; j < x.segments(); ++j) {
        double c;
        if (mode_ == BudgetMode::Equality) {
            c = -lambda[j + 1] + 2.0 * sigma * r.h[j + 1];
        } else if (sigma == 0.0) {
            c = -lambda[j + 1];
        } else {
            c = std::max(0.0, -lambda[j + 1] + 2.0 * sigma * r.h[j + 1]);
        }
        const double de = durations_[j] / scaling_.energy;
        for (int i = 0; i < x.relays(); ++i) {
            if (!x.active(i, j)) {
                g(i, j) = 0.0;
                continue;
            }
            // Chain rule through P = x * power.
            g(i, j) = scaling_.power * (de + data_coef * dd(i, j)) + c;
        }
    }
    return g;
}

std::vector<double> AugmentedLagrangian::progress_residuals(const ConstraintResiduals& h,
                                                            const std::vector<double>& lambda,
                                                            double sigma) const {
    std::vector<double> v = h.h;
    if (mode_ == BudgetMode::Inequality) {
        for (std::size_t j = 1; j < v.size(); ++j) v[j] = std::max(h.h[j], lambda[j] / (2.0 * sigma));
    }
    return v;
}

std::vector<double> AugmentedLagrangian::corrected_multipliers(const ConstraintResiduals& h,
                                                               const std::vector<double>& lambda,
                                                               double sigma) const {
    std::vector<double> out(lambda.size());
    for (std::size_t j = 0; j < lambda.size(); ++j) out[j] = lambda[j] - 2.0 * sigma * h.h[j];
    if (mode_ == BudgetMode::Inequality) {
        for (std::size_t j = 1; j < out.size(); ++j) out[j] = std::min(0.0, out[j]);
    }
    return out;
}

namespace {

void check_multipliers(const std::vector<double>& lambda, const ScenarioConfig& cfg) {
    if (static_cast<int>(lambda.size()) != cfg.segment_count() + 1) {
        throw DomainError("multiplier vector must have 2M+N-1 entries");
    }
}

void check_mask(const AllocationMatrix& p, const ScenarioConfig& cfg) {
    if (p.relays() != cfg.relays || p.segments() != cfg.segment_count()) {
        throw DomainError("allocation shape does not match scenario");
    }
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

ConstraintResiduals constraint_residuals(const AllocationMatrix& p, const ScenarioConfig& cfg,
                                         const SegmentSchedule& sched, double d_min) {
    check_mask(p, cfg);
    return AugmentedLagrangian(cfg, sched, d_min, Scaling{}, BudgetMode::Equality).residuals(p);
}

double augmented_lagrangian(const AllocationMatrix& p, const std::vector<double>& lambda, double sigma,
                            const ScenarioConfig& cfg, const SegmentSchedule& sched, double d_min,
                            BudgetMode mode) {
    check_mask(p, cfg);
    check_multipliers(lambda, cfg);
    return AugmentedLagrangian(cfg, sched, d_min, Scaling{}, mode).value(p, lambda, sigma);
}

AllocationMatrix grad_augmented_lagrangian(const AllocationMatrix& p, const std::vector<double>& lambda,
                                           double sigma, const ScenarioConfig& cfg,
                                           const SegmentSchedule& sched, double d_min, BudgetMode mode) {
    check_mask(p, cfg);
    check_multipliers(lambda, cfg);
    return AugmentedLagrangian(cfg, sched, d_min, Scaling{}, mode).gradient(p, lambda, sigma);
}

AllocationMatrix projected_descent(const AllocationMatrix& x, const AllocationMatrix& grad) {
    AllocationMatrix d = grad;
    for (int i = 0; i < x.relays(); ++i) {
        for (int j = 0; j < x.segments(); ++j) {
            double v = x.active(i, j) ? -grad(i, j) : 0.0;
            if (x(i, j) <= 0.0 && v < 0.0) v = 0.0;
            d(i, j) = v;
        }
    }
    return d;
}

namespace {

AllocationMatrix step_and_clip(const AllocationMatrix& x, const AllocationMatrix& d, double alpha) {
    AllocationMatrix out = x;
    auto& v = out.values();
    const auto& xv = x.values();
    const auto& dv = d.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::max(0.0, xv[k] + alpha * dv[k]);
    return out;
}

}  // namespace

InnerResult inner_descent(const AugmentedLagrangian& model, const AllocationMatrix& x0,
                          const std::vector<double>& lambda, double sigma, const SolverOptions& opts) {
    InnerResult res;
    res.x = x0;
    double phi = model.value(res.x, lambda, sigma);
    res.phi_start = phi;

    for (res.iterations = 0; res.iterations < opts.max_inner; ++res.iterations) {
        const AllocationMatrix d = projected_descent(res.x, model.gradient(res.x, lambda, sigma));
        if (d.max_abs() <= opts.eps) {
            res.converged = true;
            break;
        }
        if (opts.fixed_step) {
            AllocationMatrix next = step_and_clip(res.x, d, *opts.fixed_step);
            const double phi_next = model.value(next, lambda, sigma);
            if (phi_next > phi) res.monotone = false;
            res.x = std::move(next);
            phi = phi_next;
            continue;
        }
        double alpha = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings, alpha *= 0.5) {
            AllocationMatrix next = step_and_clip(res.x, d, alpha);
            const double phi_next = model.value(next, lambda, sigma);
            if (phi_next < phi) {
                res.x = std::move(next);
                phi = phi_next;
                accepted = true;
                break;
            }
        }
        // No decrease representable in floating point: stationary to rounding.
        if (!accepted) break;
    }
    res.phi_end = phi;
    return res;
}

UpdateCase update_state(MultiplierState& state, const std::vector<double>& progress, double h_prev_norm,
                        const ConstraintResiduals& h, const SolverOptions& opts) {
    const double now = inf_norm(progress);
    if (now <= opts.eps) return UpdateCase::Terminate;

    const double sigma = state.sigma;
    if (now >= h_prev_norm) {
        state.sigma_prev = sigma;
        state.sigma = opts.growth * sigma;
        return UpdateCase::PenaltyDiverging;
    }
    if (sigma > state.sigma_prev || now <= 0.25 * h_prev_norm) {
        for (std::size_t j = 0; j < state.lambda.size(); ++j) state.lambda[j] -= 2.0 * sigma * h.h[j];
        if (opts.budget == BudgetMode::Inequality) {
            for (std::size_t j = 1; j < state.lambda.size(); ++j) state.lambda[j] = std::min(0.0, state.lambda[j]);
        }
        state.sigma_prev = sigma;
        return UpdateCase::CorrectMultipliers;
    }
    state.sigma_prev = sigma;
    state.sigma = opts.growth * sigma;
    return UpdateCase::PenaltySlow;
}

SolveResult solve(const ScenarioConfig& cfg, const SegmentSchedule& sched, const AllocationMatrix& init,
                  const SolverOptions& opts, std::optional<double> d_min_opt) {
    opts.validate();
    check_mask(init, cfg);
    // Budget excess in the start point is tolerated; mask and sign are not.
    for (const Violation& v : validate_alloc(init, cfg, sched, 1e-9 * cfg.power_budget)) {
        if (v.kind != Violation::Kind::Budget) throw DomainError("initial allocation: " + v.describe());
    }

    const double d_min = d_min_opt ? *d_min_opt : data_floor(cfg, sched);
    if (!(d_min >= 0.0)) throw DomainError("data floor must be nonnegative");
    const double full_budget_data = total_data(average_alloc(cfg, sched), cfg, sched);
    if (d_min > full_budget_data) {
        throw InfeasibleError("data floor " + std::to_string(d_min) + " exceeds the " +
                              std::to_string(full_budget_data) + " delivered at full budget");
    }

    const Scaling scaling = Scaling::normalized(cfg, sched, d_min);
    const AugmentedLagrangian model(cfg, sched, d_min, scaling, opts.budget);

    MultiplierState state = MultiplierState::initial(cfg.segment_count(), opts.sigma0);
    AllocationMatrix x = model.to_scaled(init);
    double prev_norm = inf_norm(model.progress_residuals(model.residuals(x), state.lambda, state.sigma));

    SolveResult out;
    out.d_min = d_min;
    AllocationMatrix best = x;
    double best_norm = std::numeric_limits<double>::infinity();
    std::vector<double> best_multipliers;

    for (int k = 0; k < opts.max_cycles; ++k) {
        InnerResult inner = inner_descent(model, x, state.lambda, state.sigma, opts);
        x = std::move(inner.x);
        out.monotone = out.monotone && inner.monotone;

        const ConstraintResiduals h = model.residuals(x);
        const std::vector<double> progress = model.progress_residuals(h, state.lambda, state.sigma);
        const double now = inf_norm(progress);

        CycleRecord rec;
        rec.cycle = k;
        rec.residual = now;
        rec.sigma = state.sigma;
        rec.phi = inner.phi_end;
        rec.energy = model.energy(x) * scaling.energy;
        rec.inner_iterations = inner.iterations;
        rec.inner_converged = inner.converged;

        rec.action = update_state(state, progress, prev_norm, h, opts);
        // A feasible point is only accepted once it also minimises phi.
        if (rec.action == UpdateCase::Terminate && !inner.converged && inner.iterations >= opts.max_inner) rec.action = UpdateCase::ResumeInner;
        if (now < best_norm || rec.action == UpdateCase::Terminate) {
            best_norm = now;
            best = x;
            best_multipliers = model.corrected_multipliers(h, state.lambda, state.sigma);
        }
        out.history.push_back(rec);
        out.cycles = k + 1;
        if (rec.action == UpdateCase::Terminate) {
            out.converged = true;
            break;
        }
        prev_norm = now;
    }

    out.power = model.to_physical(best);
    out.residual = best_norm;
    out.sigma = state.sigma;
    out.multipliers = std::move(best_multipliers);
    out.kkt = kkt_residual(out.power, out.multipliers, cfg, sched, d_min, opts.budget);
    return out;
}

SolveResult solve(const ScenarioConfig& cfg, const SegmentSchedule& sched, const SolverOptions& opts) {
    return solve(cfg, sched, average_alloc(cfg, sched), opts);
}

double kkt_residual(const AllocationMatrix& p, const std::vector<double>& lambda, const ScenarioConfig& cfg,
                    const SegmentSchedule& sched, double d_min, BudgetMode mode) {
    check_mask(p, cfg);
    check_multipliers(lambda, cfg);
    const Scaling scaling = Scaling::normalized(cfg, sched, d_min);
    const AugmentedLagrangian model(cfg, sched, d_min, scaling, BudgetMode::Equality);
    const AllocationMatrix x = model.to_scaled(p);
    const ConstraintResiduals h = model.residuals(x);

    // Gradient of the plain Lagrangian E - lambda^T h.
    const AllocationMatrix g = model.gradient(x, lambda, 0.0);
    double worst = 0.0;
    for (int i = 0; i < x.relays(); ++i) {
        for (int j = 0; j < x.segments(); ++j) {
            if (!x.active(i, j)) continue;
            // Projected onto x >= 0.
            const double stationarity = x(i, j) - std::max(0.0, x(i, j) - g(i, j));
            worst = std::max(worst, std::abs(stationarity));
        }
    }

    if (mode == BudgetMode::Equality) {
        for (double v : h.h) worst = std::max(worst, std::abs(v));
        return worst;
    }
    // Data floor D >= D_min with multiplier lambda_0 >= 0.
    worst = std::max(worst, std::max(0.0, -h.h[0]));
    worst = std::max(worst, std::abs(lambda[0] * h.h[0]));
    worst = std::max(worst, std::max(0.0, -lambda[0]));
    // Budgets sum <= P_T with multiplier mu_j = -lambda_j >= 0.
    for (std::size_t j = 1; j < h.h.size(); ++j) {
        worst = std::max(worst, std::max(0.0, h.h[j]));
        worst = std::max(worst, std::abs(lambda[j] * h.h[j]));
        worst = std::max(worst, std::max(0.0, lambda[j]));
    }
    return worst;
}

}  // namespace railrelay
