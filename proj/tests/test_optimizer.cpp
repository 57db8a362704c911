// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "railrelay/allocators.hpp"
#include "railrelay/error.hpp"
#include "railrelay/optimizer.hpp"

using namespace railrelay;

namespace {

struct Ref {
    ScenarioConfig cfg;
    SegmentSchedule sched = segment_boundaries(cfg);
    double d_avg = total_data(average_alloc(cfg, sched), cfg, sched);
};

const SolveResult& ref_solution() {
    static const SolveResult r = [] {
        Ref ref;
        return solve(ref.cfg, ref.sched);
    }();
    return r;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace

TEST_CASE("data floor policy") {
    Ref ref;
    ScenarioConfig cfg = ref.cfg;
    cfg.data_floor.rho = 1.0;
    CHECK(data_floor(cfg, ref.sched) == doctest::Approx(ref.d_avg).epsilon(1e-14));
    cfg.data_floor.rho = 0.8;
    CHECK(data_floor(cfg, ref.sched) == doctest::Approx(0.8 * ref.d_avg).epsilon(1e-14));
    cfg.data_floor.bits = 1e9;
    CHECK(data_floor(cfg, ref.sched) == 1e9);
    cfg.data_floor.bits.reset();
    cfg.data_floor.rho = 1.2;
    CHECK_THROWS_AS(data_floor(cfg, ref.sched), DomainError);
    cfg.data_floor.rho = 0.0;
    CHECK_THROWS_AS(data_floor(cfg, ref.sched), DomainError);
}

TEST_CASE("constraint residuals") {
    Ref ref;
    const double d_min = 0.8 * ref.d_avg;
    const ConstraintResiduals avg = constraint_residuals(average_alloc(ref.cfg, ref.sched), ref.cfg, ref.sched, d_min);
    REQUIRE(avg.h.size() == 13);
    CHECK(avg.h[0] == doctest::Approx(0.2 * ref.d_avg));
    for (std::size_t j = 1; j < avg.h.size(); ++j) CHECK(std::abs(avg.h[j]) <= 1e-12);

    const ConstraintResiduals zero = constraint_residuals(AllocationMatrix::zeros(ref.cfg), ref.cfg, ref.sched, d_min);
    CHECK(zero.h[0] == -d_min);
    for (std::size_t j = 1; j < zero.h.size(); ++j) CHECK(zero.h[j] == -ref.cfg.power_budget);
    CHECK(zero.inf_norm() == d_min);
}

TEST_CASE("augmented Lagrangian value") {
    Ref ref;
    const AllocationMatrix p = constant_alloc(ref.cfg, ref.sched);
    const double d_min = 0.8 * ref.d_avg;
    std::vector<double> lambda(13, 0.0);
    for (BudgetMode mode : {BudgetMode::Equality, BudgetMode::Inequality}) {
        CHECK(augmented_lagrangian(p, lambda, 0.0, ref.cfg, ref.sched, d_min, mode) == doctest::Approx(24.0));
    }

    // A point where every constraint holds with equality.
    const AllocationMatrix avg = average_alloc(ref.cfg, ref.sched);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (double& l : lambda) l = u(rng);
    CHECK(augmented_lagrangian(avg, lambda, 7.0, ref.cfg, ref.sched, ref.d_avg) == doctest::Approx(33.0));

    double prev = -INFINITY;
    for (double sigma : {0.0, 1e-22, 1e-21, 1e-20}) {
        const double phi = augmented_lagrangian(p, lambda, sigma, ref.cfg, ref.sched, d_min);
        CHECK(phi > prev);
        prev = phi;
    }
    CHECK_THROWS_AS(augmented_lagrangian(p, std::vector<double>(5, 0.0), 1.0, ref.cfg, ref.sched, d_min),
                    DomainError);
}

TEST_CASE("augmented Lagrangian gradient") {
    Ref ref;
    const double d_min = 0.8 * ref.d_avg;
    {
        const AllocationMatrix g = grad_augmented_lagrangian(constant_alloc(ref.cfg, ref.sched),
                                                             std::vector<double>(13, 0.0), 0.0, ref.cfg,
                                                             ref.sched, d_min);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 12; ++j) CHECK(g(i, j) == (g.active(i, j) ? ref.sched.durations[j] : 0.0));
        }
    }

    // Physical units, equality form.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> power(0.2, 4.0);
    std::uniform_real_distribution<double> mult(-2.0, 2.0);
    std::uniform_real_distribution<double> pen(0.1, 3.0);
    const double step = 1e-4 * ref.cfg.power_budget;
    auto random_state = [&](AllocationMatrix& p, std::vector<bool>& mask, double scale) {
        p = AllocationMatrix::zeros(ref.cfg);
        mask.assign(p.values().size(), false);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 12; ++j) {
                mask[i * 12 + j] = p.active(i, j);
                if (p.active(i, j)) p(i, j) = power(rng) * scale;
            }
        }
    };
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        AllocationMatrix p;
        std::vector<bool> mask;
        random_state(p, mask, 1.0);
        // Multipliers and penalty sized so every term of phi matters.
        std::vector<double> lambda(13);
        lambda[0] = mult(rng) * 1e-10;
        for (std::size_t j = 1; j < 13; ++j) lambda[j] = mult(rng);
        const double sigma = pen(rng) * 1e-21;
        const AllocationMatrix g = grad_augmented_lagrangian(p, lambda, sigma, ref.cfg, ref.sched, d_min);
        const auto fd = oracle::fd_gradient(
            [&](const std::vector<double>& x) {
                AllocationMatrix q = p;
                q.values() = x;
                return augmented_lagrangian(q, lambda, sigma, ref.cfg, ref.sched, d_min);
            },
            p.values(), mask, step);
        for (std::size_t k = 0; k < fd.size(); ++k) {
            if (!mask[k]) {
                CHECK(g.values()[k] == 0.0);
                continue;
            }
            worst = std::max(worst, std::abs(g.values()[k] - fd[k]) / std::abs(g.values()[k]));
        }
    }
    CHECK(worst <= 1e-4);

    // Normalised units as seen by the solver, both budget forms. In physical
    // units the inequality form carries lambda^2 / (4 sigma), which swamps
    // central differences when sigma is scaled for the data term.
    for (BudgetMode mode : {BudgetMode::Equality, BudgetMode::Inequality}) {
        const AugmentedLagrangian model(ref.cfg, ref.sched, d_min, Scaling::normalized(ref.cfg, ref.sched, d_min),
                                        mode);
        worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            AllocationMatrix x;
            std::vector<bool> mask;
            random_state(x, mask, 1.0 / ref.cfg.power_budget);
            std::vector<double> lambda(13);
            for (double& l : lambda) l = mult(rng);
            if (mode == BudgetMode::Inequality) {
                lambda[0] = std::abs(lambda[0]);
                for (std::size_t j = 1; j < 13; ++j) lambda[j] = -std::abs(lambda[j]);
            }
            const double sigma = pen(rng);
            const AllocationMatrix g = model.gradient(x, lambda, sigma);
            const auto fd = oracle::fd_gradient(
                [&](const std::vector<double>& v) {
                    AllocationMatrix q = x;
                    q.values() = v;
                    return model.value(q, lambda, sigma);
                },
                x.values(), mask, 1e-4);
            for (std::size_t k = 0; k < fd.size(); ++k) {
                if (mask[k]) worst = std::max(worst, std::abs(g.values()[k] - fd[k]) / std::abs(g.values()[k]));
            }
        }
        INFO("mode " << to_string(mode));
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("projected descent direction") {
    Ref ref;
    AllocationMatrix x = AllocationMatrix::zeros(ref.cfg);
    x(0, 1) = 1.0;
    AllocationMatrix g = x;
    g(0, 0) = 2.0;   // x = 0 and -g < 0: blocked
    g(0, 1) = 2.0;   // interior: follows -g
    g(1, 1) = -3.0;  // x = 0 and -g > 0: allowed
    const AllocationMatrix d = projected_descent(x, g);
    CHECK(d(0, 0) == 0.0);
    CHECK(d(0, 1) == -2.0);
    CHECK(d(1, 1) == 3.0);
}

TEST_CASE("inner descent") {
    Ref ref;
    const double d_min = 0.8 * ref.d_avg;
    const AugmentedLagrangian model(ref.cfg, ref.sched, d_min, Scaling::normalized(ref.cfg, ref.sched, d_min),
                                    BudgetMode::Inequality);
    SolverOptions opts;

    // phi = E alone is stationary at zero power.
    const std::vector<double> zero(13, 0.0);
    const InnerResult still = inner_descent(model, AllocationMatrix::zeros(ref.cfg), zero, 0.0, opts);
    CHECK(still.converged);
    CHECK(still.iterations == 0);

    std::vector<double> lambda(13, 0.0);
    lambda[0] = 0.5;
    const AllocationMatrix x0 = model.to_scaled(average_alloc(ref.cfg, ref.sched));
    const InnerResult r = inner_descent(model, x0, lambda, 1.0, opts);
    CHECK(r.monotone);
    CHECK(r.phi_end <= r.phi_start);
    CHECK(r.converged);
    for (double v : r.x.values()) CHECK(v >= 0.0);
}

TEST_CASE("penalty and multiplier update rule") {
    SolverOptions opts;
    ConstraintResiduals h{{0.2, -0.1, 0.05}};

    SUBCASE("feasible point terminates") {
        MultiplierState s = MultiplierState::initial(2, 1.0);
        s.lambda = {0.3, -0.2, 0.0};
        const MultiplierState before = s;
        ConstraintResiduals zero{{0.0, 0.0, 0.0}};
        CHECK(update_state(s, zero.h, 1.0, zero, opts) == UpdateCase::Terminate);
        CHECK(s.lambda == before.lambda);
        CHECK(s.sigma == before.sigma);
    }
    SUBCASE("no progress grows the penalty") {
        MultiplierState s = MultiplierState::initial(2, 1.0);
        CHECK(update_state(s, h.h, 0.2, h, opts) == UpdateCase::PenaltyDiverging);
        CHECK(s.sigma == 4.0);
        CHECK(s.lambda == std::vector<double>(3, 0.0));
    }
    SUBCASE("strong progress corrects the multipliers") {
        MultiplierState s = MultiplierState::initial(2, 1.0);
        s.lambda = {0.0, -1.0, -1.0};
        opts.budget = BudgetMode::Equality;
        CHECK(update_state(s, h.h, 2.0, h, opts) == UpdateCase::CorrectMultipliers);
        CHECK(s.sigma == 1.0);
        CHECK(s.lambda[0] == doctest::Approx(-0.4));
        CHECK(s.lambda[1] == doctest::Approx(-0.8));
        CHECK(s.lambda[2] == doctest::Approx(-1.1));
    }
    SUBCASE("inequality multipliers stay nonpositive") {
        MultiplierState s = MultiplierState::initial(2, 1.0);
        ConstraintResiduals neg{{0.01, -0.3, 0.01}};
        CHECK(update_state(s, neg.h, 2.0, neg, opts) == UpdateCase::CorrectMultipliers);
        CHECK(s.lambda[1] == 0.0);
        CHECK(s.lambda[2] == doctest::Approx(-0.02));
    }
    SUBCASE("a penalty raised last cycle is followed by a correction") {
        MultiplierState s = MultiplierState::initial(2, 1.0);
        s.sigma = 4.0;
        CHECK(update_state(s, h.h, 0.3, h, opts) == UpdateCase::CorrectMultipliers);
        CHECK(s.sigma == 4.0);
        CHECK(s.sigma_prev == 4.0);
    }
    SUBCASE("modest progress with a flat penalty grows it") {
        MultiplierState s = MultiplierState::initial(2, 1.0);
        CHECK(update_state(s, h.h, 0.3, h, opts) == UpdateCase::PenaltySlow);
        CHECK(s.sigma == 4.0);
    }
}

TEST_CASE("solver on the reference scenario") {
    Ref ref;
    const SolveResult& r = ref_solution();
    REQUIRE(r.converged);
    CHECK(r.monotone);
    CHECK(r.d_min == doctest::Approx(0.8 * ref.d_avg).epsilon(1e-14));
    CHECK(validate_alloc(r.power, ref.cfg, ref.sched, 1e-6 * ref.cfg.power_budget).empty());
    CHECK(std::abs(total_data(r.power, ref.cfg, ref.sched) - r.d_min) / r.d_min <= 1e-3);
    CHECK(r.residual <= SolverOptions{}.eps);
    CHECK(r.kkt <= 10.0 * SolverOptions{}.eps);

    // Penalty never shrinks, and grows exactly after cases (a) and (c).
    for (std::size_t k = 0; k + 1 < r.history.size(); ++k) {
        const CycleRecord& c = r.history[k];
        const double next = r.history[k + 1].sigma;
        CHECK(next >= c.sigma);
        const bool grew = c.action == UpdateCase::PenaltyDiverging || c.action == UpdateCase::PenaltySlow;
        CHECK(next == (grew ? 4.0 * c.sigma : c.sigma));
    }

    // Feasible comparison point: average allocation scaled by bisection to
    // deliver exactly the data floor.
    const AllocationMatrix avg = average_alloc(ref.cfg, ref.sched);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total_data(avg.scaled(mid), ref.cfg, ref.sched) < r.d_min ? lo : hi) = mid;
    }
    const double e_scaled = total_energy(avg.scaled(hi), ref.sched);
    CHECK(total_energy(r.power, ref.sched) <= e_scaled * (1.0 + 1e-3));

    // Traversal mirror symmetry.
    CHECK(max_abs_diff(r.power.values(), mirrored(r.power).values()) <= 0.05 * ref.cfg.power_budget / ref.cfg.relays);
}

TEST_CASE("KKT residual") {
    Ref ref;
    const SolveResult& r = ref_solution();
    CHECK(kkt_residual(r.power, r.multipliers, ref.cfg, ref.sched, r.d_min) == doctest::Approx(r.kkt));

    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> pick(0, 11);
    for (int k = 0; k < 5; ++k) {
        AllocationMatrix p = r.power;
        int i = 0, j = 0;
        do {
            i = pick(rng) % 4;
            j = pick(rng);
        } while (!p.active(i, j));
        p(i, j) += 0.01 * ref.cfg.power_budget;
        CHECK(kkt_residual(p, r.multipliers, ref.cfg, ref.sched, r.d_min) > r.kkt);
    }

    // Zero floor: zero power with zero multipliers is an exact KKT point.
    CHECK(kkt_residual(AllocationMatrix::zeros(ref.cfg), std::vector<double>(13, 0.0), ref.cfg, ref.sched, 0.0) ==
          0.0);
}

TEST_CASE("zero data floor drives power to zero") {
    Ref ref;
    const SolveResult r = solve(ref.cfg, ref.sched, average_alloc(ref.cfg, ref.sched), {}, 0.0);
    CHECK(r.converged);
    CHECK(total_energy(r.power, ref.sched) <= 1e-3 * 33.0);
}

TEST_CASE("infeasible floor is rejected before solving") {
    Ref ref;
    CHECK_THROWS_AS(solve(ref.cfg, ref.sched, average_alloc(ref.cfg, ref.sched), {}, 1.01 * ref.d_avg),
                    InfeasibleError);
    AllocationMatrix bad = AllocationMatrix::zeros(ref.cfg);
    bad(0, 0) = -1.0;
    CHECK_THROWS_AS(solve(ref.cfg, ref.sched, bad), DomainError);
}

TEST_CASE("equality budget mode") {
    Ref ref;
    SolverOptions opts;
    opts.budget = BudgetMode::Equality;
    const SolveResult r = solve(ref.cfg, ref.sched, opts);
    REQUIRE(r.converged);
    CHECK(std::abs(total_data(r.power, ref.cfg, ref.sched) - r.d_min) / r.d_min <= 1e-3);
    for (int j = 0; j < r.power.segments(); ++j) {
        CHECK(std::abs(r.power.column_sum(j) - ref.cfg.power_budget) / ref.cfg.power_budget <= 1e-3);
    }
    CHECK(r.kkt <= 10.0 * opts.eps);
}

TEST_CASE("fixed stepsize option") {
    Ref ref;
    SolverOptions opts;
    opts.fixed_step = 0.05;
    const SolveResult r = solve(ref.cfg, ref.sched, opts);
    CHECK(r.converged);
    CHECK(total_energy(r.power, ref.sched) == doctest::Approx(total_energy(ref_solution().power, ref.sched)).epsilon(1e-2));
}

TEST_CASE("tiny instance against grid search") {
    ScenarioConfig cfg;
    cfg.relays = 2;
    cfg.bins = 2;
    const SegmentSchedule s = segment_boundaries(cfg);
    const SolveResult r = solve(cfg, s);
    REQUIRE(r.converged);
    oracle::Geometry g;
    g.m = 2;
    g.n = 2;
    const oracle::GridResult grid = oracle::tiny_grid_search(g, oracle::Radio{}, s.boundaries, r.d_min);
    REQUIRE(grid.found);
    CHECK(total_energy(r.power, s) <= grid.energy * 1.02);
}

TEST_CASE("solver options validation") {
    SolverOptions o;
    o.growth = 1.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
    o = {};
    o.eps = 0.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
    o = {};
    o.fixed_step = -1.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
}

TEST_CASE("termination waits for the inner solve") {
    ScenarioConfig cfg;
    cfg.relays = 2;
    SolverOptions opts;
    opts.max_inner = 200;
    opts.budget = BudgetMode::Equality;
    const SolveResult r = solve(cfg, segment_boundaries(cfg), opts);
    REQUIRE(!r.history.empty());
    bool resumed = false;
    for (const CycleRecord& c : r.history) {
        if (c.action == UpdateCase::ResumeInner) {
            resumed = true;
            CHECK(c.residual <= opts.eps);
            CHECK(c.inner_iterations == opts.max_inner);
        }
    }
    CHECK(resumed);
    if (r.converged) {
        const CycleRecord& last = r.history.back();
        CHECK(last.action == UpdateCase::Terminate);
        CHECK((last.inner_converged || last.inner_iterations < opts.max_inner));
        CHECK(r.kkt <= 10.0 * opts.eps);
    }
}
