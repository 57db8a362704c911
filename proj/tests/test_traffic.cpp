// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "railrelay/allocators.hpp"
#include "railrelay/error.hpp"
#include "railrelay/traffic.hpp"

using namespace railrelay;

namespace {

AllocationMatrix random_matrix(const ScenarioConfig& cfg, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    AllocationMatrix p = AllocationMatrix::zeros(cfg);
    for (int i = 0; i < p.relays(); ++i) {
        for (int j = 0; j < p.segments(); ++j) {
            if (p.active(i, j)) p(i, j) = u(rng);
        }
    }
    return p;
}

}  // namespace

TEST_CASE("allocation matrix mask and indexing") {
    const ScenarioConfig cfg;
    AllocationMatrix p = AllocationMatrix::zeros(cfg);
    CHECK(p.relays() == 4);
    CHECK(p.segments() == 12);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 12; ++j) CHECK(p.active(i, j) == active_segments(cfg, i).contains(j));
    }
    CHECK_THROWS_AS(p(4, 0), DomainError);
    CHECK_THROWS_AS(p(0, 12), DomainError);
    p(1, 2) = 3.0;
    CHECK(p.column_sum(2) == 3.0);
    CHECK(p.scaled(2.0)(1, 2) == 6.0);
    CHECK(mirrored(mirrored(p)) == p);
    CHECK(mirrored(p)(2, 9) == 3.0);
}

TEST_CASE("energy of the constant scheme") {
    const ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    const AllocationMatrix c = constant_alloc(cfg, s);
    // 0.75 + 1.5 + 2.25 + 6 * 2.5 + 2.25 + 1.5 + 0.75
    CHECK(std::abs(total_energy(c, s) - 24.0) <= 1e-9);
    CHECK(total_energy(AllocationMatrix::zeros(cfg), s) == 0.0);
    CHECK(total_energy(c.scaled(1.7), s) == doctest::Approx(1.7 * 24.0).epsilon(1e-14));
    const auto per = energy_per_segment(c, s);
    double sum = 0.0;
    for (double e : per) sum += e;
    CHECK(sum == doctest::Approx(24.0).epsilon(1e-14));

    ScenarioConfig other = cfg;
    other.relays = 3;
    CHECK_THROWS_AS(total_energy(c, segment_boundaries(other)), DomainError);
}

TEST_CASE("segment data") {
    const ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    CHECK(segment_data(0.0, 0, 3, cfg, s) == 0.0);

    // Frozen from a 1e5-point midpoint sum of the written-out link budget.
    const double oracle_bits = 6.187104123152e+09;
    CHECK(std::abs(segment_data(2.5, 0, 3, cfg, s) - oracle_bits) / oracle_bits <= 1e-6);

    const double a = segment_data(1.0, 0, 3, cfg, s);
    const double b = segment_data(2.0, 0, 3, cfg, s);
    const double c = segment_data(3.0, 0, 3, cfg, s);
    CHECK(a < b);
    CHECK(b < c);
    CHECK(b - a > c - b);

    CHECK_THROWS_AS(segment_data(1.0, 0, 9, cfg, s), DomainError);
    CHECK_THROWS_AS(segment_data(-1.0, 0, 3, cfg, s), DomainError);
}

TEST_CASE("segment data agrees with the Riemann oracle in every active cell") {
    const ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    for (int i = 0; i < cfg.relays; ++i) {
        const SegmentRange r = active_segments(cfg, i);
        for (int j = r.first; j <= r.last; ++j) {
            const double want = oracle::riemann_data(oracle::Geometry{}, oracle::Radio{}, i, 1.3, s.boundaries[j],
                                                     s.boundaries[j + 1], 20000);
            CHECK(std::abs(segment_data(1.3, i, j, cfg, s) - want) / want <= 1e-6);
        }
    }
}

TEST_CASE("total data") {
    const ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    CHECK(total_data(AllocationMatrix::zeros(cfg), cfg, s) == 0.0);

    AllocationMatrix one = AllocationMatrix::zeros(cfg);
    one(2, 6) = 4.0;
    CHECK(total_data(one, cfg, s) == doctest::Approx(segment_data(4.0, 2, 6, cfg, s)).epsilon(1e-14));

    // Average scheme, frozen from the midpoint oracle (2e4 nodes per cell).
    const double avg_bits = 2.037114522204e+11;
    CHECK(std::abs(total_data(average_alloc(cfg, s), cfg, s) - avg_bits) / avg_bits <= 1e-6);

    std::mt19937_64 rng(3);
    for (int k = 0; k < 10; ++k) {
        const AllocationMatrix p = random_matrix(cfg, rng, 0.0, 5.0);
        const double d = total_data(p, cfg, s);
        CHECK(std::abs(total_data(mirrored(p), cfg, s) - d) / d <= 1e-9);
    }
    for (const AllocationMatrix& p : {constant_alloc(cfg, s), average_alloc(cfg, s), random_alloc(cfg, s, rng)}) {
        const double d = total_data(p, cfg, s);
        CHECK(std::abs(total_data(mirrored(p), cfg, s) - d) / d <= 1e-9);
    }
}

TEST_CASE("data is entrywise increasing") {
    const ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    const AllocationMatrix base = average_alloc(cfg, s);
    const double d0 = total_data(base, cfg, s);
    for (int i = 0; i < base.relays(); ++i) {
        for (int j = 0; j < base.segments(); ++j) {
            if (!base.active(i, j)) continue;
            AllocationMatrix p = base;
            p(i, j) += 0.01;
            CHECK(total_data(p, cfg, s) > d0);
        }
    }
}

TEST_CASE("quadrature resolution") {
    ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    const AllocationMatrix p = average_alloc(cfg, s);
    const double coarse = total_data(p, cfg, s);
    cfg.quadrature_intervals = 64;
    const double fine = total_data(p, cfg, s);
    CHECK(std::abs(fine - coarse) / fine <= 1e-7);
}

TEST_CASE("gradient of total data") {
    const ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    std::mt19937_64 rng(11);
    const double step = 1e-4 * cfg.power_budget;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const AllocationMatrix p = random_matrix(cfg, rng, 0.05, 5.0);
        const AllocationMatrix g = grad_total_data(p, cfg, s);
        std::vector<bool> mask(p.values().size());
        for (int i = 0; i < p.relays(); ++i) {
            for (int j = 0; j < p.segments(); ++j) mask[i * p.segments() + j] = p.active(i, j);
        }
        const auto fd = oracle::fd_gradient(
            [&](const std::vector<double>& x) {
                AllocationMatrix q = p;
                q.values() = x;
                return total_data(q, cfg, s);
            },
            p.values(), mask, step);
        for (int i = 0; i < p.relays(); ++i) {
            for (int j = 0; j < p.segments(); ++j) {
                if (!p.active(i, j)) {
                    CHECK(g(i, j) == 0.0);
                    continue;
                }
                CHECK(g(i, j) >= 0.0);
                worst = std::max(worst, std::abs(g(i, j) - fd[i * p.segments() + j]) / std::abs(g(i, j)));
            }
        }
    }
    CHECK(worst <= 1e-4);

    // Same power and duration: the abeam bin beats the cell-edge bin.
    AllocationMatrix flat = AllocationMatrix::zeros(cfg);
    for (int j = 3; j <= 8; ++j) flat(0, j) = 2.5;
    const AllocationMatrix g = grad_total_data(flat, cfg, s);
    CHECK(g(0, 4) > g(0, 8));
}

TEST_CASE("efficiency metrics") {
    CHECK(energy_efficiency(24e9, 24.0) == doctest::Approx(1e9));
    CHECK(energy_efficiency(48e9, 24.0) == doctest::Approx(2e9));
    CHECK(energy_efficiency(48e9, 48.0) == doctest::Approx(1e9));
    CHECK_THROWS_AS(energy_efficiency(1.0, 0.0), DomainError);

    const ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    CHECK(spectral_efficiency(0.0, cfg, s) == 0.0);
    CHECK(spectral_efficiency(cfg.bandwidth * s.total(), cfg, s) == doctest::Approx(1.0));

    const AllocationMatrix c = constant_alloc(cfg, s);
    const MetricsRecord m = evaluate_metrics(c, cfg, s);
    CHECK(m.energy == doctest::Approx(24.0));
    CHECK(m.data == doctest::Approx(total_data(c, cfg, s)).epsilon(1e-14));
    CHECK(m.energy_efficiency == doctest::Approx(m.data / m.energy).epsilon(1e-12));
    CHECK(m.spectral_efficiency == doctest::Approx(m.data / (2.16e9 * 3.3)).epsilon(1e-12));
    double d = 0.0;
    for (double x : m.data_per_segment) d += x;
    CHECK(d == doctest::Approx(m.data).epsilon(1e-12));

    const MetricsRecord zero = evaluate_metrics(AllocationMatrix::zeros(cfg), cfg, s);
    CHECK(zero.energy_efficiency == 0.0);
}

TEST_CASE("channel table matches the free functions") {
    const ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    const ChannelTable table(cfg, s);
    std::mt19937_64 rng(5);
    const AllocationMatrix p = random_matrix(cfg, rng, 0.0, 4.0);
    CHECK(table.total_data(p) == doctest::Approx(total_data(p, cfg, s)).epsilon(1e-14));
    const AllocationMatrix g = table.gradient(p);
    const AllocationMatrix g2 = grad_total_data(p, cfg, s);
    for (std::size_t k = 0; k < g.values().size(); ++k) CHECK(g.values()[k] == doctest::Approx(g2.values()[k]));
}

TEST_CASE("evaluation with the planned speed equal to the true speed") {
    const ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    const AllocationMatrix p = average_alloc(cfg, s);
    ChannelOptions opts;
    opts.true_speed = cfg.speed;
    const double plain = total_data(p, cfg, s);
    CHECK(std::abs(total_data(p, cfg, s, opts) - plain) / plain <= 1e-12);

    // Planner overestimates the speed: relays cover less track per segment,
    // so the trailing relays leave no earlier and some nodes fall outside.
    ScenarioConfig plan = cfg;
    plan.speed = cfg.speed + 5.0;
    const SegmentSchedule ps = segment_boundaries(plan);
    const AllocationMatrix pp = average_alloc(plan, ps);
    const double mismatched = total_data(pp, plan, ps, opts);
    CHECK(mismatched > 0.0);
    CHECK(mismatched != doctest::Approx(total_data(pp, plan, ps)));
}

TEST_CASE("fading trace lowers the data when it attenuates") {
    const ScenarioConfig cfg;
    const SegmentSchedule s = segment_boundaries(cfg);
    const AllocationMatrix p = average_alloc(cfg, s);
    ChannelOptions opts;
    opts.fading = [](int, int, double) { return 3.0; };
    CHECK(total_data(p, cfg, s, opts) < total_data(p, cfg, s));
}
