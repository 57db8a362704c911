// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#include "railrelay/allocators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "railrelay/error.hpp"

namespace railrelay {

ChannelSnapshot channel_snapshot(const ScenarioConfig& cfg, const SegmentSchedule& sched,
                                 const FadingModel* fading, std::mt19937_64* rng) {
    if (fading && !rng) throw DomainError("fading snapshot needs an rng");
    ChannelSnapshot snap{AllocationMatrix::zeros(cfg)};
    for (int i = 0; i < cfg.relays; ++i) {
        const SegmentRange r = active_segments(cfg, i);
        for (int j = r.first; j <= r.last; ++j) {
            const double t = 0.5 * (sched.boundaries[j] + sched.boundaries[j + 1]);
            double h_db = -path_loss(mr_rrh_distance(cfg, i, t), cfg.wavelength, cfg.pathloss_exponent) -
                          cfg.shadowing_db;
            if (fading) {
                const double r_env = std::max(sample_rician_envelope(*fading, *rng), 1e-12);
                h_db -= fading_attenuation_db(*fading, r_env);
            }
            snap.gain(i, j) = std::pow(10.0, h_db / 10.0);
        }
    }
    return snap;
}

AllocationMatrix constant_alloc(const ScenarioConfig& cfg, const SegmentSchedule& sched) {
    (void)sched;
    AllocationMatrix p = AllocationMatrix::zeros(cfg);
    const double each = cfg.power_budget / cfg.relays;
    for (int i = 0; i < p.relays(); ++i) {
        for (int j = 0; j < p.segments(); ++j) {
            if (p.active(i, j)) p(i, j) = each;
        }
    }
    return p;
}

AllocationMatrix average_alloc(const ScenarioConfig& cfg, const SegmentSchedule& sched) {
    (void)sched;
    AllocationMatrix p = AllocationMatrix::zeros(cfg);
    for (int j = 0; j < p.segments(); ++j) {
        const double each = cfg.power_budget / mrs_in_cell(cfg, j);
        for (int i = 0; i < p.relays(); ++i) {
            if (p.active(i, j)) p(i, j) = each;
        }
    }
    return p;
}

AllocationMatrix random_alloc(const ScenarioConfig& cfg, const SegmentSchedule& sched, std::mt19937_64& rng) {
    (void)sched;
    AllocationMatrix p = AllocationMatrix::zeros(cfg);
    std::exponential_distribution<double> spacing(1.0);
    // Normalised exponential spacings are uniform on the simplex.
    for (int j = 0; j < p.segments(); ++j) {
        double sum = 0.0;
        for (int i = 0; i < p.relays(); ++i) {
            if (p.active(i, j)) {
                p(i, j) = spacing(rng);
                sum += p(i, j);
            }
        }
        for (int i = 0; i < p.relays(); ++i) {
            if (p.active(i, j)) p(i, j) *= cfg.power_budget / sum;
        }
    }
    return p;
}

AllocationMatrix csi_alloc(const ScenarioConfig& cfg, const SegmentSchedule& sched, const ChannelSnapshot& snap,
                           double alpha) {
    (void)sched;
    if (!(alpha > 0.0)) throw DomainError("CSI exponent alpha must be positive");
    AllocationMatrix p = AllocationMatrix::zeros(cfg);
    if (!snap.gain.same_shape(p)) throw DomainError("channel snapshot shape does not match scenario");
    for (int j = 0; j < p.segments(); ++j) {
        double sum = 0.0;
        for (int i = 0; i < p.relays(); ++i) {
            if (!p.active(i, j)) continue;
            const double g = snap.gain(i, j);
            if (!(g > 0.0)) {
                throw DomainError("zero channel gain for relay " + std::to_string(i) + " in segment " +
                                  std::to_string(j));
            }
            p(i, j) = std::pow(g, -alpha);
            sum += p(i, j);
        }
        for (int i = 0; i < p.relays(); ++i) {
            if (p.active(i, j)) p(i, j) *= cfg.power_budget / sum;
        }
    }
    return p;
}

std::string Violation::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Shape: os << "matrix shape does not match scenario"; break;
        case Kind::Mask: os << "power " << value << " W on inactive entry (" << relay << ", " << segment << ")"; break;
        case Kind::Negative: os << "negative power " << value << " W at (" << relay << ", " << segment << ")"; break;
        case Kind::Budget: os << "segment " << segment << " column sum " << value << " W exceeds budget"; break;
    }
    return os.str();
}

std::vector<Violation> validate_alloc(const AllocationMatrix& p, const ScenarioConfig& cfg,
                                      const SegmentSchedule& sched, double tol) {
    std::vector<Violation> out;
    if (p.relays() != cfg.relays || p.segments() != cfg.segment_count() || sched.segments() != p.segments()) {
        out.push_back({Violation::Kind::Shape});
        return out;
    }
    const AllocationMatrix reference = AllocationMatrix::zeros(cfg);
    for (int j = 0; j < p.segments(); ++j) {
        for (int i = 0; i < p.relays(); ++i) {
            const double v = p(i, j);
            if (!reference.active(i, j) && v != 0.0) out.push_back({Violation::Kind::Mask, i, j, v});
            if (v < 0.0) out.push_back({Violation::Kind::Negative, i, j, v});
        }
        const double col = p.column_sum(j);
        if (col > cfg.power_budget + tol) out.push_back({Violation::Kind::Budget, -1, j, col});
    }
    return out;
}

}  // namespace railrelay
