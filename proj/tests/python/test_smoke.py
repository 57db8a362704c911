# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The railrelay Authors

import math
import os
from pathlib import Path

import numpy as np
import pytest

import railrelay as rr

ROOT = Path(os.environ.get("RAILRELAY_SOURCE_DIR", Path(__file__).resolve().parents[2]))
REF = ROOT / "configs" / "ref.cfg"


@pytest.fixture(scope="module")
def ref():
    return rr.load_config(str(REF))


def test_config_roundtrip(ref):
    assert ref.scenario.relays == 4
    assert ref.scenario.speed == pytest.approx(300 / 3.6)
    assert ref.scenario.power_budget == pytest.approx(10.0)
    again = rr.parse_config(ref.canonical_text())
    assert again.canonical_text() == ref.canonical_text()
    assert again.scenario_hash() == ref.scenario_hash()


def test_config_errors():
    with pytest.raises(rr.ConfigError, match="line 1"):
        rr.parse_config("bogus = 1\n")
    with pytest.raises(ValueError):
        rr.parse_config("d0 = 20 m\n")


def test_geometry(ref):
    sched = rr.segment_boundaries(ref.scenario)
    assert len(sched.durations) == ref.scenario.segment_count == 12
    assert sched.boundaries[-1] == pytest.approx(ref.scenario.traversal_time)
    assert [rr.mrs_in_cell(ref.scenario, j) for j in range(12)] == [1, 2, 3, 4, 4, 4, 4, 4, 4, 3, 2, 1]
    assert rr.active_segments(ref.scenario, 1) == (1, 9)


def test_link_budget():
    assert rr.max_antenna_gain(30.0) == pytest.approx(15.90998, abs=1e-5)
    assert rr.noise_power_dbm(2.16e9, 6.0) == pytest.approx(-74.65546, abs=1e-5)


def test_allocations(ref):
    s = ref.scenario
    const = rr.constant_alloc(s)
    assert const.shape == (4, 12)
    assert rr.evaluate(const, s)["energy"] == pytest.approx(24.0, abs=1e-9)
    avg = rr.average_alloc(s)
    assert np.allclose(avg.sum(axis=0), s.power_budget)
    rnd = rr.random_alloc(s, seed=3)
    assert np.all(rnd >= 0.0)
    assert np.allclose(rnd.sum(axis=0), s.power_budget)
    with pytest.raises(rr.DomainError):
        bad = avg.copy()
        bad[3, 0] = 1.0
        rr.evaluate(bad, s)


def test_solve(ref):
    s = ref.scenario
    res = rr.solve(s)
    assert res.converged
    m = rr.evaluate(res.power, s)
    assert m["data"] == pytest.approx(res.d_min, rel=1e-3)
    assert np.all(res.power.sum(axis=0) <= s.power_budget * (1 + 1e-3))
    saving = 1.0 - m["energy"] / 24.0
    assert 0.6 <= saving <= 0.9
    assert res.kkt <= 10 * ref.solver.eps


def test_run_and_csv(ref):
    rows = rr.run_scenario(ref)
    assert sorted(r.scheme for r in rows) == sorted(ref.schemes)
    text = rr.to_csv(rows)
    assert text == rr.to_csv(rr.run_scenario(ref))
    back = rr.from_csv(text)
    assert [r.energy for r in back] == [r.energy for r in rows]
    opt = next(r for r in rows if r.scheme == "optimized")
    assert all(opt.energy <= r.energy for r in rows)


def test_sweep_and_monte_carlo(ref):
    rows = rr.sweep(ref, "v", ["250km/h", "350km/h"], trials=1, jobs=2)
    means = [r for r in rows if r.kind == "mean" and r.scheme == "constant"]
    assert len(means) == 2
    assert means[0].energy > means[1].energy
    mc = rr.monte_carlo_velocity_error(ref, [0.0, 3.0], trials=4, jobs=2)
    assert {r.value for r in mc if r.kind == "mean"} == {0.0, 3.0}


def test_doppler(ref):
    s = ref.scenario
    fmax = rr.max_doppler(s)
    assert fmax == pytest.approx(16666.667, abs=1.0)
    table = rr.DopplerTable.build(s)
    for x in table.positions[::17]:
        assert table.estimate(s, x) == rr.true_doppler(s, x)
    assert abs(table.estimate(s, 57.3, noise_db_std=4.0, seed=9)) <= fmax
    assert table.to_text().startswith("# railrelay doppler table v1")


def test_rician_moments():
    r = np.asarray(rr.rician_samples(10.0, 20000, seed=5))
    assert np.mean(r**2) == pytest.approx(1.0, rel=0.03)
    assert math.isfinite(r.max())
