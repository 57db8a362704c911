# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The railrelay Authors
"""Power allocation for train-roof mobile relays under a trackside mmWave radio head."""

from ._core import (
    BudgetMode,
    ConfigError,
    DomainError,
    DopplerTable,
    ExperimentConfig,
    InfeasibleError,
    RunRecord,
    ScenarioConfig,
    SegmentSchedule,
    SolveResult,
    SolverOptions,
    active_segments,
    average_alloc,
    constant_alloc,
    data_floor,
    evaluate,
    from_csv,
    load_config,
    max_antenna_gain,
    max_doppler,
    monte_carlo_velocity_error,
    mrs_in_cell,
    noise_power_dbm,
    parse_config,
    path_loss,
    random_alloc,
    relative_doppler,
    rician_samples,
    run_scenario,
    segment_boundaries,
    solve,
    sweep,
    to_csv,
    true_doppler,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
