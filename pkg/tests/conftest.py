"""Shared fixtures.

The long symplectic runs, their Runge-Kutta baselines and the compiled vector
fields are expensive (numba compiles each field closure once per process), so
everything heavyweight lives in session-scoped fixtures keyed to one preset
instance; SystemPreset caches its compiled fields, which keeps the whole suite
to a handful of compilations.
"""

import numpy as np
import pytest

from liepoisson import (
    GAUSS4,
    RK4,
    IntegratorConfig,
    PhasePoint,
    get_preset,
    integrate,
    momentum_map,
    trajectory_invariants,
)
from liepoisson.backend import warmup_warning_filter

warmup_warning_filter()

SEED = 20260823

# verdict lines from the acceptance tests, replayed after the run so they
# survive output capture
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance report")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def kida():
    return get_preset("kida")


@pytest.fixture(scope="session")
def rattleback():
    return get_preset("rattleback")


@pytest.fixture(scope="session")
def heavy_top():
    return get_preset("heavy_top")


@pytest.fixture(scope="session")
def all_presets(kida, rattleback, heavy_top):
    return {"kida": kida, "rattleback": rattleback, "heavy_top": heavy_top}


def collective_run(preset, dt, t_end, tableau=GAUSS4):
    """Pin, lift and integrate; returns the pinning result, the phase-space
    trajectory and its invariant series keyed by name."""
    pin = preset.initial_phase_point()
    traj = integrate(
        preset.collective_field(),
        pin.point.flat(),
        IntegratorConfig(tableau=tableau, dt=dt),
        t_end,
        kind="phase",
    )
    series = {
        s.name: s
        for s in trajectory_invariants(preset.algebra, preset.ham, traj, preset.sign)
    }
    return {"pin": pin, "traj": traj, "series": series}


def baseline_run(preset, dt, t_end):
    """Direct RK4 on the dual equations; Casimir and energy series by name."""
    traj = integrate(
        preset.lp_field(),
        preset.mu0,
        IntegratorConfig(tableau=RK4, dt=dt),
        t_end,
        kind="dual",
    )
    series = {
        s.name: s
        for s in trajectory_invariants(preset.algebra, preset.ham, traj, preset.sign)
    }
    return {"traj": traj, "series": series}


@pytest.fixture(scope="session")
def kida_drift(kida):
    return {
        "collective": collective_run(kida, 0.1, 1000.0),
        "baseline": baseline_run(kida, 0.1, 1000.0),
    }


@pytest.fixture(scope="session")
def rattleback_drift(rattleback):
    return {
        "collective": collective_run(rattleback, 0.01, 500.0),
        "baseline": baseline_run(rattleback, 0.01, 500.0),
    }


@pytest.fixture(scope="session")
def heavy_top_drift(heavy_top):
    return {
        "collective": collective_run(heavy_top, 0.01, 30.0),
        "baseline": baseline_run(heavy_top, 0.01, 30.0),
    }


@pytest.fixture(scope="session")
def pushforward_errors(all_presets):
    """Max-norm gap at t_end between the projected collective solution
    (Gauss dt=1e-3) and a direct fine Runge-Kutta reference (dt=1e-5)."""
    horizons = {"kida": 10.0, "rattleback": 5.0, "heavy_top": 5.0}
    out = {}
    for name, preset in all_presets.items():
        t_end = horizons[name]
        n = preset.algebra.n
        pin = preset.initial_phase_point()

        nsteps = round(t_end / 1e-3)
        traj = integrate(
            preset.collective_field(),
            pin.point.flat(),
            IntegratorConfig(tableau=GAUSS4, dt=1e-3, sample_stride=nsteps),
            t_end,
            kind="phase",
        )
        mu_end = momentum_map(
            preset.algebra, PhasePoint.from_flat(traj.final_state, n), preset.sign
        )

        nref = round(t_end / 1e-5)
        ref = integrate(
            preset.lp_field(),
            preset.mu0,
            IntegratorConfig(tableau=RK4, dt=1e-5, sample_stride=nref),
            t_end,
            kind="dual",
        )
        out[name] = float(np.max(np.abs(mu_end - ref.final_state)))
    return out
