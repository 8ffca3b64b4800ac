"""Invariant drift extraction, run comparison, and CSV exchange.

Relative errors are measured against the initial value with an absolute
guard:  e(t) = (I(t) - I(0)) / max(|I(0)|, 1e-14).  Drift is the plain
least-squares slope of e against t, which separates secular error growth
(explicit methods on Casimirs) from the bounded oscillation a symplectic
method leaves behind.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import clebsch
from .integrators import Trajectory
from .poisson import BracketSign

ABS_GUARD = 1e-14
CSV_FMT = "%.17g"
DRIFT_FACTOR = 0.1
DRIFT_FLOOR = 1e-12


@dataclass(frozen=True)
class InvariantSeries:
    name: str
    times: np.ndarray
    relative_error: np.ndarray
    drift_slope: float
    max_abs_error: float


@dataclass(frozen=True)
class ComparisonReport:
    """Per-invariant drift slopes of a run A against a baseline B.

    The verdict for an invariant passes when |slope_A| <= factor * |slope_B|
    or |slope_A| <= floor (slopes below the floor count as drift-free however
    small the baseline's drift happens to be).
    """

    slopes_a: dict
    slopes_b: dict
    verdicts: dict
    factor: float
    floor: float

    def all_pass(self) -> bool:
        return all(self.verdicts.values()) if self.verdicts else True


def drift_slope(times, errors) -> float:
    """Least-squares slope of errors vs times; 0 for fewer than 2 samples."""
    times = np.asarray(times, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if times.size < 2:
        return 0.0
    t = times - times.mean()
    denom = float(t @ t)
    if denom == 0.0:
        return 0.0
    return float(t @ (errors - errors.mean()) / denom)


def invariant_series(traj: Trajectory, name: str, fn) -> InvariantSeries:
    """Evaluate one conserved quantity along a trajectory."""
    values = np.array([fn(s) for s in traj.states])
    e = (values - values[0]) / max(abs(values[0]), ABS_GUARD)
    return InvariantSeries(
        name=name,
        times=traj.times,
        relative_error=e,
        drift_slope=drift_slope(traj.times, e),
        max_abs_error=float(np.max(np.abs(e))) if e.size else 0.0,
    )


def trajectory_invariants(algebra, ham, traj: Trajectory, sign=BracketSign.PLUS):
    """All monitored series for a trajectory, keyed by its state space.

    Phase-space runs get the full set (pairing, Killing quadratics, lifted
    Casimirs, h); dual-space runs get the Casimirs and h directly.
    """
    if traj.kind == "phase":
        evals = clebsch.invariant_evaluators(algebra, ham, sign)
    elif traj.kind == "dual":
        evals = [(f.name, f) for f in ham.casimirs] + [(ham.name, ham)]
    else:
        raise ValueError(f"cannot infer invariants for kind={traj.kind!r}")
    return [invariant_series(traj, name, fn) for name, fn in evals]


def compare_runs(series_a, series_b,
                 factor: float = DRIFT_FACTOR,
                 floor: float = DRIFT_FLOOR) -> ComparisonReport:
    """Verdicts for the invariants present in both runs (empty input passes)."""
    sa = {s.name: s for s in series_a}
    sb = {s.name: s for s in series_b}
    shared = [n for n in sa if n in sb]
    verdicts = {}
    for n in shared:
        a, b = abs(sa[n].drift_slope), abs(sb[n].drift_slope)
        verdicts[n] = bool(a <= factor * b or a <= floor)
    return ComparisonReport(
        slopes_a={n: sa[n].drift_slope for n in shared},
        slopes_b={n: sb[n].drift_slope for n in shared},
        verdicts=verdicts,
        factor=factor,
        floor=floor,
    )


# ------------------------------------------------------------------ CSV I/O
# All floats go through %.17g so that a rerun of the same configuration is
# byte-identical and values survive a text round trip exactly.


def _write_table(path, header, columns) -> None:
    rows = [",".join(header)]
    ncol = len(columns)
    nrow = columns[0].shape[0] if ncol else 0
    for r in range(nrow):
        rows.append(",".join(CSV_FMT % columns[c][r] for c in range(ncol)))
    Path(path).write_text("\n".join(rows) + "\n")


def write_trajectory_csv(path, traj: Trajectory, names) -> None:
    """t plus one column per state component, named by ``names``."""
    if len(names) != traj.states.shape[1]:
        raise ValueError("need one column name per state component")
    _write_table(
        path,
        ["t", *names],
        [traj.times] + [traj.states[:, j] for j in range(traj.states.shape[1])],
    )


def write_invariant_csv(path, series_list) -> None:
    """t plus one <name>_relerr column per invariant series."""
    if not series_list:
        raise ValueError("no invariant series to write")
    _write_table(
        path,
        ["t"] + [f"{s.name}_relerr" for s in series_list],
        [series_list[0].times] + [s.relative_error for s in series_list],
    )


def read_csv_columns(path):
    """Header list and dict column-name -> float array (strict float parse)."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = lines[0].split(",")
    data = np.array(
        [[float(v) for v in line.split(",")] for line in lines[1:]]
    ).reshape(len(lines) - 1, len(header))
    return header, {h: data[:, j] for j, h in enumerate(header)}
