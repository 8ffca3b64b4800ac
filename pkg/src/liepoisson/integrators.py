"""Fixed-step Runge-Kutta integration, explicit and implicit.

The implicit path implements the s-stage collocation update

    Y_i = y + dt sum_j A_ij f(Y_j),      y+ = y + dt sum_i b_i f(Y_i)

solved per step either by simplified Newton (one finite-difference Jacobian
of f per step, frozen across iterations) or by fixed-point iteration.  The
shipped implicit tableaus are Gauss-Legendre collocation, which makes the map
symplectic and conserves quadratic first integrals to solver tolerance; that
exactness is the whole point of lifting Lie-Poisson systems to canonical form
before integrating.

Both stepping cores are written once in loop/numpy style and run either
interpreted (pure-numpy fallback) or numba-compiled, selected by the backend.
"""

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import backend
from .errors import StepError

NEWTON_TOL = 1e-13
NEWTON_MAXIT = 25
JACOBIAN_MODES = ("finite_difference", "none")


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int

    def __post_init__(self):
        A = np.ascontiguousarray(self.A, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        c = np.ascontiguousarray(self.c, dtype=np.float64)
        s = b.shape[0]
        if A.shape != (s, s) or c.shape != (s,):
            raise ValueError("tableau arrays must have shapes (s,s), (s,), (s,)")
        for arr in (A, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def stages(self) -> int:
        return self.b.shape[0]

    @property
    def implicit(self) -> bool:
        # any entry on or above the diagonal makes the stage system implicit
        return bool(np.any(np.triu(self.A) != 0.0))

    def symplecticity_defect(self) -> float:
        """max_ij |b_i A_ij + b_j A_ji - b_i b_j|; zero for symplectic methods."""
        m = self.b[:, None] * self.A + (self.b[:, None] * self.A).T - np.outer(self.b, self.b)
        return float(np.max(np.abs(m)))

    @property
    def symplectic(self) -> bool:
        return self.symplecticity_defect() <= 1e-15


_S3 = math.sqrt(3.0) / 6.0

MIDPOINT = ButcherTableau(
    name="midpoint", A=[[0.5]], b=[1.0], c=[0.5], order=2
)
GAUSS4 = ButcherTableau(
    name="gl4",
    A=[[0.25, 0.25 - _S3], [0.25 + _S3, 0.25]],
    b=[0.5, 0.5],
    c=[0.5 - _S3, 0.5 + _S3],
    order=4,
)
RK4 = ButcherTableau(
    name="rk4",
    A=[[0, 0, 0, 0], [0.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 1.0, 0]],
    b=[1 / 6, 1 / 3, 1 / 3, 1 / 6],
    c=[0, 0.5, 0.5, 1.0],
    order=4,
)

TABLEAUS = {t.name: t for t in (MIDPOINT, GAUSS4, RK4)}


@dataclass(frozen=True)
class IntegratorConfig:
    tableau: ButcherTableau
    dt: float
    newton_tolerance: float = NEWTON_TOL
    max_newton_iterations: int = NEWTON_MAXIT
    jacobian: str = "finite_difference"  # or "none" for fixed-point iteration
    jacobian_fd_step: float = 1e-6
    warm_start: bool = False
    sample_stride: int = 1

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if self.jacobian not in JACOBIAN_MODES:
            raise ValueError(f"jacobian must be one of {JACOBIAN_MODES}")
        if not (self.newton_tolerance > 0):
            raise ValueError("newton_tolerance must be positive")


@dataclass(frozen=True)
class Trajectory:
    """Sampled states on the uniform grid t_k = k * stride * dt.

    kind tags the state space ("phase" for flat (q, p), "dual" for mu).
    For implicit runs newton_iteration_stats holds the per-step sweep counts.
    """

    times: np.ndarray
    states: np.ndarray
    kind: str = "generic"
    newton_iteration_stats: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.times.shape[0] != self.states.shape[0]:
            raise ValueError("times and states must have matching length")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return self.times.shape[0]


# ------------------------------------------------------------- stepping cores
# Single source for both backends.  Failure is reported through the return
# value (step index, residual) because compiled code cannot raise rich errors.


def _erk_core(f, y0, dt, nsteps, A, b, stride, nsamp):
    d = y0.shape[0]
    s = b.shape[0]
    out = np.empty((nsamp, d))
    out[0, :] = y0
    y = y0.copy()
    K = np.empty((s, d))
    row = 1
    fail_step = -1
    for step in range(nsteps):
        for i in range(s):
            yi = y.copy()
            for j in range(i):
                aij = A[i, j]
                if aij != 0.0:
                    yi += (dt * aij) * K[j]
            K[i, :] = f(yi)
        y = y + dt * (b @ K)
        if not np.all(np.isfinite(y)):
            fail_step = step
            break
        if (step + 1) % stride == 0 and row < nsamp:
            out[row, :] = y
            row += 1
    return out, row, fail_step


def _irk_core(f, y0, dt, nsteps, A, b, tol, maxit, use_newton, warm_start,
              stride, nsamp, jac_step):
    d = y0.shape[0]
    s = b.shape[0]
    out = np.empty((nsamp, d))
    out[0, :] = y0
    iters = np.zeros(nsteps, dtype=np.int64)
    y = y0.copy()
    Y = np.empty((s, d))
    Z = np.zeros((s, d))  # converged stage offsets, reused as warm start
    M = np.empty((s * d, s * d))
    Jf = np.empty((d, d))
    row = 1
    fail_step = -1
    fail_res = 0.0
    for step in range(nsteps):
        for i in range(s):
            if warm_start:
                Y[i, :] = y + Z[i]
            else:
                Y[i, :] = y
        scale = 1.0 + np.max(np.abs(y))
        if use_newton:
            for j in range(d):
                h = jac_step * (1.0 + abs(y[j]))
                yp = y.copy()
                yp[j] += h
                ym = y.copy()
                ym[j] -= h
                Jf[:, j] = (f(yp) - f(ym)) / (2.0 * h)
            M[:, :] = 0.0
            for i in range(s * d):
                M[i, i] = 1.0
            for i in range(s):
                for j in range(s):
                    M[i * d:(i + 1) * d, j * d:(j + 1) * d] -= (dt * A[i, j]) * Jf
        F = np.empty((s, d))
        converged = False
        res = 0.0
        nit = 0
        for _ in range(maxit):
            for i in range(s):
                F[i, :] = f(Y[i])
            G = Y - y - dt * (A @ F)
            nit += 1
            res = np.max(np.abs(G)) / scale
            if res <= tol:
                converged = True
                break
            if not np.isfinite(res):
                break
            if use_newton:
                delta = np.linalg.solve(M, -G.copy().reshape(s * d))
                Y += delta.reshape(s, d)
            else:
                Y = y + dt * (A @ F)
        iters[step] = nit
        if not converged:
            fail_step = step
            fail_res = res
            break
        y = y + dt * (b @ F)
        if not np.all(np.isfinite(y)):
            fail_step = step
            fail_res = res
            break
        if warm_start:
            for i in range(s):
                Z[i, :] = Y[i] - y
        if (step + 1) % stride == 0 and row < nsamp:
            out[row, :] = y
            row += 1
    return out, row, iters, fail_step, fail_res


_compiled_cores: dict = {}


def _get_core(kind: str, compiled: bool):
    src = _erk_core if kind == "erk" else _irk_core
    if not compiled:
        return src
    if kind not in _compiled_cores:
        _compiled_cores[kind] = backend.compile_callable(src)
    return _compiled_cores[kind]


def _plan(dt, t_end, stride):
    nsteps = int(math.floor(t_end / dt + 1e-9))
    nsamp = nsteps // stride + 1
    return nsteps, nsamp


def integrate(f, y0, config: IntegratorConfig, t_end: float, kind: str = "generic"):
    """Integrate y' = f(y) from t=0 to t_end with fixed step config.dt.

    Uses the compiled stepping core when the backend is on and ``f`` is a
    compiled function; otherwise runs the same core interpreted.  Raises
    StepError if a step leaves the domain (non-finite state) or the stage
    solve fails to converge.
    """
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    tab = config.tableau
    stride = config.sample_stride
    nsteps, nsamp = _plan(config.dt, t_end, stride)
    compiled = backend.USE_NUMBA and backend.is_compiled(f)
    times = config.dt * stride * np.arange(nsamp)
    stats = None
    with np.errstate(all="ignore"):
        if tab.implicit:
            core = _get_core("irk", compiled)
            out, row, iters, fail_step, fail_res = core(
                f, y0, config.dt, nsteps, tab.A, tab.b,
                config.newton_tolerance, config.max_newton_iterations,
                config.jacobian == "finite_difference", config.warm_start,
                stride, nsamp, config.jacobian_fd_step,
            )
            stats = iters
            if fail_step >= 0:
                raise StepError(
                    f"implicit stage solve failed at step {fail_step} "
                    f"(t={fail_step * config.dt:.6g}), residual {fail_res:.3e}; "
                    "the state may have left the Hamiltonian's domain or dt is too large",
                    step=int(fail_step), residual=float(fail_res),
                )
        else:
            core = _get_core("erk", compiled)
            out, row, fail_step = core(
                f, y0, config.dt, nsteps, tab.A, tab.b, stride, nsamp
            )
            if fail_step >= 0:
                raise StepError(
                    f"state became non-finite at step {fail_step} "
                    f"(t={fail_step * config.dt:.6g}); "
                    "the trajectory left the domain or dt is too large",
                    step=int(fail_step),
                )
    if row != nsamp:  # pragma: no cover - guarded by the raises above
        out = out[:row]
        times = times[:row]
    return Trajectory(times=times, states=out, kind=kind,
                      newton_iteration_stats=stats)


def step_explicit_rk4(f, y, dt: float) -> np.ndarray:
    """One classical RK4 step (interpreted path; use integrate for long runs)."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    out, row, fail = _erk_core(f, y, dt, 1, RK4.A, RK4.b, 1, 2)
    if fail >= 0:
        raise StepError("state became non-finite within the step", step=0)
    return out[1]


def step_implicit_rk(f, y, config: IntegratorConfig) -> np.ndarray:
    """One implicit RK step with the configured tableau and stage solver."""
    if not config.tableau.implicit:
        raise ValueError("step_implicit_rk needs an implicit tableau")
    y = np.ascontiguousarray(y, dtype=np.float64)
    with np.errstate(all="ignore"):
        out, row, iters, fail_step, fail_res = _irk_core(
            f, y, config.dt, 1, config.tableau.A, config.tableau.b,
            config.newton_tolerance, config.max_newton_iterations,
            config.jacobian == "finite_difference", False, 1, 2,
            config.jacobian_fd_step,
        )
    if fail_step >= 0:
        raise StepError(
            f"stage solve failed (residual {fail_res:.3e})",
            step=0, residual=float(fail_res),
        )
    return out[1]


@dataclass(frozen=True)
class OrderEstimate:
    slope: float
    dts: tuple
    errors: tuple


def estimate_order(f, y0, t_end, dts, tableau: ButcherTableau,
                   config: Optional[IntegratorConfig] = None,
                   exact=None) -> OrderEstimate:
    """Least-squares slope of log error vs log dt at t_end.

    The error is the max-norm difference of the final state against ``exact``
    (a callable t -> y) when given, else against a reference computed with the
    same method at min(dts)/100.  Runs that fail or produce zero error are
    dropped with a warning; at least two usable points are required.
    """
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    dts = sorted(float(d) for d in dts)
    template = config if config is not None else IntegratorConfig(
        tableau=tableau, dt=dts[0]
    )

    def final_state(dt):
        nsteps, _ = _plan(dt, t_end, 1)
        cfg = replace(template, tableau=tableau, dt=dt,
                      sample_stride=max(nsteps, 1))
        return integrate(f, y0, cfg, t_end).final_state

    if exact is not None:
        ref = np.asarray(exact(t_end), dtype=np.float64)
    else:
        ref = final_state(dts[0] / 100.0)

    used, errs = [], []
    for dt in dts:
        try:
            err = float(np.max(np.abs(final_state(dt) - ref)))
        except StepError as e:
            warnings.warn(f"dt={dt} excluded from order fit: {e}")
            continue
        if not np.isfinite(err) or err == 0.0:
            warnings.warn(f"dt={dt} excluded from order fit: error {err}")
            continue
        used.append(dt)
        errs.append(err)
    if len(used) < 2:
        raise ValueError("not enough convergent runs to estimate an order")
    slope = float(np.polyfit(np.log(used), np.log(errs), 1)[0])
    return OrderEstimate(slope=slope, dts=tuple(used), errors=tuple(errs))
