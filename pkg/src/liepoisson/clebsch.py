"""Canonical lift of Lie-Poisson dynamics to T*g.

Points (q, p) in T*g map to the dual via the momentum maps

    M_plus(q, p) = -ad*_q p        M_minus(q, p) = +ad*_q p

which are Poisson maps from the canonical bracket to the plus/minus
Lie-Poisson bracket.  Pulling a Hamiltonian h back through M gives a canonical
system whose flow projects onto the Lie-Poisson flow of h, so a symplectic
integrator upstairs integrates the dual dynamics without ever discretizing
the curved bracket.  With eta = Dh(M(q, p)) the lifted field reads

    q' = +/- [eta, q]        p' = -/+ ad*_eta p        (plus / minus).

Conserved along that flow: h itself, the pairing p.q, the Killing quadratics
kappa(q, q) and (semisimple case) kappa*(p, p), and every lifted Casimir
f(M(q, p)).
"""

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import backend, kernels
from .errors import PinningError
from .lie_algebra import LieAlgebraSpec, coadjoint, kappa_sharp, killing_matrix
from .poisson import BracketSign, HamiltonianDef


class PhasePoint(NamedTuple):
    """A point of T*g in the basis of the algebra: q in g, p in g*."""

    q: np.ndarray
    p: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_flat(cls, z, n: int) -> "PhasePoint":
        z = np.asarray(z, dtype=np.float64)
        return cls(q=z[:n].copy(), p=z[n:].copy())

    @classmethod
    def of(cls, q, p) -> "PhasePoint":
        return cls(
            q=np.asarray(q, dtype=np.float64).copy(),
            p=np.asarray(p, dtype=np.float64).copy(),
        )


def momentum_map(algebra: LieAlgebraSpec, z: PhasePoint, sign=BracketSign.PLUS):
    """mu = M_sign(q, p);  component form mu_i = +/- c^k_{ij} q^j p_k."""
    sign = BracketSign.parse(sign)
    q = algebra._check_vec(z.q, "q")
    p = algebra._check_vec(z.p, "p")
    return sign.orientation * kernels.momentum_plus(algebra.c, q, p)


def momentum_jacobians(algebra: LieAlgebraSpec, z: PhasePoint, sign=BracketSign.PLUS):
    """Exact (d mu/d q, d mu/d p) at z, each (n, n)."""
    sign = BracketSign.parse(sign)
    q = algebra._check_vec(z.q, "q")
    p = algebra._check_vec(z.p, "p")
    s = sign.orientation
    return s * kernels.mm_jac_q(algebra.c, p), s * kernels.mm_jac_p(algebra.c, q)


def lifted_hamiltonian(
    algebra: LieAlgebraSpec, ham: HamiltonianDef, z: PhasePoint, sign=BracketSign.PLUS
) -> float:
    """(h o M_sign)(q, p); raises DomainError if M(z) leaves h's domain."""
    return ham(momentum_map(algebra, z, sign))


def anti_reduced_rhs(
    algebra: LieAlgebraSpec, ham: HamiltonianDef, z: PhasePoint, sign=BracketSign.PLUS
) -> PhasePoint:
    """Canonical vector field of h o M_sign at z."""
    sign = BracketSign.parse(sign)
    mu = momentum_map(algebra, z, sign)
    eta = ham.gradient(mu)  # domain-checked
    s = sign.orientation
    qdot = s * kernels.bracket(algebra.c, eta, z.q)
    pdot = -s * kernels.coadjoint(algebra.c, eta, z.p)
    return PhasePoint(q=qdot, p=pdot)


def make_collective_field(
    algebra: LieAlgebraSpec, grad: Callable, sign=BracketSign.PLUS, compiled=True
):
    """Flat-state field z = (q, p) -> zdot for the integrators.

    ``grad`` is a bare callable mu -> Dh(mu) with no domain guard; out-of-
    domain evaluations must yield non-finite values, which the steppers turn
    into StepError.  With the numba backend enabled the closure (and ``grad``
    with it) is compiled.
    """
    c = algebra.c
    n = algebra.n
    s = BracketSign.parse(sign).orientation
    mm = kernels.momentum_plus
    br = kernels.bracket
    co = kernels.coadjoint
    if compiled and backend.USE_NUMBA:
        grad = grad if backend.is_compiled(grad) else backend.compile_callable(grad)

    def field(z):
        q = z[:n]
        p = z[n:]
        mu = s * mm(c, q, p)
        eta = grad(mu)
        out = np.empty(2 * n)
        out[:n] = s * br(c, eta, q)
        out[n:] = -s * co(c, eta, p)
        return out

    if compiled and backend.USE_NUMBA:
        field = backend.compile_callable(field)
    return field


def make_lp_field(
    algebra: LieAlgebraSpec, grad: Callable, sign=BracketSign.PLUS, compiled=True
):
    """Flat-state Lie-Poisson field mu -> mudot, same compilation contract."""
    c = algebra.c
    s = BracketSign.parse(sign).orientation
    co = kernels.coadjoint
    if compiled and backend.USE_NUMBA:
        grad = grad if backend.is_compiled(grad) else backend.compile_callable(grad)

    def field(mu):
        eta = grad(mu)
        return -s * co(c, eta, mu)

    if compiled and backend.USE_NUMBA:
        field = backend.compile_callable(field)
    return field


# ----------------------------------------------------------------- invariants


@dataclass(frozen=True)
class InvariantSet:
    """Values of the conserved quantities of the lifted system at one point."""

    f0: float
    killing_q: float
    killing_p: Optional[float]
    lifted_casimirs: dict
    hamiltonian: float


def invariants(
    algebra: LieAlgebraSpec, ham: HamiltonianDef, z: PhasePoint, sign=BracketSign.PLUS
) -> InvariantSet:
    mu = momentum_map(algebra, z, sign)
    kappa = killing_matrix(algebra)
    kq = float(z.q @ kappa @ z.q)
    try:
        kp = float(z.p @ kappa_sharp(algebra, z.p))
    except Exception:
        kp = None
    return InvariantSet(
        f0=float(z.p @ z.q),
        killing_q=kq,
        killing_p=kp,
        lifted_casimirs={f.name: f(mu) for f in ham.casimirs},
        hamiltonian=ham(mu),
    )


def invariant_evaluators(
    algebra: LieAlgebraSpec, ham: HamiltonianDef, sign=BracketSign.PLUS
):
    """Ordered (name, fn) pairs mapping a flat (q, p) state to each conserved
    quantity; used to turn trajectories into invariant time series."""
    sign = BracketSign.parse(sign)
    n = algebra.n
    kappa = killing_matrix(algebra)
    evals = [("F0", lambda z: float(z[n:] @ z[:n]))]
    evals.append(("killing_q", lambda z: float(z[:n] @ kappa @ z[:n])))
    if np.linalg.matrix_rank(kappa) == n:
        kappa_inv = np.linalg.inv(kappa)
        evals.append(("killing_p", lambda z: float(z[n:] @ kappa_inv @ z[n:])))
    c = algebra.c
    s = sign.orientation

    def lift(f):
        return lambda z: f(s * kernels.momentum_plus(c, z[:n], z[n:]))

    for f in ham.casimirs:
        evals.append((f.name, lift(f)))
    evals.append((ham.name, lift(ham)))
    return evals


def poisson_map_residual(
    algebra: LieAlgebraSpec, f, g, z: PhasePoint, sign=BracketSign.PLUS
) -> float:
    """|{f o M, g o M}_canonical(z) - {f, g}_LP(M(z))|.

    The canonical side goes through the exact momentum-map Jacobians and the
    chain rule; the Lie-Poisson side contracts mu with [Df, Dg].  Agreement at
    machine precision is what certifies M as a Poisson map.
    """
    sign = BracketSign.parse(sign)
    mu = momentum_map(algebra, z, sign)
    dmu_dq, dmu_dp = momentum_jacobians(algebra, z, sign)
    df = f.gradient(mu)
    dg = g.gradient(mu)
    fq, fp = dmu_dq.T @ df, dmu_dp.T @ df
    gq, gp = dmu_dq.T @ dg, dmu_dp.T @ dg
    canonical = float(fq @ gp - gq @ fp)
    lie_poisson = sign.orientation * float(mu @ kernels.bracket(algebra.c, df, dg))
    return abs(canonical - lie_poisson)


def equivariance_residual(algebra: LieAlgebraSpec, z: PhasePoint, xi, sign=BracketSign.PLUS):
    """Norm of T M . xi_lift(z) + ad*_xi M(z); zero for a momentum map.

    xi acts on T*g by the cotangent lift q -> [xi, q], p -> -ad*_xi p.
    """
    xi = algebra._check_vec(xi, "xi")
    mu = momentum_map(algebra, z, sign)
    dmu_dq, dmu_dp = momentum_jacobians(algebra, z, sign)
    vq = kernels.bracket(algebra.c, xi, z.q)
    vp = -kernels.coadjoint(algebra.c, xi, z.p)
    return float(np.linalg.norm(dmu_dq @ vq + dmu_dp @ vp + coadjoint(algebra, xi, mu)))


# ----------------------------------------------------------- initial pinning
#
# M_sign is onto the dual only up to center directions, and its fibers are
# high-dimensional, so producing (q(0), p(0)) over a given mu0 needs a pinning
# rule.  Two strategies:
#
#   FixedQ      freeze q, solve the linear system +/- B(q) p = mu0 in the
#               least-squares sense (B(q) is often structurally singular even
#               when the system is consistent).
#   GaussNewton damped Gauss-Newton on the joint residual
#               [M_sign(q, p) - mu0 ; extra constraint residuals].


@dataclass(frozen=True, eq=False)
class Constraint:
    """Extra scalar equation r(q, p) = 0 appended to the pinning residual."""

    fn: Callable
    grad: Callable = None  # (q, p) -> (dr/dq, dr/dp); FD fallback if absent
    name: str = "constraint"

    def value(self, q, p) -> float:
        return float(self.fn(q, p))

    def gradient(self, q, p):
        if self.grad is not None:
            gq, gp = self.grad(q, p)
            return np.asarray(gq, dtype=np.float64), np.asarray(gp, dtype=np.float64)
        h = 1e-7
        n = q.size
        gq = np.empty(n)
        gp = np.empty(n)
        for i in range(n):
            qp = q.copy(); qp[i] += h
            qm = q.copy(); qm[i] -= h
            gq[i] = (self.fn(qp, p) - self.fn(qm, p)) / (2 * h)
            pp = p.copy(); pp[i] += h
            pm = p.copy(); pm[i] -= h
            gp[i] = (self.fn(q, pp) - self.fn(q, pm)) / (2 * h)
        return gq, gp


def coordinate_pin(which: str, index: int, value: float) -> Constraint:
    """Pin q[index] or p[index] to a value."""
    if which not in ("q", "p"):
        raise ValueError("which must be 'q' or 'p'")

    def fn(q, p):
        vec = q if which == "q" else p
        return vec[index] - value

    def grad(q, p):
        gq = np.zeros_like(q)
        gp = np.zeros_like(p)
        (gq if which == "q" else gp)[index] = 1.0
        return gq, gp

    return Constraint(fn=fn, grad=grad, name=f"{which}{index + 1}={value}")


def pairing_pin(value: float) -> Constraint:
    """Pin the conserved pairing p.q to a value."""
    return Constraint(
        fn=lambda q, p: float(p @ q) - value,
        grad=lambda q, p: (p.copy(), q.copy()),
        name=f"p.q={value}",
    )


@dataclass(frozen=True, eq=False)
class FixedQ:
    q: np.ndarray


@dataclass(frozen=True, eq=False)
class GaussNewton:
    constraints: tuple = ()
    seed: Optional[PhasePoint] = None  # None -> standard-normal draw from rng_seed
    rng_seed: int = 0


@dataclass(frozen=True, eq=False)
class PinningSpec:
    strategy: object  # FixedQ | GaussNewton
    tolerance: float = 1e-12
    max_iterations: int = 50


@dataclass(frozen=True)
class PinningResult:
    point: PhasePoint
    residual: float
    iterations: int


def _pin_residual(algebra, mu0, constraints, q, p, s):
    r = np.empty(algebra.n + len(constraints))
    r[: algebra.n] = s * kernels.momentum_plus(algebra.c, q, p) - mu0
    for m, con in enumerate(constraints):
        r[algebra.n + m] = con.value(q, p)
    return r


def solve_initial_point(
    algebra: LieAlgebraSpec, mu0, pinning: PinningSpec, sign=BracketSign.PLUS
) -> PinningResult:
    """Find (q0, p0) with M_sign(q0, p0) = mu0 under the pinning rule.

    Raises PinningError (with the final residual attached) when the requested
    tolerance is out of reach, e.g. when mu0 has a component along the center
    of the algebra, which no momentum-map value can carry.
    """
    mu0 = algebra._check_vec(mu0, "mu0")
    sign = BracketSign.parse(sign)
    s = sign.orientation
    n = algebra.n
    strat = pinning.strategy

    if isinstance(strat, FixedQ):
        q = algebra._check_vec(strat.q, "q")
        B = s * kernels.mm_jac_p(algebra.c, q)
        p, *_ = np.linalg.lstsq(B, mu0, rcond=None)
        res = float(np.max(np.abs(B @ p - mu0)))
        if res > pinning.tolerance:
            raise PinningError(
                f"fixed-q pinning inconsistent: mu0 is not in the range of B(q) "
                f"(residual {res:.3e}); choose a different q",
                residual=res,
            )
        return PinningResult(PhasePoint.of(q, p), res, 1)

    if not isinstance(strat, GaussNewton):
        raise TypeError(f"unknown pinning strategy {strat!r}")

    cons = tuple(strat.constraints)
    if strat.seed is not None:
        q = np.asarray(strat.seed.q, dtype=np.float64).copy()
        p = np.asarray(strat.seed.p, dtype=np.float64).copy()
    else:
        rng = np.random.default_rng(strat.rng_seed)
        q = rng.standard_normal(n)
        p = rng.standard_normal(n)

    r = _pin_residual(algebra, mu0, cons, q, p, s)
    best = float(np.max(np.abs(r)))
    it = 0
    for it in range(1, pinning.max_iterations + 1):
        if best <= pinning.tolerance:
            break
        J = np.zeros((n + len(cons), 2 * n))
        J[:n, :n] = s * kernels.mm_jac_q(algebra.c, p)
        J[:n, n:] = s * kernels.mm_jac_p(algebra.c, q)
        for m, con in enumerate(cons):
            gq, gp = con.gradient(q, p)
            J[n + m, :n] = gq
            J[n + m, n:] = gp
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        alpha = 1.0
        while alpha >= 1e-4:
            qn = q + alpha * step[:n]
            pn = p + alpha * step[n:]
            rn = _pin_residual(algebra, mu0, cons, qn, pn, s)
            if float(np.max(np.abs(rn))) < best:
                q, p, r = qn, pn, rn
                best = float(np.max(np.abs(r)))
                break
            alpha *= 0.5
        else:
            break  # no damping factor improves the residual; stalled
    if best > pinning.tolerance:
        raise PinningError(
            f"Gauss-Newton pinning stalled at residual {best:.3e} "
            f"(tolerance {pinning.tolerance:.1e}); mu0 may be unreachable "
            f"(center component) or the constraints inconsistent",
            residual=best,
        )
    return PinningResult(PhasePoint.of(q, p), best, it)
