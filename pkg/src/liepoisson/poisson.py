"""Lie-Poisson brackets and vector fields on the dual of a Lie algebra.

For f, g : g* -> R the bracket in either orientation is

    {f, g}_(+/-)(mu) = +/- < mu, [Df(mu), Dg(mu)] >

and the evolution under a Hamiltonian h is mu' = -/+ ad*_{Dh(mu)} mu
(minus for the plus bracket and vice versa).
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError
from .lie_algebra import LieAlgebraSpec

FD_STEP = 1e-5


class BracketSign(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"sign must be 'plus' or 'minus', got {value!r}") from None

    @property
    def orientation(self) -> float:
        """+1.0 for the plus bracket, -1.0 for the minus bracket."""
        return 1.0 if self is BracketSign.PLUS else -1.0


def fd_gradient(fn, x, step=FD_STEP):
    """4th-order central-difference gradient with per-component step
    step*(1+|x_i|)."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.size):
        h = step * (1.0 + abs(x[i]))
        xp2 = x.copy(); xp2[i] += 2 * h
        xp1 = x.copy(); xp1[i] += h
        xm1 = x.copy(); xm1[i] -= h
        xm2 = x.copy(); xm2[i] -= 2 * h
        g[i] = (-fn(xp2) + 8 * fn(xp1) - 8 * fn(xm1) + fn(xm2)) / (12 * h)
    return g


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Scalar function on g* with an optional analytic gradient.

    Without ``grad`` the gradient falls back to central differences; shipped
    systems always provide the analytic form.
    """

    fn: callable
    grad: callable = None
    name: str = "f"

    def __call__(self, mu) -> float:
        return float(self.fn(np.asarray(mu, dtype=np.float64)))

    def gradient(self, mu) -> np.ndarray:
        mu = np.asarray(mu, dtype=np.float64)
        if self.grad is not None:
            return np.asarray(self.grad(mu), dtype=np.float64)
        return fd_gradient(self.fn, mu)


@dataclass(frozen=True, eq=False)
class HamiltonianDef(ScalarField):
    """Hamiltonian plus the invariants worth monitoring alongside it.

    casimirs : ScalarField tuple; functions expected to commute with
        everything under the bracket (checked by tests, monitored by runs).
    domain_guard : optional predicate mu -> bool.  Evaluating h or its
        gradient where the guard fails raises DomainError; integrators convert
        that into a step failure instead of silently producing NaN.
    """

    casimirs: tuple = ()
    domain_guard: callable = None
    name: str = "h"

    def in_domain(self, mu) -> bool:
        if self.domain_guard is None:
            return True
        return bool(self.domain_guard(np.asarray(mu, dtype=np.float64)))

    def check_domain(self, mu) -> None:
        if not self.in_domain(mu):
            raise DomainError(
                f"point outside the domain of '{self.name}': mu={np.asarray(mu)}"
            )

    def __call__(self, mu) -> float:
        self.check_domain(mu)
        return super().__call__(mu)

    def gradient(self, mu) -> np.ndarray:
        self.check_domain(mu)
        return super().gradient(mu)


def lp_bracket(algebra: LieAlgebraSpec, f, g, mu, sign=BracketSign.PLUS) -> float:
    """{f, g}_sign at mu for two ScalarFields (or anything with .gradient)."""
    mu = algebra._check_vec(mu, "mu")
    sign = BracketSign.parse(sign)
    df = f.gradient(mu)
    dg = g.gradient(mu)
    return sign.orientation * float(mu @ kernels.bracket(algebra.c, df, dg))


def lp_rhs(algebra: LieAlgebraSpec, ham: HamiltonianDef, mu, sign=BracketSign.PLUS):
    """Right-hand side of mu' = -/+ ad*_{Dh(mu)} mu (plus/minus bracket)."""
    mu = algebra._check_vec(mu, "mu")
    sign = BracketSign.parse(sign)
    dh = ham.gradient(mu)  # raises DomainError outside the guard
    return -sign.orientation * kernels.coadjoint(algebra.c, dh, mu)


def casimir_residual(algebra: LieAlgebraSpec, f, mu) -> float:
    """|| ad*_{Df(mu)} mu ||_2; zero iff f is momentum-preserving at mu.

    Independent of the bracket orientation, so a single number serves both.
    """
    mu = algebra._check_vec(mu, "mu")
    df = f.gradient(mu)
    return float(np.linalg.norm(kernels.coadjoint(algebra.c, df, mu)))
