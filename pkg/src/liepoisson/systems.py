"""Shipped Lie-Poisson systems and their collective lifts.

Three presets exercise qualitatively different algebras:

  kida        so(2,1); an elliptic vortex patch in shear flow written in
              dual coordinates, with a logarithmic Hamiltonian and the
              quadratic Casimir mu1^2 + mu2^2 - mu3^2.  Plus bracket.
  rattleback  a 3-dimensional solvable algebra from a nonholonomic toy model;
              not semisimple (degenerate Killing form), Casimir P R^lam.
              Plus bracket.
  heavy_top   so(3) acting on two translation factors (9-dimensional);
              a gyro-controlled heavy top whose feedback renormalizes the
              kinetic metric.  Minus bracket, three Casimirs.

Each preset bundles the algebra, Hamiltonian (raw njit-able closures plus the
guarded API object), pinning rule mapping mu0 to a phase point, recommended
step sizes, and closed-form right-hand sides used as independent regression
oracles for the generic contraction machinery.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .clebsch import (
    FixedQ,
    GaussNewton,
    PhasePoint,
    PinningSpec,
    coordinate_pin,
    make_collective_field,
    make_lp_field,
    pairing_pin,
    solve_initial_point,
)
from .errors import DomainError
from .lie_algebra import LieAlgebraSpec, from_structure_matrix
from .poisson import BracketSign, HamiltonianDef, ScalarField

PI8 = math.pi / 8.0
PI16 = math.pi / 16.0


@dataclass(frozen=True, eq=False)
class SystemPreset:
    name: str
    algebra: LieAlgebraSpec
    ham: HamiltonianDef
    sign: BracketSign
    mu0: np.ndarray
    pinning: PinningSpec
    params: dict
    recommended_dt: float
    recommended_t_end: float
    lp_reference: Optional[Callable] = None  # closed-form mu -> mudot
    collective_reference: Optional[Callable] = None  # closed-form z -> zdot

    def __post_init__(self):
        mu0 = np.ascontiguousarray(self.mu0, dtype=np.float64)
        mu0.setflags(write=False)
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "_fields", {})

    def collective_field(self, compiled: bool = True):
        """Flat (q, p) field of the lifted Hamiltonian, cached per backend."""
        key = ("collective", compiled)
        if key not in self._fields:
            self._fields[key] = make_collective_field(
                self.algebra, self.ham.grad, self.sign, compiled=compiled
            )
        return self._fields[key]

    def lp_field(self, compiled: bool = True):
        """Flat mu field of the Lie-Poisson equation, cached per backend."""
        key = ("lp", compiled)
        if key not in self._fields:
            self._fields[key] = make_lp_field(
                self.algebra, self.ham.grad, self.sign, compiled=compiled
            )
        return self._fields[key]

    def initial_phase_point(self):
        """Solve the pinning problem over mu0; returns a PinningResult."""
        return solve_initial_point(self.algebra, self.mu0, self.pinning, self.sign)

    def random_mu(self, rng, scale: float = 0.3) -> np.ndarray:
        """In-domain dual point near mu0, for property sweeps."""
        r = scale * (1.0 + np.linalg.norm(self.mu0))
        for _ in range(100):
            mu = self.mu0 + r * rng.standard_normal(self.algebra.n)
            if self.ham.in_domain(mu):
                return mu
        raise RuntimeError("could not sample an in-domain point")


# ---------------------------------------------------------------------- kida


def _kida_algebra() -> LieAlgebraSpec:
    def pairing(mu):
        return np.array(
            [
                [0.0, mu[2], mu[1]],
                [-mu[2], 0.0, -mu[0]],
                [-mu[1], mu[0], 0.0],
            ]
        )

    return from_structure_matrix(pairing, 3)


def _kida_h_closures(eps: float, omega: float):
    pi8 = PI8

    def h(mu):
        return eps * mu[1] + omega * mu[2] - pi8 * np.log(pi8 - mu[2])

    def grad(mu):
        out = np.empty(3)
        out[0] = 0.0
        out[1] = eps
        out[2] = omega + pi8 / (pi8 - mu[2])
        return out

    return h, grad


def _solve_kida_mu0(eps, omega, mu1, casimir_level, energy_level):
    """Complete mu0 = (mu1, ?, ?) from the Casimir and energy levels by a
    2-variable Newton iteration started at (mu2, mu3) = (0, -1)."""
    h, _ = _kida_h_closures(eps, omega)
    x = np.array([0.0, -1.0])
    for _ in range(50):
        mu2, mu3 = x
        r = np.array(
            [
                mu1**2 + mu2**2 - mu3**2 - casimir_level,
                h(np.array([mu1, mu2, mu3])) - energy_level,
            ]
        )
        if np.max(np.abs(r)) < 1e-14:
            break
        J = np.array(
            [
                [2 * mu2, -2 * mu3],
                [eps, omega + PI8 / (PI8 - mu3)],
            ]
        )
        x = x - np.linalg.solve(J, r)
    mu0 = np.array([mu1, x[0], x[1]])
    if not (mu0[2] < PI8):
        raise DomainError("kida mu0 landed outside the Hamiltonian domain")
    return mu0


def kida_preset(
    eps: float = 0.5,
    omega: float = -1.0,
    mu1: float = 1.0,
    casimir_level: float = -0.25,
    energy_level: float = 1.0,
    mu0=None,
) -> SystemPreset:
    """Vortex-patch system on so(2,1)*, plus bracket.

    By default mu0 is completed from the Casimir/energy levels; pass ``mu0``
    to place the run on another leaf (e.g. the physical leaf -pi^2/64 built
    with kida_mu_from_physical).
    """
    algebra = _kida_algebra()
    h, grad = _kida_h_closures(eps, omega)
    casimir = ScalarField(
        fn=lambda mu: mu[0] ** 2 + mu[1] ** 2 - mu[2] ** 2,
        grad=lambda mu: np.array([2 * mu[0], 2 * mu[1], -2 * mu[2]]),
        name="f1",
    )
    ham = HamiltonianDef(
        fn=h,
        grad=grad,
        casimirs=(casimir,),
        domain_guard=lambda mu: mu[2] < PI8,
        name="h",
    )
    if mu0 is None:
        mu0 = _solve_kida_mu0(eps, omega, mu1, casimir_level, energy_level)
    else:
        mu0 = np.asarray(mu0, dtype=np.float64)

    # deterministic fixed-q pinning: B(q) maps onto the Euclidean orthogonal
    # complement of q, so any unit q with q.mu0 = 0 makes the solve consistent
    k = int(np.argmin(np.abs(mu0)))
    e = np.zeros(3)
    e[k] = 1.0
    q = np.cross(mu0, e)
    q /= np.linalg.norm(q)
    pinning = PinningSpec(strategy=FixedQ(q=q))

    def lp_ref(mu):
        g = PI8 / (PI8 - mu[2])
        return np.array(
            [
                omega * mu[1] + eps * mu[2] + g * mu[1],
                -mu[0] * (omega + g),
                eps * mu[0],
            ]
        )

    def collective_ref(z):
        q_, p_ = z[:3], z[3:]
        mu3 = q_[1] * p_[0] - q_[0] * p_[1]
        eta3 = omega + PI8 / (PI8 - mu3)
        return np.array(
            [
                eta3 * q_[1] - eps * q_[2],
                -eta3 * q_[0],
                -eps * q_[0],
                eps * p_[2] + eta3 * p_[1],
                -eta3 * p_[0],
                eps * p_[0],
            ]
        )

    return SystemPreset(
        name="kida",
        algebra=algebra,
        ham=ham,
        sign=BracketSign.PLUS,
        mu0=mu0,
        pinning=pinning,
        params={
            "eps": eps,
            "omega": omega,
            "mu1": mu1,
            "casimir_level": casimir_level,
            "energy_level": energy_level,
        },
        recommended_dt=0.1,
        recommended_t_end=1000.0,
        lp_reference=lp_ref,
        collective_reference=collective_ref,
    )


class KidaPhysicalState(NamedTuple):
    """Aspect ratio in (0, 1] and orientation of the vortex patch."""

    lam: float
    phi: float


PHYSICAL_LEAF = -math.pi**2 / 64.0


def kida_mu_from_physical(lam: float, phi: float) -> np.ndarray:
    """Embed (lam, phi) on the physical leaf f1 = -pi^2/64."""
    if not (0.0 < lam <= 1.0):
        raise DomainError("aspect ratio must lie in (0, 1]")
    a = PI16 * (lam - 1.0 / lam)
    return np.array(
        [
            a * math.sin(2 * phi),
            a * math.cos(2 * phi),
            -PI16 * (lam + 1.0 / lam),
        ]
    )


def kida_physical_from_mu(mu, tol: float = 1e-6) -> KidaPhysicalState:
    """Invert the embedding; only defined on the physical leaf.

    Raises DomainError off the leaf (Casimir mismatch beyond tol), for the
    circular state lam = 1 (orientation undefined), and for mu3 > 0 (the
    embedded branch has mu3 <= -pi/8).
    """
    mu = np.asarray(mu, dtype=np.float64)
    casimir = mu[0] ** 2 + mu[1] ** 2 - mu[2] ** 2
    if abs(casimir - PHYSICAL_LEAF) > tol:
        raise DomainError(
            f"mu is off the physical leaf: f1 = {casimir:.8g}, "
            f"expected {PHYSICAL_LEAF:.8g}"
        )
    if mu[2] > 0:
        raise DomainError("embedded branch requires mu3 <= -pi/8")
    b = 16.0 * mu[2] / math.pi  # lam + 1/lam = -b, with -b >= 2
    disc = max(b * b - 4.0, 0.0)
    lam = (-b - math.sqrt(disc)) / 2.0  # root in (0, 1]
    a = PI16 * (lam - 1.0 / lam)
    if a == 0.0:
        raise DomainError("chart is singular at the circular state lam = 1")
    phi = 0.5 * math.atan2(mu[0] / a, mu[1] / a)
    return KidaPhysicalState(lam, phi)


def kida_chart_rhs(state: KidaPhysicalState, eps: float = 0.5, omega: float = -1.0):
    """(dlam/dt, dphi/dt) of the patch equations in physical variables."""
    lam, phi = state
    dlam = -eps * lam * math.sin(2 * phi)
    dphi = (
        lam / (1.0 + lam) ** 2
        + omega / 2.0
        + (eps / 2.0) * ((1.0 + lam**2) / (1.0 - lam**2)) * math.cos(2 * phi)
    )
    return dlam, dphi


# ---------------------------------------------------------------- rattleback


def rattleback_preset(lam: float = 4.0, mu0=(0.01, 0.01, 0.5)) -> SystemPreset:
    """Solvable 3-dimensional algebra with pairing matrix

        [[0, 0, lam P], [0, 0, -R], [-lam P, R, 0]]

    h is the Euclidean kinetic energy and P R^lam is a Casimir (monitor it
    where R > 0 unless lam is an integer; R^lam is undefined for R < 0
    otherwise).  The Killing form has the single entry kappa_33 = 1 + lam^2,
    so the algebra is far from semisimple.
    """

    def pairing(mu):
        return np.array(
            [
                [0.0, 0.0, lam * mu[0]],
                [0.0, 0.0, -mu[1]],
                [-lam * mu[0], mu[1], 0.0],
            ]
        )

    algebra = from_structure_matrix(pairing, 3, labels=("P", "R", "S"))

    def h(mu):
        return 0.5 * (mu[0] ** 2 + mu[1] ** 2 + mu[2] ** 2)

    def grad(mu):
        return mu.copy()

    casimir = ScalarField(
        fn=lambda mu: mu[0] * mu[1] ** lam,
        grad=lambda mu: np.array(
            [mu[1] ** lam, lam * mu[0] * mu[1] ** (lam - 1.0), 0.0]
        ),
        name="f1",
    )
    ham = HamiltonianDef(fn=h, grad=grad, casimirs=(casimir,), name="h")

    pinning = PinningSpec(
        strategy=GaussNewton(
            constraints=(
                coordinate_pin("q", 0, 0.1),
                coordinate_pin("q", 2, 0.1),
                pairing_pin(1.0),
            ),
            seed=PhasePoint.of([0.1, -1.0, 0.1], [0.0, 0.0, 1.0]),
        )
    )

    def lp_ref(mu):
        P, R, S = mu
        return np.array([lam * P * S, -R * S, R * R - lam * P * P])

    def collective_ref(z):
        q, p = z[:3], z[3:]
        P = lam * q[2] * p[0]
        R = -q[2] * p[1]
        S = q[1] * p[1] - lam * q[0] * p[0]
        return np.array(
            [
                lam * (P * q[2] - S * q[0]),
                S * q[1] - R * q[2],
                0.0,
                lam * p[0] * S,
                -p[1] * S,
                p[1] * R - lam * p[0] * P,
            ]
        )

    return SystemPreset(
        name="rattleback",
        algebra=algebra,
        ham=ham,
        sign=BracketSign.PLUS,
        mu0=np.asarray(mu0, dtype=np.float64),
        pinning=pinning,
        params={"lam": lam},
        recommended_dt=0.01,
        recommended_t_end=500.0,
        lp_reference=lp_ref,
        collective_reference=collective_ref,
    )


# ----------------------------------------------------------------- heavy top


def _hat(v):
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


@dataclass(frozen=True)
class HeavyTopParams:
    """Physical constants of the gyro-controlled heavy top.

    rho is the translational coefficient of the kinetic metric; the feedback
    law replaces the total mass by rho = 0.9 m^2 l^2 / I1 (default).  Passing
    rho = support_mass + bob_mass recovers the uncontrolled top.
    """

    support_mass: float = 0.44
    bob_mass: float = 0.7
    inertia_1: float = 0.2
    inertia_3: float = 0.24
    length: float = 0.215
    gravity: float = 9.8
    chi: tuple = (0.0, 0.0, 1.0)
    rho: Optional[float] = None

    def __post_init__(self):
        if self.rho is None:
            object.__setattr__(self, "rho", self.controlled_rho())

    def controlled_rho(self) -> float:
        return 0.9 * (self.bob_mass * self.length) ** 2 / self.inertia_1

    @property
    def total_mass(self) -> float:
        return self.support_mass + self.bob_mass

    def chi_vec(self) -> np.ndarray:
        return np.asarray(self.chi, dtype=np.float64)

    def inertia(self) -> np.ndarray:
        return np.diag([self.inertia_1, self.inertia_1, self.inertia_3])

    def mass_matrix(self) -> np.ndarray:
        """[[I, m l chi-hat], [m l chi-hat^T, rho id]] on (Omega, v)."""
        ml = self.bob_mass * self.length
        ch = _hat(self.chi_vec())
        M = np.zeros((6, 6))
        M[:3, :3] = self.inertia()
        M[:3, 3:] = ml * ch
        M[3:, :3] = ml * ch.T
        M[3:, 3:] = self.rho * np.eye(3)
        return M

    def validate(self) -> None:
        if min(self.support_mass, self.bob_mass, self.inertia_1, self.inertia_3,
               self.length, self.gravity) <= 0:
            raise ValueError("masses, inertias, length and gravity must be positive")
        if abs(np.linalg.norm(self.chi_vec()) - 1.0) > 1e-12:
            raise ValueError("chi must be a unit vector")
        if abs(np.linalg.det(self.mass_matrix())) < 1e-14:
            raise ValueError("kinetic metric is singular for these parameters")

    def is_valid(self) -> bool:
        try:
            self.validate()
        except ValueError:
            return False
        return True


def heavy_top_preset(
    params: HeavyTopParams = None,
    tilt_polar: float = math.pi / 20.0,
    tilt_azimuth: float = math.pi / 3.0,
    omega0=(0.1, 0.2, 0.1),
) -> SystemPreset:
    """Controlled heavy top on (so(3) x (R^3 + R^3))*, minus bracket.

    State mu = (Pi, P, Gamma): body angular momentum, linear momentum and the
    advected vertical.  Casimirs |P|^2, P.Gamma, |Gamma|^2.
    """
    if params is None:
        params = HeavyTopParams()
    params.validate()

    def pairing(mu):
        Pi, P, G = mu[:3], mu[3:6], mu[6:9]
        S = np.zeros((9, 9))
        S[:3, :3] = -_hat(Pi)
        S[:3, 3:6] = -_hat(P)
        S[3:6, :3] = -_hat(P)
        S[:3, 6:9] = -_hat(G)
        S[6:9, :3] = -_hat(G)
        return S

    labels = ("Pi1", "Pi2", "Pi3", "P1", "P2", "P3", "Gamma1", "Gamma2", "Gamma3")
    algebra = from_structure_matrix(pairing, 9, labels=labels)

    Minv = np.linalg.inv(params.mass_matrix())
    Minv.setflags(write=False)
    chi = params.chi_vec()
    chi.setflags(write=False)
    mgl = params.bob_mass * params.gravity * params.length

    def h(mu):
        w = mu[:6]
        return 0.5 * (w @ (Minv @ w)) + mgl * (chi @ mu[6:9])

    def grad(mu):
        out = np.empty(9)
        out[:6] = Minv @ mu[:6]
        out[6:] = mgl * chi
        return out

    casimirs = (
        ScalarField(
            fn=lambda mu: mu[3] ** 2 + mu[4] ** 2 + mu[5] ** 2,
            grad=lambda mu: np.concatenate(
                [np.zeros(3), 2 * mu[3:6], np.zeros(3)]
            ),
            name="p_sq",
        ),
        ScalarField(
            fn=lambda mu: float(mu[3:6] @ mu[6:9]),
            grad=lambda mu: np.concatenate([np.zeros(3), mu[6:9], mu[3:6]]),
            name="p_gamma",
        ),
        ScalarField(
            fn=lambda mu: mu[6] ** 2 + mu[7] ** 2 + mu[8] ** 2,
            grad=lambda mu: np.concatenate(
                [np.zeros(3), np.zeros(3), 2 * mu[6:9]]
            ),
            name="gamma_sq",
        ),
    )
    ham = HamiltonianDef(fn=h, grad=grad, casimirs=casimirs, name="h")

    omega0 = np.asarray(omega0, dtype=np.float64)
    Pi0 = params.inertia() @ omega0
    P0 = -params.bob_mass * params.length * np.cross(chi, omega0)
    G0 = np.array(
        [
            math.cos(tilt_azimuth) * math.sin(tilt_polar),
            math.sin(tilt_azimuth) * math.sin(tilt_polar),
            math.cos(tilt_polar),
        ]
    )
    mu0 = np.concatenate([Pi0, P0, G0])

    # Pin the first algebra slot: a1 = Gamma0 x P0, b1 = 0.  The seed solves
    # the remaining momentum equations by three least-squares steps
    # (P = b2 x a1, Gamma = b3 x a1, then Pi linear in (a2, a3)), so
    # Gauss-Newton only needs to polish it.
    a1 = np.cross(G0, P0)
    b2, *_ = np.linalg.lstsq(-_hat(a1), P0, rcond=None)
    b3, *_ = np.linalg.lstsq(-_hat(a1), G0, rcond=None)
    Arot = np.hstack([_hat(b2), _hat(b3)])
    a23, *_ = np.linalg.lstsq(Arot, Pi0, rcond=None)
    seed = PhasePoint.of(
        np.concatenate([a1, a23[:3], a23[3:]]),
        np.concatenate([np.zeros(3), b2, b3]),
    )
    cons = tuple(
        coordinate_pin("q", i, a1[i]) for i in range(3)
    ) + tuple(coordinate_pin("p", i, 0.0) for i in range(3))
    pinning = PinningSpec(strategy=GaussNewton(constraints=cons, seed=seed))

    def lp_ref(mu):
        Pi, P, G = mu[:3], mu[3:6], mu[6:9]
        d = grad(mu)
        dPi, dP, dG = d[:3], d[3:6], d[6:9]
        return np.concatenate(
            [
                np.cross(Pi, dPi) + np.cross(P, dP) + np.cross(G, dG),
                np.cross(P, dPi),
                np.cross(G, dPi),
            ]
        )

    def collective_ref(z):
        a = (z[0:3], z[3:6], z[6:9])
        b = (z[9:12], z[12:15], z[15:18])
        mu = np.concatenate(
            [
                np.cross(b[0], a[0]) + np.cross(b[1], a[1]) + np.cross(b[2], a[2]),
                np.cross(b[1], a[0]),
                np.cross(b[2], a[0]),
            ]
        )
        d = grad(mu)
        e = (d[:3], d[3:6], d[6:9])
        # minus bracket: q' = -[eta, q], p' = +ad*_eta p
        qdot = np.concatenate(
            [
                -np.cross(e[0], a[0]),
                -(np.cross(e[0], a[1]) - np.cross(a[0], e[1])),
                -(np.cross(e[0], a[2]) - np.cross(a[0], e[2])),
            ]
        )
        pdot = np.concatenate(
            [
                np.cross(b[0], e[0]) + np.cross(b[1], e[1]) + np.cross(b[2], e[2]),
                np.cross(b[1], e[0]),
                np.cross(b[2], e[0]),
            ]
        )
        return np.concatenate([qdot, pdot])

    return SystemPreset(
        name="heavy_top",
        algebra=algebra,
        ham=ham,
        sign=BracketSign.MINUS,
        mu0=mu0,
        pinning=pinning,
        params={
            "support_mass": params.support_mass,
            "bob_mass": params.bob_mass,
            "inertia_1": params.inertia_1,
            "inertia_3": params.inertia_3,
            "length": params.length,
            "gravity": params.gravity,
            "rho": params.rho,
        },
        recommended_dt=0.01,
        recommended_t_end=30.0,
        lp_reference=lp_ref,
        collective_reference=collective_ref,
    )


PRESETS = {
    "kida": kida_preset,
    "rattleback": rattleback_preset,
    "heavy_top": heavy_top_preset,
}


def get_preset(name: str, **kwargs) -> SystemPreset:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        ) from None
    return factory(**kwargs)
