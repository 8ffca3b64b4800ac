"""Finite-dimensional real Lie algebras given by structure constants.

A Lie algebra here is a dense tensor c[k, i, j] = c^k_{ij} with
[E_i, E_j] = c^k_{ij} E_k.  Elements of the algebra and of its dual are plain
1-D float arrays in the E_i / dual basis; nothing is gained by wrapping them.

The audit computes the health report a user wants before trusting a hand-typed
tensor: antisymmetry and Jacobi residuals, the center dimension, and the
Killing form with its rank.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DegenerateKillingError, DimensionError, StructureError

ANTISYMMETRY_TOL = 1e-13
JACOBI_TOL = 1e-12
# Relative singular-value cutoff for every rank decision in this module.
RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class LieAlgebraSpec:
    """Structure constants of a real Lie algebra in a fixed basis.

    Parameters
    ----------
    n : dimension of the algebra.
    c : array (n, n, n), c[k, i, j] = c^k_{ij}.  Stored read-only.
    labels : optional component names used in reports and CSV headers.
    validate : check antisymmetry and Jacobi at construction (default).  Pass
        False to build a spec around suspect constants you intend to audit.
    """

    n: int
    c: np.ndarray
    labels: tuple = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        c = np.ascontiguousarray(self.c, dtype=np.float64)
        if c.shape != (self.n, self.n, self.n):
            raise DimensionError(
                f"structure constants must have shape {(self.n,) * 3}, got {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise StructureError("structure constants contain non-finite entries")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.n:
                raise DimensionError("need one label per basis element")
            object.__setattr__(self, "labels", labels)
        if self.validate:
            a = antisymmetry_residual(self)
            if a > ANTISYMMETRY_TOL:
                raise StructureError(f"antisymmetry violated: residual {a:.3e}")
            j = jacobi_residual(self)
            if j > JACOBI_TOL:
                raise StructureError(f"Jacobi identity violated: residual {j:.3e}")

    def component_names(self):
        if self.labels is not None:
            return self.labels
        return tuple(f"mu{i + 1}" for i in range(self.n))

    def _check_vec(self, x, name):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise DimensionError(f"{name} must have shape ({self.n},), got {x.shape}")
        return x


@dataclass(frozen=True)
class AlgebraReport:
    """Output of ``audit``; always produced, never raises."""

    jacobi_residual: float
    antisymmetry_residual: float
    center_dimension: int
    killing_matrix: np.ndarray
    killing_rank: int
    semisimple: bool

    def ok(self) -> bool:
        return (
            self.antisymmetry_residual <= ANTISYMMETRY_TOL
            and self.jacobi_residual <= JACOBI_TOL
        )


def bracket(algebra: LieAlgebraSpec, x, y) -> np.ndarray:
    """[x, y] in the E_i basis."""
    x = algebra._check_vec(x, "x")
    y = algebra._check_vec(y, "y")
    return kernels.bracket(algebra.c, x, y)


def coadjoint(algebra: LieAlgebraSpec, x, alpha) -> np.ndarray:
    """ad*_x alpha, defined by <ad*_x alpha, y> = <alpha, [x, y]>."""
    x = algebra._check_vec(x, "x")
    alpha = algebra._check_vec(alpha, "alpha")
    return kernels.coadjoint(algebra.c, x, alpha)


def ad_matrix(algebra: LieAlgebraSpec, x) -> np.ndarray:
    """Matrix of y -> [x, y];   A[k, j] = sum_i c[k,i,j] x_i."""
    x = algebra._check_vec(x, "x")
    return np.einsum("kij,i->kj", algebra.c, x)


def coad_matrix(algebra: LieAlgebraSpec, x) -> np.ndarray:
    """Matrix of alpha -> ad*_x alpha; the transpose of ``ad_matrix``."""
    return ad_matrix(algebra, x).T


def structure_matrix(algebra: LieAlgebraSpec, mu) -> np.ndarray:
    """Pairing matrix S[i, j] = mu_k c^k_{ij}; the Lie-Poisson tensor at mu."""
    mu = algebra._check_vec(mu, "mu")
    return np.einsum("kij,k->ij", algebra.c, mu)


def antisymmetry_residual(algebra: LieAlgebraSpec) -> float:
    c = algebra.c
    return float(np.max(np.abs(c + c.transpose(0, 2, 1))))


def jacobi_residual(algebra: LieAlgebraSpec) -> float:
    """max_r,i,j,k |([[Ei,Ej],Ek] + [[Ej,Ek],Ei] + [[Ek,Ei],Ej])_r|."""
    c = algebra.c
    t = np.einsum("mij,rmk->rijk", c, c)
    jac = t + t.transpose(0, 2, 3, 1) + t.transpose(0, 3, 1, 2)
    return float(np.max(np.abs(jac)))


def killing_matrix(algebra: LieAlgebraSpec) -> np.ndarray:
    """kappa_ij = trace(ad_Ei ad_Ej) = sum_{l,k} c^l_{ik} c^k_{jl}."""
    c = algebra.c
    return np.einsum("lik,kjl->ij", c, c)


def _rank(m: np.ndarray) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def center_dimension(algebra: LieAlgebraSpec) -> int:
    """dim of {x : [x, y] = 0 for all y}, the nullspace of x -> ad_x."""
    n = algebra.n
    # column i of A is vec(ad_{E_i}) laid out as (k, j)
    A = algebra.c.transpose(1, 0, 2).reshape(n, n * n).T
    return n - _rank(A)


def audit(algebra: LieAlgebraSpec) -> AlgebraReport:
    kappa = killing_matrix(algebra)
    rank = _rank(kappa)
    return AlgebraReport(
        jacobi_residual=jacobi_residual(algebra),
        antisymmetry_residual=antisymmetry_residual(algebra),
        center_dimension=center_dimension(algebra),
        killing_matrix=kappa,
        killing_rank=rank,
        semisimple=rank == algebra.n,
    )


def kappa_sharp(algebra: LieAlgebraSpec, alpha) -> np.ndarray:
    """Index raising by the Killing form: solve kappa x = alpha.

    Only defined when kappa is nondegenerate (semisimple algebra).
    """
    alpha = algebra._check_vec(alpha, "alpha")
    kappa = killing_matrix(algebra)
    if _rank(kappa) < algebra.n:
        raise DegenerateKillingError(
            "Killing form is degenerate (algebra not semisimple); "
            "kappa-sharp is undefined"
        )
    return np.linalg.solve(kappa, alpha)


def from_structure_matrix(matrix_fn, n: int, labels=None) -> LieAlgebraSpec:
    """Build a spec from the linear map mu -> (mu_k c^k_{ij}).

    ``matrix_fn`` takes a dual vector and returns the (n, n) pairing matrix;
    evaluating it on the dual basis covectors recovers c[k] = matrix_fn(e_k).
    This is how the shipped systems state their brackets.
    """
    c = np.zeros((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        c[k] = np.asarray(matrix_fn(e), dtype=np.float64)
    return LieAlgebraSpec(n=n, c=c, labels=labels)


# ------------------------------------------------------------- file exchange
#
# Plain text format, 1-based indices, zero entries omitted:
#
#     n=3
#     # optional comment
#     3 1 2  1.0        <- c^3_{12} = 1.0
#
# Entries with |c^k_{ij}| below machine noise are dropped on save.


def load_structure_constants(path, labels=None, validate=True) -> LieAlgebraSpec:
    path = Path(path)
    n = None
    entries = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            if not line.replace(" ", "").startswith("n="):
                raise StructureError(f"{path}:{lineno}: expected 'n=<dim>' header")
            n = int(line.split("=", 1)[1])
            if n <= 0:
                raise StructureError(f"{path}:{lineno}: dimension must be positive")
            continue
        parts = line.split()
        if len(parts) != 4:
            raise StructureError(f"{path}:{lineno}: expected 'k i j value'")
        k, i, j = (int(p) for p in parts[:3])
        if not (1 <= k <= n and 1 <= i <= n and 1 <= j <= n):
            raise StructureError(f"{path}:{lineno}: index out of range 1..{n}")
        entries.append((k - 1, i - 1, j - 1, float(parts[3])))
    if n is None:
        raise StructureError(f"{path}: missing 'n=<dim>' header")
    c = np.zeros((n, n, n))
    for k, i, j, v in entries:
        c[k, i, j] = v
    return LieAlgebraSpec(n=n, c=c, labels=labels, validate=validate)


def save_structure_constants(algebra: LieAlgebraSpec, path) -> None:
    lines = [f"n={algebra.n}"]
    for k in range(algebra.n):
        for i in range(algebra.n):
            for j in range(algebra.n):
                v = algebra.c[k, i, j]
                if v != 0.0:
                    # repr of a Python float is the shortest exact round trip
                    lines.append(f"{k + 1} {i + 1} {j + 1} {float(v)!r}")
    Path(path).write_text("\n".join(lines) + "\n")
