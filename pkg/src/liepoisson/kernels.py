"""Structure-constant contraction kernels.

Conventions used everywhere in this package:

    c[k, i, j] = c^k_{ij}           [E_i, E_j] = c^k_{ij} E_k
    bracket:    [x, y]^k            = sum_ij  c[k,i,j] x_i y_j
    coadjoint:  (ad*_x a)_j         = sum_ik  a_k c[k,i,j] x_i
    momentum_plus: mu_i             = sum_jk  c[k,i,j] q_j p_k    (= -ad*_q p)
    mm_jac_p:   d mu_i / d p_k      = sum_j   c[k,i,j] q_j
    mm_jac_q:   d mu_i / d q_j      = sum_k   c[k,i,j] p_k

Each kernel exists twice: a vectorized einsum version (pure-numpy fallback)
and an njit loop version.  The public names bind to whichever path the
backend selected; both stay importable so tests and the benchmark can compare
them directly.
"""

import numpy as np

from . import backend

# ---------------------------------------------------------------- numpy path


def bracket_numpy(c, x, y):
    return np.einsum("kij,i,j->k", c, x, y)


def coadjoint_numpy(c, x, a):
    return np.einsum("kij,i,k->j", c, x, a)


def momentum_plus_numpy(c, q, p):
    return np.einsum("kij,j,k->i", c, q, p)


def mm_jac_p_numpy(c, q):
    return np.einsum("kij,j->ik", c, q)


def mm_jac_q_numpy(c, p):
    return np.einsum("kij,k->ij", c, p)


# ---------------------------------------------------------------- numba path
# Plain loops; numba turns these into tight machine code, and for the n <= 9
# algebras here they beat einsum's dispatch overhead by a wide margin.


def _bracket_loops(c, x, y):
    n = c.shape[0]
    out = np.zeros(n)
    for k in range(n):
        acc = 0.0
        for i in range(n):
            xi = x[i]
            if xi != 0.0:
                for j in range(n):
                    acc += c[k, i, j] * xi * y[j]
        out[k] = acc
    return out


def _coadjoint_loops(c, x, a):
    n = c.shape[0]
    out = np.zeros(n)
    for j in range(n):
        acc = 0.0
        for k in range(n):
            ak = a[k]
            if ak != 0.0:
                for i in range(n):
                    acc += ak * c[k, i, j] * x[i]
        out[j] = acc
    return out


def _momentum_plus_loops(c, q, p):
    n = c.shape[0]
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for k in range(n):
            pk = p[k]
            if pk != 0.0:
                for j in range(n):
                    acc += c[k, i, j] * q[j] * pk
        out[i] = acc
    return out


def _mm_jac_p_loops(c, q):
    n = c.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for k in range(n):
            acc = 0.0
            for j in range(n):
                acc += c[k, i, j] * q[j]
            out[i, k] = acc
    return out


def _mm_jac_q_loops(c, p):
    n = c.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc += c[k, i, j] * p[k]
            out[i, j] = acc
    return out


if backend.USE_NUMBA:
    bracket_numba = backend.jit_kernel(_bracket_loops)
    coadjoint_numba = backend.jit_kernel(_coadjoint_loops)
    momentum_plus_numba = backend.jit_kernel(_momentum_plus_loops)
    mm_jac_p_numba = backend.jit_kernel(_mm_jac_p_loops)
    mm_jac_q_numba = backend.jit_kernel(_mm_jac_q_loops)

    bracket = bracket_numba
    coadjoint = coadjoint_numba
    momentum_plus = momentum_plus_numba
    mm_jac_p = mm_jac_p_numba
    mm_jac_q = mm_jac_q_numba
else:
    bracket = bracket_numpy
    coadjoint = coadjoint_numpy
    momentum_plus = momentum_plus_numpy
    mm_jac_p = mm_jac_p_numpy
    mm_jac_q = mm_jac_q_numpy
