"""Numba/numpy backend selection.

The environment variable LIEPOISSON_NUMBA controls which implementations the
hot kernels and stepping loops use:

    auto (default)  use numba if it imports, otherwise pure numpy
    1 / on          require numba; raise if it is missing
    0 / off         force the pure-numpy path

The flag is read once at import time.  Everything numerical is written so that
the same source runs under both paths; the compiled path only changes speed,
not results (beyond last-ulp reassociation).
"""

import os
import warnings

_FLAG = os.environ.get("LIEPOISSON_NUMBA", "auto").strip().lower()

if _FLAG in ("0", "off", "false", "no"):
    USE_NUMBA = False
elif _FLAG in ("1", "on", "true", "yes"):
    import numba  # noqa: F401  -- fail loudly if forced on but absent

    USE_NUMBA = True
else:
    try:
        import numba  # noqa: F401

        USE_NUMBA = True
    except ImportError:  # pragma: no cover - depends on environment
        USE_NUMBA = False


def jit_kernel(fn):
    """Compile a small array kernel, with on-disk caching.

    Only use this for module-level functions without free variables; those are
    the ones numba can cache between processes.
    """
    if USE_NUMBA:
        from numba import njit

        return njit(cache=True)(fn)
    return fn


def compile_callable(fn):
    """Compile a closure (vector field, gradient, stepping core) if enabled.

    Closures capture arrays and other compiled functions, which numba cannot
    cache, so these compile once per process.  Returns ``fn`` unchanged on the
    numpy path.
    """
    if USE_NUMBA:
        from numba import njit

        return njit(fn)
    return fn


def is_compiled(fn) -> bool:
    if not USE_NUMBA:
        return False
    from numba.core.dispatcher import Dispatcher

    return isinstance(fn, Dispatcher)


def warmup_warning_filter():
    """Silence the first-call performance warnings numba emits for
    non-cacheable closures; they are expected here."""
    warnings.filterwarnings("ignore", message=".*Cannot cache compiled function.*")
