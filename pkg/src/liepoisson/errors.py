"""Exception types shared across the package."""


class LiePoissonError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(LiePoissonError, ValueError):
    """An array argument has the wrong shape for the algebra at hand."""


class StructureError(LiePoissonError, ValueError):
    """Structure constants violate antisymmetry or the Jacobi identity."""


class DomainError(LiePoissonError, ValueError):
    """A Hamiltonian was evaluated outside its domain of definition."""


class DegenerateKillingError(LiePoissonError, ValueError):
    """Killing form is degenerate; the algebra is not semisimple."""


class PinningError(LiePoissonError, RuntimeError):
    """Initial-point solve did not reach the requested residual."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class StepError(LiePoissonError, RuntimeError):
    """A time step failed (nonlinear solve stalled or state left the domain)."""

    def __init__(self, message: str, step: int = -1, residual: float = float("nan")):
        super().__init__(message)
        self.step = step
        self.residual = residual
