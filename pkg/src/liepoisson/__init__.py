"""Collective integration of finite-dimensional Lie-Poisson systems.

Lie-Poisson dynamics on the dual of a Lie algebra is lifted through a
momentum map to a canonical Hamiltonian system on T*g, integrated there with
symplectic implicit Runge-Kutta methods, and projected back.  Casimirs and
the other conserved quantities of the lift then drift orders of magnitude
less than under a direct Runge-Kutta discretization of the dual equations.
"""

from .clebsch import (
    Constraint,
    FixedQ,
    GaussNewton,
    InvariantSet,
    PhasePoint,
    PinningResult,
    PinningSpec,
    anti_reduced_rhs,
    coordinate_pin,
    equivariance_residual,
    invariant_evaluators,
    invariants,
    lifted_hamiltonian,
    make_collective_field,
    make_lp_field,
    momentum_jacobians,
    momentum_map,
    pairing_pin,
    poisson_map_residual,
    solve_initial_point,
)
from .diagnostics import (
    ComparisonReport,
    InvariantSeries,
    compare_runs,
    drift_slope,
    invariant_series,
    trajectory_invariants,
)
from .errors import (
    DegenerateKillingError,
    DimensionError,
    DomainError,
    LiePoissonError,
    PinningError,
    StepError,
    StructureError,
)
from .integrators import (
    GAUSS4,
    MIDPOINT,
    RK4,
    TABLEAUS,
    ButcherTableau,
    IntegratorConfig,
    OrderEstimate,
    Trajectory,
    estimate_order,
    integrate,
    step_explicit_rk4,
    step_implicit_rk,
)
from .lie_algebra import (
    AlgebraReport,
    LieAlgebraSpec,
    ad_matrix,
    audit,
    bracket,
    center_dimension,
    coad_matrix,
    coadjoint,
    from_structure_matrix,
    kappa_sharp,
    killing_matrix,
    load_structure_constants,
    save_structure_constants,
    structure_matrix,
)
from .poisson import (
    BracketSign,
    HamiltonianDef,
    ScalarField,
    casimir_residual,
    fd_gradient,
    lp_bracket,
    lp_rhs,
)
from .systems import (
    PRESETS,
    HeavyTopParams,
    KidaPhysicalState,
    SystemPreset,
    get_preset,
    heavy_top_preset,
    kida_chart_rhs,
    kida_mu_from_physical,
    kida_physical_from_mu,
    kida_preset,
    rattleback_preset,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
