"""widomlab: equilibrium-measure polynomials on systems of continua.

Capacities and Green's functions of finite unions of disjoint continua,
equal-measure partitions of Green level curves and the monic polynomials
with centroid roots they induce, Lawson minimax references, and the growth
experiments relating their norms to geometry-dependent integral bounds.
"""

from .analysis import (
    ExperimentConfig,
    ExperimentReport,
    GrowthFit,
    LoewnerGap,
    area_integral_bound,
    growth_fit,
    line_integral_bound,
    loewner_gap,
    run_experiment,
)
from .errors import (
    DegreeTooSmallError,
    GeometryError,
    IllConditionedSystemError,
    InsufficientResolutionError,
    LevelTooLargeError,
    SchemaError,
    TraceError,
    WidomlabError,
)
from .geometry import (
    CompactSet,
    Disk,
    JordanPolyline,
    PolylineArc,
    Segment,
    boundary_sample,
    distance_to_set,
    geometry_from_json,
    geometry_to_json,
    quasismooth_constant,
    transform_set,
)
from .minimax import (
    LawsonChebyshev,
    MinimaxResult,
    interval_oracle,
    lawson_chebyshev,
    two_interval_even_oracle,
)
from .partition import (
    DegreeAllocation,
    Partition,
    allocate_degrees,
    arc_masses_by_flux,
    partition_diagnostics,
    partition_level_curve,
)
from .polynomials import (
    MonicPolynomial,
    NormEstimate,
    interference_sum,
    log_eval,
    sup_norm,
    totik_polynomial,
    widom_factor,
)
from .potential import (
    EquilibriumSolver,
    LevelCurve,
    capacity,
    conjugate_net_change,
    estimate_safe_level,
    green,
    level_capacity_check,
    solve_equilibrium,
    trace_level_curve,
)

__version__ = "0.1.0"
