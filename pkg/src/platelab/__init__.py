"""Numerical laboratory for the clamped plate with tension on convex domains.

Solves (-Lap)^2 u - gamma*Lap u = f with clamped boundary conditions on
convex polygons, computes the buckling load mu_1, estimates the
positivity threshold gamma_f, and searches the class of convex domains
of fixed area for a domain minimizing gamma_f.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateInput,
    EmptyGrid,
    IndefiniteSystem,
    NoConvergence,
    NumericalError,
    OutsideAmbientBall,
    PlateLabError,
    PreconditionViolated,
    ProposalInfeasible,
    ThresholdNotFound,
    ValidationError,
    ZeroDenominator,
)
from .geometry import (
    AdmissibleClassSpec,
    ConvexDomain,
    area,
    convex_hull,
    disk_domain,
    distance_to_convex,
    eventually_contains,
    hausdorff_distance,
    load_domain,
    punctured_approximants,
    regular_polygon,
    save_domain,
    scale_to_area,
    signed_distance,
)
from .plate import (
    ActiveGrid,
    DiscreteOperators,
    LoadSpec,
    SolveReport,
    assemble,
    discretize,
    solve_membrane,
    solve_plate,
)
from .positivity import (
    GammaFReport,
    LargeTensionReport,
    PositivityConfig,
    estimate_gamma_f,
    is_nonneg,
    large_tension_check,
)
from .search import (
    OptimizationTrace,
    SearchConfig,
    diagnostics,
    optimize,
    propose,
    symmetry_report,
)
from .spectral import BucklingResult, buckling_load, rayleigh_quotient

__all__ = [
    "__version__",
    "ActiveGrid",
    "AdmissibleClassSpec",
    "BucklingResult",
    "ConvexDomain",
    "DegenerateInput",
    "DiscreteOperators",
    "EmptyGrid",
    "GammaFReport",
    "IndefiniteSystem",
    "LargeTensionReport",
    "LoadSpec",
    "NoConvergence",
    "NumericalError",
    "OptimizationTrace",
    "OutsideAmbientBall",
    "PlateLabError",
    "PositivityConfig",
    "PreconditionViolated",
    "ProposalInfeasible",
    "SearchConfig",
    "SolveReport",
    "ThresholdNotFound",
    "ValidationError",
    "ZeroDenominator",
    "area",
    "assemble",
    "buckling_load",
    "convex_hull",
    "diagnostics",
    "discretize",
    "disk_domain",
    "distance_to_convex",
    "estimate_gamma_f",
    "eventually_contains",
    "hausdorff_distance",
    "is_nonneg",
    "large_tension_check",
    "load_domain",
    "optimize",
    "propose",
    "punctured_approximants",
    "rayleigh_quotient",
    "regular_polygon",
    "save_domain",
    "scale_to_area",
    "signed_distance",
    "solve_membrane",
    "solve_plate",
    "symmetry_report",
]
