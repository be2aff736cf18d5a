"""Nonlinear potential theory on weighted graphs.

Finite weighted graphs with vertex measures and edge conductances/lengths;
p-energy minimization by monotone coordinate relaxation; condenser
capacities and path-family moduli computed by two independent routes;
classification of infinite families through truncated capacity decay; and
boundary-at-infinity machinery (exhaustion limits, energy decomposition,
end data, cardinality probes).
"""

from __future__ import annotations

__version__ = "0.1.0"

from .graph import (
    WeightedGraph,
    GraphValidationError,
    ExhaustionCoverageWarning,
    Exhaustion,
    EndProfile,
    build_graph,
    load_graph,
    generate,
    metric_ball,
    exhaustion,
    ends,
    random_connected_graph,
)
from .calculus import (
    ConvergenceReport,
    grad,
    p_energy,
    energy_gradient,
    n1p_norm,
    product_upper_gradient,
    clamp,
    bdp_convergence,
)
from .dirichlet import (
    SolveError,
    SolverOptions,
    SolveReport,
    CompareResult,
    solve_dirichlet,
    solve_required,
    residual,
    compare,
)
from .capacity import (
    PathCapExceeded,
    CapacityResult,
    ModulusResult,
    SobolevResult,
    ParabolicityResult,
    capacity,
    enumerate_paths,
    modulus,
    sobolev_constant,
    parabolicity,
)
from .families import Family, Truncation, get_family
from .boundary import (
    NonCauchyError,
    UnstableEndsError,
    ExhaustionSolveResult,
    HarmonicDecomposition,
    EndTrace,
    AtInfinityResult,
    WitnessRecord,
    ProbeResult,
    exhaustion_solve,
    harmonic_decompose,
    dirichlet_at_infinity,
    boundary_cardinality_probe,
)
from .acceptance import (
    Check,
    RowResult,
    ROW_NAMES,
    SUITES,
    run_acceptance,
    suite_rows,
    format_table,
)

__all__ = [
    "__version__",
    "WeightedGraph", "GraphValidationError", "ExhaustionCoverageWarning",
    "Exhaustion", "EndProfile", "build_graph", "load_graph", "generate",
    "metric_ball", "exhaustion", "ends", "random_connected_graph",
    "ConvergenceReport", "grad", "p_energy", "energy_gradient", "n1p_norm",
    "product_upper_gradient", "clamp", "bdp_convergence",
    "SolveError", "SolverOptions", "SolveReport", "CompareResult",
    "solve_dirichlet", "solve_required", "residual", "compare",
    "PathCapExceeded", "CapacityResult", "ModulusResult", "SobolevResult",
    "ParabolicityResult", "capacity", "enumerate_paths", "modulus",
    "sobolev_constant", "parabolicity",
    "Family", "Truncation", "get_family",
    "NonCauchyError", "UnstableEndsError", "ExhaustionSolveResult",
    "HarmonicDecomposition", "EndTrace", "AtInfinityResult", "WitnessRecord",
    "ProbeResult", "exhaustion_solve", "harmonic_decompose",
    "dirichlet_at_infinity", "boundary_cardinality_probe",
    "Check", "RowResult", "ROW_NAMES", "SUITES", "run_acceptance",
    "suite_rows", "format_table",
]
