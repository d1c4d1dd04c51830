"""Opinion dynamics on switching signed digraphs.

Construction and analysis of signed digraphs, dwell-time switching signals,
transition matrices with their cooperation/antagonism separation, long-run
classification (polarization versus neutralization), and a randomized
check suite binding every structural statement to an executable test.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .dynamics import (
    ConvergenceReport,
    RateFit,
    Trajectory,
    VERDICT_BIPARTITE,
    VERDICT_STABLE,
    VERDICT_UNDETERMINED,
    classify,
    estimate_rate,
    predicted_limit,
    simulate,
    stationary_vector,
)
from .errors import (
    GenerationError,
    GraphConstructionError,
    InternalConsistencyError,
    NotConvergedError,
    PreconditionError,
    ScenarioFormatError,
    ScheduleError,
    SignetError,
)
from .graph import (
    GaugeVector,
    LaplacianParts,
    SignedDigraph,
    UnionGraph,
    build_graph,
    check_digon_symmetry,
    check_structural_balance,
    is_strongly_connected,
    laplacian_parts,
    sign_split,
    union_graphs,
)
from .scenario_io import ParsedScenario, parse_scenario, scenario_to_dict
from .switching import (
    GraphLibrary,
    LiftedGraph,
    SwitchingSignal,
    build_signal,
    check_recurrence,
    check_ssb,
    graph_at,
    jointly_strongly_connected,
    lift,
)
from .transition import (
    TransitionBundle,
    lifted_transition,
    matrix_exponential,
    peano_baker_truncated,
    transition_matrix,
    unsigned_transition,
    volterra_residual,
)
from .verify import (
    CheckResult,
    ScenarioSpec,
    generate_scenario,
    registered_checks,
    run_check,
    run_suite,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    "CheckResult",
    "ConvergenceReport",
    "GaugeVector",
    "GenerationError",
    "GraphConstructionError",
    "GraphLibrary",
    "InternalConsistencyError",
    "LaplacianParts",
    "LiftedGraph",
    "NotConvergedError",
    "ParsedScenario",
    "PreconditionError",
    "RateFit",
    "ScenarioFormatError",
    "ScenarioSpec",
    "ScheduleError",
    "SignedDigraph",
    "SignetError",
    "SwitchingSignal",
    "Trajectory",
    "TransitionBundle",
    "UnionGraph",
    "VERDICT_BIPARTITE",
    "VERDICT_STABLE",
    "VERDICT_UNDETERMINED",
    "build_graph",
    "build_signal",
    "check_digon_symmetry",
    "check_recurrence",
    "check_ssb",
    "check_structural_balance",
    "classify",
    "estimate_rate",
    "generate_scenario",
    "graph_at",
    "is_strongly_connected",
    "jointly_strongly_connected",
    "laplacian_parts",
    "lift",
    "lifted_transition",
    "matrix_exponential",
    "parse_scenario",
    "peano_baker_truncated",
    "predicted_limit",
    "registered_checks",
    "run_check",
    "run_suite",
    "scenario_to_dict",
    "sign_split",
    "simulate",
    "stationary_vector",
    "transition_matrix",
    "union_graphs",
    "unsigned_transition",
    "volterra_residual",
]
