"""exactreg: average-case exact regularization of random linear programs.

Geometry of vertex normal cones, Gaussian cone-measure bounds, and
randomized experiments measuring when a penalized linear program keeps the
unpenalized solution.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError,
    ContractError,
    DegenerateVertexError,
    ExactRegError,
    InfeasibleProblemError,
    InvalidDimensionError,
    InvalidInputError,
    NotInscribedError,
    NumericalFailureError,
    PreconditionError,
    TieError,
    UnboundedProblemError,
)
from .geometry import (  # noqa: F401
    Cone,
    Polytope,
    VertexInfo,
    hypercube_edges,
    hypercube_vertex_cone,
    make_birkhoff,
    make_hypercube,
    make_inscribed,
    polytope_from_text,
    polytope_to_text,
    vertex_info,
    vertex_normal_cone,
)
from .linprog import (  # noqa: F401
    LPSolution,
    is_vertex_optimal,
    solve_assignment,
    solve_hypercube,
    solve_simplex,
)
from .cones import (  # noqa: F401
    DualProjection,
    cone_condition_number,
    cone_contains,
    exact_threshold_closed_form,
    project_dual_cone,
    representer_vector,
)
from .gaussmc import (  # noqa: F401
    MCEstimate,
    derive_seed,
    gaussian_stream,
    mc_cone_measure,
    mc_facet_relative_measure,
    mc_margin_measure,
    normal_vectors,
    wilson_interval,
)
from .bounds import (  # noqa: F401
    BoundReport,
    binf_bounds,
    birkhoff_bounds,
    gap_based_bound,
    inner_cone_bounds,
    linear_polytope_bound,
    margin_F,
    margin_bounds,
    membership_failure_bound,
    phase_transition_thresholds,
    shifted_cone_bounds,
)
from .experiments import (  # noqa: F401
    GridConfig,
    GridResult,
    ModelSpec,
    Regularizer,
    TrialRecord,
    emit_results,
    estimate_threshold_expectation,
    load_config,
    run_er_trial,
    run_grid,
)
