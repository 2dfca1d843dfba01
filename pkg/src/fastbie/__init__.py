"""Fast Nystrom solvers for boundary integral equations with the
generalized Neumann kernel on multiply connected planar domains.

The package couples a trapezoidal Nystrom discretization with singularity
subtraction, a hierarchical fast summation for the Cauchy kernel, an
FFT-applied circulant conjugation operator, and restarted GMRES, giving
O((m+1) n log n) solves for the primal equation and O((m+1) n) for the
adjoint one.  Interior values follow from a subtracted Cauchy formula that
stays accurate near the boundary.
"""

__version__ = "0.1.0"

from .geometry import (
    Curve,
    DiscreteBoundary,
    Domain,
    PiecewiseConstant,
    bounded_domain,
    circle,
    discretize,
    ellipse,
    grading_delta,
    grading_omega,
    polygon,
    square,
    trig_curve,
    unbounded_domain,
    winding_number,
)
from .kernels import AuxiliaryFunction, build_auxiliary
from .conjugation import CirculantSymbol, apply_conjugation
from .fastsum import (
    TOLERANCES,
    FastSumPlan,
    build_plan,
    direct_e_matvec,
    direct_f_matvec,
    e_matvec,
    f_matvec,
)
from .gmres import GmresConfig, SolveReport, gmres_solve
from .bie import (
    AdjointProblem,
    AdjointSolution,
    GnkProblem,
    GnkSolution,
    adjoint_orthogonality,
    apply_adjoint_system,
    apply_m_operator,
    apply_system,
    assemble_e_vector,
    assemble_rhs,
    block_average,
    build_adjoint_problem,
    build_problem,
    cauchy_eval,
    solve_adjoint,
    solve_gnk,
)

__all__ = [
    "AdjointProblem",
    "AdjointSolution",
    "AuxiliaryFunction",
    "CirculantSymbol",
    "Curve",
    "DiscreteBoundary",
    "Domain",
    "FastSumPlan",
    "GmresConfig",
    "GnkProblem",
    "GnkSolution",
    "PiecewiseConstant",
    "SolveReport",
    "TOLERANCES",
    "adjoint_orthogonality",
    "apply_adjoint_system",
    "apply_conjugation",
    "apply_m_operator",
    "apply_system",
    "assemble_e_vector",
    "assemble_rhs",
    "block_average",
    "bounded_domain",
    "build_adjoint_problem",
    "build_auxiliary",
    "build_plan",
    "build_problem",
    "cauchy_eval",
    "circle",
    "direct_e_matvec",
    "direct_f_matvec",
    "discretize",
    "e_matvec",
    "ellipse",
    "f_matvec",
    "gmres_solve",
    "grading_delta",
    "grading_omega",
    "polygon",
    "solve_adjoint",
    "solve_gnk",
    "square",
    "trig_curve",
    "unbounded_domain",
    "winding_number",
]
