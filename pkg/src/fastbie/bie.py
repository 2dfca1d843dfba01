"""Solver pipelines for the two boundary integral equations.

The primal pipeline solves (I - N) mu = -M gamma in singularity-subtracted
form: the coefficient matrix becomes 2I + diag(B 1) - B where B holds the
off-diagonal Nystrom samples of N, the right-hand side is assembled from the
off-diagonal samples of M plus the circulant conjugation correction, and the
piecewise constant function h follows from the same two operators:

    h = ([D - diag(D 1) + L] mu - [2I + diag(B 1) - B] gamma) / 2.

The adjoint pipeline solves (I + N* + J) phi = gamma through the kernel
split N* = -N_k + N_g, which turns the subtracted system into
(diag(e) + B^T + P) phi = gamma with an explicitly computable vector e and
the blockwise averaging operator P.

Every matvec routes through one fast Cauchy-kernel summation; kernel
matrices are never materialized (the dense constructions in ``dense`` are
test oracles and the no-subtraction comparison baseline only).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .conjugation import CirculantSymbol, apply_conjugation
from .fastsum import FastSumPlan, build_plan, e_matvec, f_matvec
from .geometry import DiscreteBoundary, Domain, PiecewiseConstant, discretize
from .gmres import GmresConfig, SolveReport, gmres_solve
from .kernels import AuxiliaryFunction, build_auxiliary
from . import dense


def block_average(x: np.ndarray, n: int) -> np.ndarray:
    """Replace each length-n block by its mean (the operator P)."""
    blocks = np.asarray(x).reshape(-1, n)
    return np.repeat(blocks.mean(axis=1), n)


def _corner_guard(disc: DiscreteBoundary, what: str) -> None:
    scale = float(np.max(np.abs(disc.etap)))
    if np.any(np.abs(disc.etap) < 1e-12 * scale):
        raise ValueError(
            f"{what} needs eta''/eta' at every node; a node sits on a corner "
            "preimage (choose n with p_j not dividing n, or use the primal solver)"
        )


# ---------------------------------------------------------------------------
# Primal problem: (I - N) mu = -M gamma
# ---------------------------------------------------------------------------
@dataclass
class GnkProblem:
    """Assembled primal problem; immutable after construction.

    Cached per problem: the weight vector eta'/A, its summation image
    (used for both B 1 and D 1), and the circulant symbol, so the right-hand
    side costs one extra summation and every system matvec exactly one.
    """

    disc: DiscreteBoundary
    aux: AuxiliaryFunction
    gamma: np.ndarray
    plan: FastSumPlan
    gmres_config: GmresConfig
    subtract: bool = True
    weight_a: np.ndarray = field(init=False)
    e_weight: np.ndarray = field(init=False)
    symbol: CirculantSymbol = field(init=False)
    plan_time_s: float = 0.0

    def __post_init__(self):
        if self.gamma.shape != self.disc.eta.shape:
            raise ValueError("gamma must be sampled on the full node set")
        self.weight_a = self.disc.etap / self.aux.a
        self.e_weight = e_matvec(self.plan, self.weight_a)
        self.symbol = CirculantSymbol(self.disc.n)


@dataclass
class GnkSolution:
    """Primal solution: mu, node-wise h, canonical per-component h means."""

    mu: np.ndarray
    h: np.ndarray
    h_means: np.ndarray
    report: SolveReport
    timings: dict

    def h_spread(self) -> float:
        """Largest deviation of h from its component mean (piecewise-constancy
        diagnostic; it tracks the achieved residual)."""
        n = self.h.size // self.h_means.size
        return float(np.max(np.abs(self.h - np.repeat(self.h_means, n))))


def build_problem(domain: Domain, n: int, theta: PiecewiseConstant, gamma: np.ndarray,
                  iprec: int = 4, gmres_config: GmresConfig | None = None,
                  subtract: bool = True) -> GnkProblem:
    """Discretize, build the auxiliary function and the summation plan."""
    t0 = time.perf_counter()
    disc = discretize(domain, n)
    aux = build_auxiliary(disc, theta)
    plan = build_plan(disc.eta, iprec)
    problem = GnkProblem(
        disc=disc, aux=aux, gamma=np.asarray(gamma, dtype=float), plan=plan,
        gmres_config=gmres_config or GmresConfig(), subtract=subtract,
    )
    problem.plan_time_s = time.perf_counter() - t0
    return problem


def apply_system(problem: GnkProblem, x: np.ndarray) -> np.ndarray:
    """Matvec with the subtracted coefficient matrix (2I + diag(B 1) - B)x.

    One fast summation per call:  B x = -(2/n) Im[A (E (eta'/A x))].
    """
    disc, a = problem.disc, problem.aux.a
    ex = e_matvec(problem.plan, problem.weight_a * x)
    two_n = 2.0 / disc.n
    return 2.0 * x - two_n * np.imag(a * problem.e_weight) * x + two_n * np.imag(a * ex)


def apply_m_operator(problem: GnkProblem, x: np.ndarray) -> np.ndarray:
    """Matvec with the subtracted singular operator [D - diag(D 1) + L]x."""
    disc, a = problem.disc, problem.aux.a
    ex = e_matvec(problem.plan, problem.weight_a * x)
    two_n = 2.0 / disc.n
    out = -two_n * np.real(a * ex) + two_n * np.real(a * problem.e_weight) * x
    return out + apply_conjugation(problem.symbol, x)


def assemble_rhs(problem: GnkProblem) -> np.ndarray:
    """Right-hand side y: the subtracted discretization of M gamma."""
    return apply_m_operator(problem, problem.gamma)


def solve_gnk(problem: GnkProblem) -> GnkSolution:
    """Solve the primal equation and evaluate h.

    With ``subtract=False`` the comparison baseline is used instead: the
    Nystrom matrix of I - N with its true diagonal and the singular operator
    through Wittich's matrix, materialized densely (test/benchmark only).
    """
    if not problem.subtract:
        return _solve_gnk_unsubtracted(problem)
    timings = {"plan_s": problem.plan_time_s}
    t0 = time.perf_counter()
    y = assemble_rhs(problem)
    timings["rhs_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    report = gmres_solve(lambda v: apply_system(problem, v), -y, problem.gmres_config)
    timings["solve_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    mu = report.solution
    h = 0.5 * (apply_m_operator(problem, mu) - apply_system(problem, problem.gamma))
    timings["h_s"] = time.perf_counter() - t0
    h_means = h.reshape(-1, problem.disc.n).mean(axis=1)
    return GnkSolution(mu=mu, h=h, h_means=h_means, report=report, timings=timings)


def _solve_gnk_unsubtracted(problem: GnkProblem) -> GnkSolution:
    disc, aux = problem.disc, problem.aux
    _corner_guard(disc, "the unsubtracted baseline")
    timings = {"plan_s": problem.plan_time_s}
    t0 = time.perf_counter()
    sys_mat = dense.unsubtracted_system_matrix(disc, aux)
    m_mat = dense.unsubtracted_m_matrix(disc, aux)
    y = m_mat @ problem.gamma
    timings["rhs_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    report = gmres_solve(lambda v: sys_mat @ v, -y, problem.gmres_config)
    timings["solve_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    mu = report.solution
    h = 0.5 * (m_mat @ mu - sys_mat @ problem.gamma)
    timings["h_s"] = time.perf_counter() - t0
    h_means = h.reshape(-1, disc.n).mean(axis=1)
    return GnkSolution(mu=mu, h=h, h_means=h_means, report=report, timings=timings)


# ---------------------------------------------------------------------------
# Adjoint problem: (I + N* + J) phi = gamma
# ---------------------------------------------------------------------------
@dataclass
class AdjointProblem:
    """Assembled adjoint problem with the eigenvalue constant c and vector e."""

    disc: DiscreteBoundary
    aux: AuxiliaryFunction
    gamma: np.ndarray
    plan: FastSumPlan
    gmres_config: GmresConfig
    subtract: bool = True
    c: float = field(init=False)
    e: np.ndarray = field(init=False)
    plan_time_s: float = 0.0

    def __post_init__(self):
        if self.gamma.shape != self.disc.eta.shape:
            raise ValueError("gamma must be sampled on the full node set")
        self.c = 1.0 if self.disc.domain.kind == "bounded" else -1.0
        self.e = assemble_e_vector(self.disc, self.aux, self.plan)


@dataclass
class AdjointSolution:
    phi: np.ndarray
    report: SolveReport
    timings: dict


def build_adjoint_problem(domain: Domain, n: int, theta: PiecewiseConstant,
                          gamma: np.ndarray, iprec: int = 4,
                          gmres_config: GmresConfig | None = None,
                          subtract: bool = True) -> AdjointProblem:
    t0 = time.perf_counter()
    disc = discretize(domain, n)
    aux = build_auxiliary(disc, theta)
    plan = build_plan(disc.eta, iprec)
    problem = AdjointProblem(
        disc=disc, aux=aux, gamma=np.asarray(gamma, dtype=float), plan=plan,
        gmres_config=gmres_config or GmresConfig(), subtract=subtract,
    )
    problem.plan_time_s = time.perf_counter() - t0
    return problem


def assemble_e_vector(disc: DiscreteBoundary, aux: AuxiliaryFunction,
                      plan: FastSumPlan) -> np.ndarray:
    """Diagonal vector of the subtracted adjoint system.

    e = 1 - c - (2/n) Im[E eta'] + (2/n) Im[eta''/eta' - A'/A]; costs one
    fast summation with weights eta'.  Requires eta' != 0 at every node.
    """
    _corner_guard(disc, "the adjoint e-vector")
    c = 1.0 if disc.domain.kind == "bounded" else -1.0
    ex = e_matvec(plan, disc.etap)
    two_n = 2.0 / disc.n
    return (1.0 - c - two_n * np.imag(ex)
            + two_n * np.imag(disc.etapp / disc.etap - aux.ap / aux.a))


def apply_adjoint_system(problem: AdjointProblem, x: np.ndarray) -> np.ndarray:
    """Matvec with (diag(e) + B^T + P)x; one fast summation per call.

    B^T x = (2/n) Im[(eta'/A)(E (A x))]; P replaces each component block by
    its mean.
    """
    disc, a = problem.disc, problem.aux.a
    ex = e_matvec(problem.plan, a * x)
    btx = (2.0 / disc.n) * np.imag((disc.etap / a) * ex)
    return problem.e * x + btx + block_average(x, disc.n)


def solve_adjoint(problem: AdjointProblem) -> AdjointSolution:
    """Solve the adjoint equation; the right-hand side is gamma itself."""
    if not problem.subtract:
        return _solve_adjoint_unsubtracted(problem)
    timings = {"plan_s": problem.plan_time_s, "rhs_s": 0.0}
    t0 = time.perf_counter()
    report = gmres_solve(lambda v: apply_adjoint_system(problem, v),
                         problem.gamma, problem.gmres_config)
    timings["solve_s"] = time.perf_counter() - t0
    return AdjointSolution(phi=report.solution, report=report, timings=timings)


def _solve_adjoint_unsubtracted(problem: AdjointProblem) -> AdjointSolution:
    disc, aux = problem.disc, problem.aux
    _corner_guard(disc, "the unsubtracted adjoint baseline")
    timings = {"plan_s": problem.plan_time_s}
    t0 = time.perf_counter()
    sys_mat = dense.unsubtracted_adjoint_matrix(disc, aux)
    timings["rhs_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    report = gmres_solve(lambda v: sys_mat @ v, problem.gamma, problem.gmres_config)
    timings["solve_s"] = time.perf_counter() - t0
    return AdjointSolution(phi=report.solution, report=report, timings=timings)


def adjoint_orthogonality(disc: DiscreteBoundary, gamma_tilde: np.ndarray,
                          phi: np.ndarray) -> float:
    """|(2 pi / n) sum gamma_tilde * phi|, the discrete orthogonality defect."""
    return float(abs(disc.weight * np.dot(gamma_tilde, phi)))


# ---------------------------------------------------------------------------
# Interior evaluation by the subtracted Cauchy formula
# ---------------------------------------------------------------------------
def cauchy_eval(disc: DiscreteBoundary, boundary_values: np.ndarray,
                targets: np.ndarray, f_inf: complex | None = None,
                plan: FastSumPlan | None = None, iprec: int = 4) -> np.ndarray:
    """Interior values of an analytic function from its boundary samples.

    Bounded domains use the ratio form f(z) = F[f eta'] / F[eta']; unbounded
    domains need ``f_inf`` and use the 1/(n i)-scaled variant.  The ratio is
    the singularity-subtracted trapezoidal rule, so accuracy holds even for
    targets close to the boundary.  Targets within 1e-12 of the boundary
    diameter from a node are rejected.
    """
    targets = np.ascontiguousarray(targets, dtype=complex)
    values = np.ascontiguousarray(boundary_values, dtype=complex)
    if values.shape != disc.eta.shape:
        raise ValueError("boundary values must be sampled on the full node set")
    tol = 1e-12 * disc.diameter()
    for lo in range(0, targets.size, 512):
        chunk = targets[lo:lo + 512]
        dmin = np.full(chunk.size, np.inf)
        for nlo in range(0, disc.eta.size, 8192):
            nodes = disc.eta[nlo:nlo + 8192]
            np.minimum(dmin, np.min(np.abs(chunk[:, None] - nodes[None, :]), axis=1), out=dmin)
        if np.any(dmin < tol):
            raise ValueError("a target lies on (or within tolerance of) a boundary node")
    if plan is None:
        plan = build_plan(disc.eta, iprec)

    num = f_matvec(plan, values * disc.etap, targets)
    den = f_matvec(plan, disc.etap, targets)
    if disc.domain.kind == "bounded":
        top, bot = num, den
    else:
        if f_inf is None:
            raise ValueError("unbounded evaluation requires the value at infinity")
        scale = 1.0 / (disc.n * 1j)
        top, bot = f_inf - scale * num, 1.0 - scale * den
    out = top / bot
    # identical sums (constant f) must give exactly 1; complex division of
    # equal operands is not exact under the scaled-division algorithm
    out[top == bot] = 1.0
    return out
