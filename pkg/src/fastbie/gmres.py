"""Restarted GMRES for matrix-free real linear systems.

Arnoldi with modified Gram-Schmidt (one conditional reorthogonalization
pass), Givens rotations for the running least-squares problem, and restarts
after a fixed number of inner iterations.  Matches the usual reference-solver
call shape: solve(matvec, b, restart, tol, maxit) with zero initial guess,
convergence declared on the relative residual ||b - Ax|| / ||b||.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GmresConfig:
    """Restart length, relative residual tolerance, max outer iterations."""

    restart: int = 25
    tol: float = 1e-12
    maxit: int = 40

    def __post_init__(self):
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.maxit < 1:
            raise ValueError("maxit must be >= 1")


@dataclass
class SolveReport:
    """Outcome of one linear solve.

    ``residual_history`` holds the initial relative residual followed by one
    entry per inner iteration (the Givens running estimate; the final entry
    is certified against the true residual when the solve converges).
    """

    solution: np.ndarray
    residual_history: list[float] = field(default_factory=list)
    matvec_count: int = 0
    converged: bool = False
    elapsed_s: float = 0.0

    @property
    def inner_iterations(self) -> int:
        return max(len(self.residual_history) - 1, 0)


def _checked(v: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} contains NaN or Inf")
    return v


def gmres_solve(matvec, rhs: np.ndarray, config: GmresConfig, x0: np.ndarray | None = None) -> SolveReport:
    """Solve A x = rhs where A is available only through ``matvec``.

    Returns the best iterate seen.  Happy breakdown ends the solve (the
    Krylov space became invariant, so no further progress is possible);
    plain non-convergence is reported through ``converged=False``, never
    raised.  NaN/Inf from the matvec aborts with ValueError.
    """
    t_start = time.perf_counter()
    b = _checked(np.asarray(rhs, dtype=float), "right-hand side")
    dim = b.size
    x = np.zeros(dim) if x0 is None else np.array(x0, dtype=float)

    b_norm = float(np.linalg.norm(b))
    scale = b_norm if b_norm > 0 else 1.0
    restart = min(config.restart, dim)

    report = SolveReport(solution=x.copy())
    history = report.residual_history

    def apply(v: np.ndarray) -> np.ndarray:
        report.matvec_count += 1
        out = np.asarray(matvec(v), dtype=float)
        if out.shape != (dim,):
            raise ValueError("matvec is not dimension-preserving")
        return _checked(out, "matvec output")

    r = b - apply(x) if x.any() else b.copy()
    rel = float(np.linalg.norm(r)) / scale
    history.append(rel)
    best_rel, best_x = rel, x.copy()

    breakdown = False
    for _outer in range(config.maxit):
        if rel <= config.tol or breakdown:
            break
        beta = rel * scale

        V = np.zeros((restart + 1, dim))
        H = np.zeros((restart + 1, restart))
        cs = np.zeros(restart)
        sn = np.zeros(restart)
        g = np.zeros(restart + 1)
        g[0] = beta
        V[0] = r / beta

        k_used = 0
        for k in range(restart):
            # own the buffer: a matvec may return its argument (e.g. identity)
            w = np.array(apply(V[k]), dtype=float)
            norm_before = float(np.linalg.norm(w))
            for j in range(k + 1):
                H[j, k] = V[j] @ w
                w -= H[j, k] * V[j]
            if float(np.linalg.norm(w)) < norm_before / np.sqrt(2.0):
                # severe cancellation: one reorthogonalization pass
                for j in range(k + 1):
                    corr = V[j] @ w
                    H[j, k] += corr
                    w -= corr * V[j]
            hk1 = float(np.linalg.norm(w))
            H[k + 1, k] = hk1

            for j in range(k):
                temp = cs[j] * H[j, k] + sn[j] * H[j + 1, k]
                H[j + 1, k] = -sn[j] * H[j, k] + cs[j] * H[j + 1, k]
                H[j, k] = temp
            denom = float(np.hypot(H[k, k], H[k + 1, k]))
            if denom == 0.0:
                breakdown = True  # zero column: operator is singular here
                break
            cs[k], sn[k] = H[k, k] / denom, H[k + 1, k] / denom
            H[k, k] = denom
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]

            k_used = k + 1
            history.append(abs(g[k + 1]) / scale)

            if hk1 <= 1e-14 * max(norm_before, 1e-300):
                breakdown = True
                break
            if history[-1] <= config.tol:
                break
            V[k + 1] = w / hk1

        if k_used > 0:
            y = np.linalg.solve(np.triu(H[:k_used, :k_used]), g[:k_used])
            x = x + V[:k_used].T @ y

        r = b - apply(x)
        rel = float(np.linalg.norm(r)) / scale
        if rel < best_rel:
            best_rel, best_x = rel, x.copy()
        if rel <= config.tol:
            history[-1] = rel  # certify the Givens estimate with the true residual
            break

    report.converged = best_rel <= config.tol
    report.solution = best_x
    report.elapsed_s = time.perf_counter() - t_start
    return report
