"""Dense reference constructions: test oracles and the comparison baseline.

Everything here materializes (m+1)n x (m+1)n matrices directly from the
kernel entry formulas, so it exists to validate the fast matvec pipelines
and to reproduce the no-subtraction comparison runs.  None of it is used by
the production solvers when singularity subtraction is on.
"""

from __future__ import annotations

import math

import numpy as np

from .conjugation import dense_conjugation_matrix, wittich_matrix
from .geometry import DiscreteBoundary
from .kernels import AuxiliaryFunction

_ROW_CHUNK = 512


def _kernel_entry_rows(disc: DiscreteBoundary, aux: AuxiliaryFunction, rows: slice) -> np.ndarray:
    """Complex entries A(s)/A(t) * eta'(t) / (eta(t) - eta(s)) for a row block.

    Row index is s = t_i, column index is t = t_j; entries with i == j are
    zeroed (the callers install diagonal limits themselves where needed).
    """
    eta_r = disc.eta[rows]
    diff = disc.eta[None, :] - eta_r[:, None]
    i0 = rows.start or 0
    idx = np.arange(eta_r.size)
    diff[idx, i0 + idx] = 1.0  # placeholder; the entry is zeroed below
    block = (aux.a[rows][:, None] / aux.a[None, :]) * (disc.etap[None, :] / diff)
    block[idx, i0 + idx] = 0.0
    return block


def _assemble(disc: DiscreteBoundary, aux: AuxiliaryFunction, part) -> np.ndarray:
    total = disc.total_nodes
    out = np.empty((total, total))
    for lo in range(0, total, _ROW_CHUNK):
        rows = slice(lo, min(lo + _ROW_CHUNK, total))
        out[rows] = part(_kernel_entry_rows(disc, aux, rows))
    return out


def b_matrix(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """Zero-diagonal Nystrom samples (2 pi / n) N(t_i, t_j)."""
    return _assemble(disc, aux, lambda blk: (2.0 / disc.n) * blk.imag)


def d_matrix(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """Zero-diagonal Nystrom samples (2 pi / n) M(t_i, t_j)."""
    return _assemble(disc, aux, lambda blk: (2.0 / disc.n) * blk.real)


def n_diagonal(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """N(t, t) = (1/pi)(Im(eta''/eta')/2 - Im(A'/A)); smooth nodes only."""
    return (0.5 * np.imag(disc.etapp / disc.etap) - np.imag(aux.ap / aux.a)) / math.pi


def m1_diagonal(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """M1(t, t) = (1/pi)(Re(eta''/eta')/2 - Re(A'/A)); smooth nodes only."""
    return (0.5 * np.real(disc.etapp / disc.etap) - np.real(aux.ap / aux.a)) / math.pi


def ng_diagonal(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """N_g(t, t) = (1/pi) Im(eta''/eta' - A'/A); smooth nodes only."""
    return np.imag(disc.etapp / disc.etap - aux.ap / aux.a) / math.pi


def system_matrix(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """Subtracted primal coefficient matrix 2I + diag(B 1) - B."""
    b = b_matrix(disc, aux)
    return 2.0 * np.eye(disc.total_nodes) + np.diag(b @ np.ones(disc.total_nodes)) - b


def m_operator_matrix(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """Subtracted singular operator D - diag(D 1) + L as one dense matrix."""
    d = d_matrix(disc, aux)
    out = d - np.diag(d @ np.ones(disc.total_nodes))
    lmat = dense_conjugation_matrix(disc.n)
    for k in range(disc.num_curves):
        blk = disc.block(k)
        out[blk, blk] += lmat
    return out


def p_matrix(disc: DiscreteBoundary) -> np.ndarray:
    """Blockwise averaging operator: 1/n within each component block."""
    out = np.zeros((disc.total_nodes, disc.total_nodes))
    for k in range(disc.num_curves):
        blk = disc.block(k)
        out[blk, blk] = 1.0 / disc.n
    return out


def nk_offdiag_rowsums(disc: DiscreteBoundary) -> np.ndarray:
    """(2 pi / n) sum_{j != i} N_k(t_i, t_j) for the e-vector formulas."""
    total = disc.total_nodes
    out = np.empty(total)
    for lo in range(0, total, _ROW_CHUNK):
        rows = slice(lo, min(lo + _ROW_CHUNK, total))
        diff = disc.eta[None, :] - disc.eta[rows][:, None]
        idx = np.arange(diff.shape[0])
        diff[idx, (rows.start or 0) + idx] = 1.0  # placeholder, zeroed below
        vals = np.imag(disc.etap[None, :] / diff)
        vals[idx, (rows.start or 0) + idx] = 0.0
        out[rows] = (2.0 / disc.n) * np.sum(vals, axis=1)
    return out


def e_vector_entries(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """e from kernel sums: 1 - c + (2pi/n) sum_{j!=i} N_k + (2pi/n) N_g(t,t)."""
    c = 1.0 if disc.domain.kind == "bounded" else -1.0
    w = 2.0 * math.pi / disc.n
    return (1.0 - c) + nk_offdiag_rowsums(disc) + w * ng_diagonal(disc, aux)


def e_vector_via_r(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """e through the trapezoidal rule on N_g (the derivation route).

    e_i = 1 - c + r(t_i) - (2pi/n) sum_{j != i} N(t_j, t_i) with
    r(t_i) = (2pi/n) [sum_{j != i} N_g(t_i, t_j) + N_g(t_i, t_i)].
    """
    c = 1.0 if disc.domain.kind == "bounded" else -1.0
    total = disc.total_nodes
    w = 2.0 * math.pi / disc.n
    b = b_matrix(disc, aux)
    n_transposed_sums = b.T @ np.ones(total)

    ng_sums = np.empty(total)
    for lo in range(0, total, _ROW_CHUNK):
        rows = slice(lo, min(lo + _ROW_CHUNK, total))
        eta_r = disc.eta[rows]
        diff = disc.eta[None, :] - eta_r[:, None]
        idx = np.arange(eta_r.size)
        diff[idx, (rows.start or 0) + idx] = 1.0  # placeholder, zeroed below
        num = aux.a[rows][:, None] * disc.etap[None, :] - aux.a[None, :] * disc.etap[rows][:, None]
        ng = np.imag(num / (aux.a[rows][:, None] * diff)) / math.pi
        ng[idx, (rows.start or 0) + idx] = 0.0
        ng_sums[rows] = w * np.sum(ng, axis=1)
    r = ng_sums + w * ng_diagonal(disc, aux)
    return (1.0 - c) + r - n_transposed_sums


def adjoint_matrix(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """Subtracted adjoint coefficient matrix diag(e) + B^T + P."""
    return np.diag(e_vector_entries(disc, aux)) + b_matrix(disc, aux).T + p_matrix(disc)


# ---------------------------------------------------------------------------
# No-subtraction comparison baseline
# ---------------------------------------------------------------------------
def unsubtracted_system_matrix(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """Plain Nystrom matrix of I - N with the true kernel diagonal."""
    w = 2.0 * math.pi / disc.n
    out = -b_matrix(disc, aux)
    np.fill_diagonal(out, np.diag(out) - w * n_diagonal(disc, aux))
    out += np.eye(disc.total_nodes)
    return out


def unsubtracted_m_matrix(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """Plain discretization of M: Wittich's K on the cotangent part, the
    trapezoidal rule on M1 (same component, true diagonal) and on M across
    components."""
    n = disc.n
    out = d_matrix(disc, aux)
    p = np.arange(n)
    dd = p[:, None] - p[None, :]
    with np.errstate(divide="ignore"):
        cot = 1.0 / (n * np.tan(dd * math.pi / n))
    np.fill_diagonal(cot, 0.0)
    k_w = wittich_matrix(n)
    m1_diag = (2.0 * math.pi / n) * m1_diagonal(disc, aux)
    for k in range(disc.num_curves):
        blk = disc.block(k)
        out[blk, blk] += cot - k_w
        idx = np.arange(k * n, (k + 1) * n)
        out[idx, idx] = m1_diag[idx]
    return out


def unsubtracted_adjoint_matrix(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """Plain Nystrom matrix of I + N* + J with the true kernel diagonal."""
    w = 2.0 * math.pi / disc.n
    nstar = b_matrix(disc, aux).T
    np.fill_diagonal(nstar, w * n_diagonal(disc, aux))
    return np.eye(disc.total_nodes) + nstar + p_matrix(disc)
