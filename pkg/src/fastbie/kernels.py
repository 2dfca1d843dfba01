"""Generalized Neumann kernel family: auxiliary function and pointwise kernels.

The auxiliary function A encodes the Riemann-Hilbert direction angles theta:
A = exp(i(pi/2 - theta)) * (eta - alpha) on bounded domains and
A = exp(i(pi/2 - theta)) on unbounded ones.  All kernels here are pure
functions of the sampled boundary data; the solvers never materialize kernel
matrices (matvecs go through the fast summation module), so these evaluators
exist for tests, dense oracles, and the e-vector consistency checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import DiscreteBoundary, PiecewiseConstant

INV_PI = 1.0 / math.pi


@dataclass(frozen=True)
class AuxiliaryFunction:
    """Samples of A and A' at the quadrature nodes."""

    theta: PiecewiseConstant
    a: np.ndarray
    ap: np.ndarray
    kind: str
    alpha: complex | None


def a_tilde(disc: DiscreteBoundary, aux: AuxiliaryFunction) -> np.ndarray:
    """Adjoint auxiliary samples eta'/A, derived on demand."""
    return disc.etap / aux.a


def build_auxiliary(disc: DiscreteBoundary, theta: PiecewiseConstant) -> AuxiliaryFunction:
    """Sample A(t) and A'(t) for the given direction angles.

    theta is piecewise constant, so within each component
    A' = exp(i(pi/2 - theta)) * eta' (bounded) or A' = 0 (unbounded).
    """
    domain = disc.domain
    theta.check_length(disc.num_curves)
    phase = np.exp(1j * (math.pi / 2 - theta.sample(disc)))
    if domain.kind == "bounded":
        if domain.alpha is None:
            raise ValueError("bounded domain requires a base point alpha")
        a = phase * (disc.eta - domain.alpha)
        ap = phase * disc.etap
    else:
        a = phase
        ap = np.zeros_like(a)
    return AuxiliaryFunction(theta=theta, a=a, ap=ap, kind=domain.kind, alpha=domain.alpha)


def _require_offdiag(i: int, j: int, name: str) -> None:
    if i == j:
        raise ValueError(f"{name} is not defined on the diagonal")


def _require_smooth_node(disc: DiscreteBoundary, i: int) -> None:
    if abs(disc.etap[i]) < 1e-12 * np.max(np.abs(disc.etap)):
        raise ValueError(
            f"diagonal kernel value requested at corner node {i} where eta' = 0"
        )


def kernel_n(disc: DiscreteBoundary, aux: AuxiliaryFunction, i: int, j: int) -> float:
    """Generalized Neumann kernel N(t_i, t_j), continuous across the diagonal."""
    if i == j:
        _require_smooth_node(disc, i)
        return INV_PI * (
            0.5 * (disc.etapp[i] / disc.etap[i]).imag - (aux.ap[i] / aux.a[i]).imag
        )
    val = aux.a[i] / aux.a[j] * disc.etap[j] / (disc.eta[j] - disc.eta[i])
    return INV_PI * val.imag


def kernel_m(disc: DiscreteBoundary, aux: AuxiliaryFunction, i: int, j: int) -> float:
    """Singular companion kernel M(t_i, t_j); diagonal is rejected."""
    _require_offdiag(i, j, "M")
    val = aux.a[i] / aux.a[j] * disc.etap[j] / (disc.eta[j] - disc.eta[i])
    return INV_PI * val.real


def kernel_m1(disc: DiscreteBoundary, aux: AuxiliaryFunction, i: int, j: int) -> float:
    """Continuous part M1 of the cotangent split; i and j must share a component."""
    if disc.component[i] != disc.component[j]:
        raise ValueError("M1 is defined for nodes on the same component")
    if i == j:
        _require_smooth_node(disc, i)
        return INV_PI * (
            0.5 * (disc.etapp[i] / disc.etap[i]).real - (aux.ap[i] / aux.a[i]).real
        )
    # rearranged cotangent split: M1 = M + (1/2pi) cot((s-t)/2)
    return kernel_m(disc, aux, i, j) + 0.5 * INV_PI / math.tan(
        0.5 * (disc.t[i] - disc.t[j])
    )


def kernel_nk(disc: DiscreteBoundary, i: int, j: int) -> float:
    """Classical Neumann kernel; the diagonal is never needed and is rejected."""
    if i == j:
        raise ValueError("classical Neumann kernel diagonal is not used")
    val = disc.etap[j] / (disc.eta[j] - disc.eta[i])
    return INV_PI * val.imag


def kernel_ng(disc: DiscreteBoundary, aux: AuxiliaryFunction, i: int, j: int) -> float:
    """Continuous part N_g of the adjoint kernel split N* = -N_k + N_g."""
    if i == j:
        _require_smooth_node(disc, i)
        return INV_PI * (disc.etapp[i] / disc.etap[i] - aux.ap[i] / aux.a[i]).imag
    num = aux.a[i] * disc.etap[j] - aux.a[j] * disc.etap[i]
    return INV_PI * (num / (aux.a[i] * (disc.eta[j] - disc.eta[i]))).imag


def kernel_n_tilde(disc: DiscreteBoundary, aux: AuxiliaryFunction, i: int, j: int) -> float:
    """Kernel formed with the adjoint function eta'/A; equals -N(t_j, t_i)."""
    _require_offdiag(i, j, "N-tilde")
    at = a_tilde(disc, aux)
    val = at[i] / at[j] * disc.etap[j] / (disc.eta[j] - disc.eta[i])
    return INV_PI * val.imag


def kernel_m_tilde(disc: DiscreteBoundary, aux: AuxiliaryFunction, i: int, j: int) -> float:
    """Companion of N-tilde; equals -M(t_j, t_i)."""
    _require_offdiag(i, j, "M-tilde")
    at = a_tilde(disc, aux)
    val = at[i] / at[j] * disc.etap[j] / (disc.eta[j] - disc.eta[i])
    return INV_PI * val.real
