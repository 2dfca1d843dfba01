"""Spectral conjugation operator applied blockwise via the FFT.

The cotangent (conjugation) part of the singular operator, after the
constant-annihilation rearrangement, reduces on each boundary component to
multiplication by one fixed circulant n-by-n matrix.  A circulant matvec is
a circular convolution, so each block costs O(n log n):

    L x_k = ifft(fft(b) * fft(x_k))

with first column b given below.  The dense entry formula and Wittich's
matrix K are kept as test oracles only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def symbol_column(n: int) -> np.ndarray:
    """First column of the circulant conjugation matrix for block size n.

    b[0] = 0 and b[i] = (-1)^i * (1/n) * cot(i*pi/n) for i >= 1 (0-based);
    for even n the middle entry b[n/2] vanishes and b[n-i] = -b[i].
    """
    if n % 2 != 0 or n < 4:
        raise ValueError("block size n must be even and at least 4")
    i = np.arange(1, n)
    b = np.empty(n, dtype=float)
    b[0] = 0.0
    b[1:] = (-1.0) ** i / (n * np.tan(i * math.pi / n))
    b[n // 2] = 0.0  # cot(pi/2), kill the rounding residue
    return b


@dataclass(frozen=True)
class CirculantSymbol:
    """Circulant first column and its cached forward transform."""

    n: int
    b: np.ndarray = field(init=False)
    b_hat: np.ndarray = field(init=False)

    def __post_init__(self):
        b = symbol_column(self.n)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "b_hat", np.fft.fft(b))


def apply_conjugation(symbol: CirculantSymbol, x: np.ndarray) -> np.ndarray:
    """Apply the block-diagonal circulant operator to a real node vector.

    x must consist of m+1 blocks of length n.  The result is mathematically
    real; the imaginary residue is asserted small (it flags a corrupted
    symbol or complex input) and then discarded.
    """
    x = np.asarray(x, dtype=float)
    n = symbol.n
    if x.ndim != 1 or x.size % n != 0:
        raise ValueError(f"vector length {x.size} is not a multiple of block size {n}")
    blocks = x.reshape(-1, n)
    out = np.fft.ifft(symbol.b_hat[None, :] * np.fft.fft(blocks, axis=1), axis=1)
    residue = np.max(np.abs(out.imag))
    tol = 1e-10 * max(1.0, float(np.max(np.abs(x), initial=0.0)))
    if residue > tol:
        raise FloatingPointError(
            f"conjugation output has imaginary residue {residue:.3e}; "
            "upstream data is corrupted"
        )
    return np.ascontiguousarray(out.real.reshape(-1))


def dense_conjugation_matrix(n: int) -> np.ndarray:
    """Dense n-by-n conjugation matrix (test oracle).

    Entries (-1)^(p-q) * (1/n) * cot((p-q)*pi/n) off the diagonal, zero on it.
    """
    if n % 2 != 0:
        raise ValueError("n must be even")
    p = np.arange(n)
    d = p[:, None] - p[None, :]
    with np.errstate(divide="ignore"):
        mat = (-1.0) ** d / (n * np.tan(d * math.pi / n))
    np.fill_diagonal(mat, 0.0)
    return mat


def wittich_matrix(n: int) -> np.ndarray:
    """Wittich's conjugation quadrature matrix K (test oracle).

    (K)_{pq} = (2/n) * cot((p-q)*pi/n) for odd p-q and 0 otherwise.
    """
    if n % 2 != 0:
        raise ValueError("n must be even")
    p = np.arange(n)
    d = p[:, None] - p[None, :]
    odd = (d % 2) != 0
    mat = np.zeros((n, n), dtype=float)
    mat[odd] = 2.0 / (n * np.tan(d[odd] * math.pi / n))
    return mat
