"""Built-in geometries and analytic test data for experiments.

The named geometries cover the desk-scale measurement protocol: bounded and
unbounded circle clusters with a scalable count, the five-circle close
boundary families (bounded with an enclosing unit circle, unbounded with a
center circle inside four neighbours), and a single square with graded
corners.  The analytic test functions come with the induced boundary data
gamma = Re[A f(eta)], the exact solution Im[A f(eta)], and exact h = 0,
which is what the convergence experiments measure against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import (
    Domain,
    PiecewiseConstant,
    bounded_domain,
    circle,
    square,
    unbounded_domain,
)
from .kernels import AuxiliaryFunction


def example1_bounded(count: int = 3) -> Domain:
    """Unit circle with count-1 circular holes; alpha = 0.

    count=3 is the canonical desk geometry (holes of radius 0.25 at +-0.5);
    larger counts place the holes on a ring.
    """
    if count < 2 or count > 33:
        raise ValueError("count must be between 2 and 33")
    holes = []
    if count == 3:
        holes = [circle(-0.5, 0.25, "cw"), circle(0.5, 0.25, "cw")]
    else:
        k = count - 1
        ring = 0.55
        radius = min(0.2, 0.6 * ring * math.sin(math.pi / max(k, 2)))
        for j in range(k):
            c = ring * np.exp(2j * math.pi * j / k)
            holes.append(circle(c, radius, "cw"))
    return bounded_domain([circle(0.0, 1.0, "ccw")] + holes, alpha=0.0)


def example1_unbounded(count: int = 3) -> Domain:
    """count clockwise circles with the origin inside the first hole."""
    if count < 2 or count > 33:
        raise ValueError("count must be between 2 and 33")
    curves = [circle(0.0, 0.25, "cw")]
    if count == 3:
        curves += [circle(-1.0, 0.25, "cw"), circle(1.0, 0.25, "cw")]
    else:
        k = count - 1
        ring = 1.1
        radius = min(0.25, 0.6 * ring * math.sin(math.pi / max(k, 2)))
        for j in range(k):
            c = ring * np.exp(2j * math.pi * j / k)
            curves.append(circle(c, radius, "cw"))
    return unbounded_domain(curves)


def example2_bounded(eps: float) -> Domain:
    """Five circles: the unit circle enclosing four equal circles whose
    mutual clearance is controlled by eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    den = 2.0 + 2.0 * math.sqrt(2.0)
    radius = (2.0 - eps * den) / den
    if radius <= 0:
        raise ValueError("eps too large: inner circles vanish")
    d = (2.0 - eps) / den
    holes = [circle(complex(sx * d, sy * d), radius, "cw")
             for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1))]
    return bounded_domain([circle(0.0, 1.0, "ccw")] + holes, alpha=0.0)


def example4_unbounded(eps: float) -> Domain:
    """Five exterior circles: one at the origin inside four at +-1 +- i,
    with clearance eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    r_center = math.sqrt(2.0) - 1.0 - eps / 2.0
    r_outer = 1.0 - eps / 2.0
    if r_center <= 0:
        raise ValueError("eps too large: center circle vanishes")
    curves = [circle(0.0, r_center, "cw")]
    curves += [circle(complex(sx, sy), r_outer, "cw")
               for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1))]
    return unbounded_domain(curves)


def square_with_grading(grading: int = 3) -> Domain:
    """Single square boundary (half side 1, centered at 0) with graded
    corners; alpha = 0."""
    return bounded_domain([square(0.0, 1.0, grading=grading, orientation="ccw")], alpha=0.0)


NAMED_DOMAINS = {
    "example1-bounded": example1_bounded,
    "example1-unbounded": example1_unbounded,
    "example2-bounded-5": example2_bounded,
    "example4-unbounded-5": example4_unbounded,
    "square-with-grading": square_with_grading,
}


def default_theta(domain: Domain) -> PiecewiseConstant:
    """The measurement-protocol angles theta_j = 2 j pi / m (pi/2 when m=0)."""
    m = domain.num_curves - 1
    if m == 0:
        return PiecewiseConstant((math.pi / 2,))
    return PiecewiseConstant(tuple(2.0 * j * math.pi / m for j in range(m + 1)))


# ---------------------------------------------------------------------------
# Analytic test data
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TestFunction:
    """Analytic f with the boundary data and exact solution it induces."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    f_inf: complex | None  # None for bounded-domain functions

    def gamma(self, eta: np.ndarray, a: np.ndarray) -> np.ndarray:
        return np.real(a * self.f(eta))

    def exact_mu(self, eta: np.ndarray, a: np.ndarray) -> np.ndarray:
        return np.imag(a * self.f(eta))


def _f_bounded(z: np.ndarray) -> np.ndarray:
    return np.sin(z) + 1.0 / (z - 2.0)


def _f_unbounded(z: np.ndarray) -> np.ndarray:
    return 1.0 / z - np.sin(1.0 / z)


TEST_FUNCTIONS = {
    "example1-bounded": TestFunction("example1-bounded", _f_bounded, None),
    "example1-unbounded": TestFunction("example1-unbounded", _f_unbounded, 0.0),
}


def make_trig_gamma(terms: list[tuple[int, float, float]]) -> Callable[[np.ndarray], np.ndarray]:
    """gamma(t) = sum a_k cos(k t) + b_k sin(k t), applied on every component."""

    def gamma(t: np.ndarray) -> np.ndarray:
        out = np.zeros_like(t, dtype=float)
        for k, a_k, b_k in terms:
            out += a_k * np.cos(k * t) + b_k * np.sin(k * t)
        return out

    return gamma


def gamma_samples(spec: str, t: np.ndarray, eta: np.ndarray, aux: AuxiliaryFunction) -> np.ndarray:
    """Evaluate a named gamma spec on the node set.

    Accepted: 'example1-bounded', 'example1-unbounded', 'constant',
    'trig k:a:b ...' (cosine/sine amplitudes per wavenumber).
    """
    if spec in TEST_FUNCTIONS:
        return TEST_FUNCTIONS[spec].gamma(eta, aux.a)
    if spec == "constant":
        return np.ones_like(t)
    parts = spec.split()
    if parts and parts[0] == "trig":
        terms = []
        for tok in parts[1:]:
            k, a_k, b_k = tok.split(":")
            terms.append((int(k), float(a_k), float(b_k)))
        if not terms:
            raise ValueError("trig gamma spec needs at least one k:a:b term")
        return make_trig_gamma(terms)(t)
    raise ValueError(f"unknown gamma spec {spec!r}")
