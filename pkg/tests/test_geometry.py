import math

import numpy as np
import pytest

import fastbie as fb
from fastbie.geometry import (
    TWO_PI,
    grading_delta_derivatives,
    grading_omega_derivatives,
)


def unit_disc():
    return fb.bounded_domain([fb.circle(0.0, 1.0, "ccw")], alpha=0.0)


class TestDiscretize:
    def test_unit_circle_n4(self):
        disc = fb.discretize(unit_disc(), 4)
        assert np.allclose(disc.t, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
        assert np.allclose(disc.eta, [1, 1j, -1, -1j], atol=1e-15)
        assert np.allclose(disc.etap, 1j * disc.eta, atol=1e-15)
        assert np.allclose(disc.etapp, -disc.eta, atol=1e-15)

    def test_odd_n_rejected(self):
        with pytest.raises(ValueError, match="even"):
            fb.discretize(unit_disc(), 5)

    def test_too_small_n_rejected(self):
        with pytest.raises(ValueError):
            fb.discretize(unit_disc(), 2)

    def test_node_layout_multiple_curves(self):
        domain = fb.bounded_domain(
            [fb.circle(0, 1, "ccw"), fb.circle(0.4, 0.2, "cw"), fb.circle(-0.4, 0.2, "cw")],
            alpha=0.0,
        )
        n = 8
        disc = fb.discretize(domain, n)
        assert disc.total_nodes == 3 * n
        # node i = k*n + p holds s_p on curve k
        s = np.arange(n) * TWO_PI / n
        for k in range(3):
            blk = disc.block(k)
            assert np.array_equal(disc.t[blk], s)
            assert np.all(disc.component[blk] == k)

    def test_square_grading_clusters_and_corner_derivative(self):
        domain = fb.bounded_domain([fb.square(0, 1.0, grading=3)], alpha=0.0)
        disc = fb.discretize(domain, 16)
        # p_j = 4 divides n = 16: nodes 0, 4, 8, 12 sit on corner preimages
        corner = disc.corner_node_mask()
        assert list(np.flatnonzero(corner)) == [0, 4, 8, 12]
        assert np.max(np.abs(disc.etap[corner])) < 1e-14
        assert np.min(np.abs(disc.etap[~corner])) > 0
        # grading clusters nodes: the gap at a corner is far smaller than
        # the gap at the middle of an edge
        gap_corner = abs(disc.eta[1] - disc.eta[0])
        gap_mid = abs(disc.eta[2] - disc.eta[1])
        assert gap_corner < 0.25 * gap_mid

    def test_alpha_winding_validation(self):
        with pytest.raises(ValueError, match="winding"):
            fb.discretize(fb.bounded_domain([fb.circle(0, 1, "ccw")], alpha=2.0), 64)
        with pytest.raises(ValueError, match="winding"):
            fb.discretize(fb.bounded_domain([fb.circle(0, 1, "ccw")], alpha=1.0), 64)

    def test_alpha_required_iff_bounded(self):
        domain = fb.Domain(curves=unit_disc().curves, kind="bounded", alpha=None)
        with pytest.raises(ValueError, match="alpha"):
            fb.discretize(domain, 8)
        bad = fb.Domain(curves=(fb.circle(0, 1, "cw"),), kind="unbounded", alpha=0.0)
        with pytest.raises(ValueError, match="alpha"):
            fb.discretize(bad, 8)

    def test_orientation_enforced(self):
        with pytest.raises(ValueError, match="counterclockwise"):
            fb.bounded_domain([fb.circle(0, 1, "cw")], alpha=0.0)
        with pytest.raises(ValueError, match="clockwise"):
            fb.bounded_domain([fb.circle(0, 1, "ccw"), fb.circle(0.4, 0.2, "ccw")], alpha=0.0)
        with pytest.raises(ValueError, match="clockwise"):
            fb.unbounded_domain([fb.circle(0, 1, "ccw")])


class TestGradingOmega:
    @pytest.mark.parametrize("p", [2, 3, 5, 8])
    def test_midpoint_and_endpoints(self, p):
        assert fb.grading_omega(math.pi, p) == pytest.approx(math.pi, abs=1e-14)
        assert fb.grading_omega(0.0, p) == 0.0
        assert fb.grading_omega(TWO_PI, p) == TWO_PI

    def test_monotone_sweep(self):
        t = np.linspace(0.0, TWO_PI, 1001)
        w = fb.grading_omega(t, 3)
        assert np.all(np.diff(w) > 0)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            fb.grading_omega(-0.1, 3)
        with pytest.raises(ValueError):
            fb.grading_omega(7.0, 3)
        with pytest.raises(ValueError):
            fb.grading_omega(1.0, 1)

    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_derivatives_match_finite_differences(self, p):
        t = np.linspace(0.3, TWO_PI - 0.3, 11)
        h1, h2 = 1e-6, 1e-4  # second differences lose eps/h^2 to roundoff
        _, d1, d2 = grading_omega_derivatives(t, p)
        fd1 = (fb.grading_omega(t + h1, p) - fb.grading_omega(t - h1, p)) / (2 * h1)
        fd2 = (fb.grading_omega(t + h2, p) - 2 * fb.grading_omega(t, p)
               + fb.grading_omega(t - h2, p)) / h2**2
        assert np.max(np.abs(d1 - fd1)) < 1e-8
        assert np.max(np.abs(d2 - fd2)) < 1e-5

    def test_endpoint_derivative_exactly_zero(self):
        for p in (2, 3, 5):
            _, d1, _ = grading_omega_derivatives(0.0, p)
            assert d1 == 0.0
            _, d1, _ = grading_omega_derivatives(TWO_PI, p)
            assert d1 == 0.0


class TestGradingDelta:
    def test_single_corner_reduces_to_omega(self):
        t = np.linspace(0, TWO_PI, 57)
        assert np.array_equal(fb.grading_delta(t, [0.0], 3), fb.grading_omega(t, 3))

    def test_corners_are_fixed_points(self):
        corners = [k * TWO_PI / 4 for k in range(4)]
        for c in corners:
            assert fb.grading_delta(c, corners, 3) == pytest.approx(c, abs=1e-14)

    def test_corner_derivative_vanishes_by_central_differences(self):
        corners = [k * TWO_PI / 4 for k in range(4)]
        c = corners[1]  # pi/2
        h = 1e-5
        fd = (fb.grading_delta(c + h, corners, 3) - fb.grading_delta(c - h, corners, 3)) / (2 * h)
        assert abs(fd) < 1e-8
        _, d1, _ = grading_delta_derivatives(c, corners, 3)
        assert d1 == 0.0

    def test_nonequispaced_corners_rejected(self):
        with pytest.raises(ValueError, match="equally spaced"):
            fb.grading_delta(1.0, [0.0, 1.0, 4.0], 3)


class TestQuadrature:
    def test_trapezoid_exactness_on_fourier_modes(self):
        n = 32
        disc = fb.discretize(unit_disc(), n)
        t = disc.t
        w = disc.weight
        for k in range(1, n):
            val = w * np.sum(np.exp(1j * k * t))
            assert abs(val) < 1e-12, k
        assert w * np.sum(np.exp(0j * t)) == pytest.approx(TWO_PI, rel=1e-15)

    def test_graded_integrand_vanishes_at_corners(self):
        # composed integrand gamma(delta(t)) * delta'(t) is exactly 0 at corners
        corners = [k * TWO_PI / 4 for k in range(4)]
        for c in corners:
            d, dp, _ = grading_delta_derivatives(c, corners, 3)
            assert dp == 0.0
            assert math.cos(d) * dp == 0.0

    def test_winding_number_example2_geometry(self):
        from fastbie.presets import example2_bounded

        disc = fb.discretize(example2_bounded(0.1), 256)
        assert abs(fb.winding_number(disc, 0.0) - 1.0) < 1e-6


class TestPiecewiseConstant:
    def test_length_validation(self):
        disc = fb.discretize(unit_disc(), 8)
        with pytest.raises(ValueError, match="values"):
            fb.PiecewiseConstant((1.0, 2.0)).sample(disc)

    def test_sample_repeats_per_component(self):
        domain = fb.bounded_domain([fb.circle(0, 1, "ccw"), fb.circle(0.4, 0.2, "cw")], alpha=0.0)
        disc = fb.discretize(domain, 4)
        vals = fb.PiecewiseConstant((1.5, -2.0)).sample(disc)
        assert np.array_equal(vals, [1.5] * 4 + [-2.0] * 4)


class TestCurves:
    def test_ellipse_derivatives(self):
        cur = fb.ellipse(1 + 2j, 2.0, 1.0, "ccw")
        t = np.linspace(0, TWO_PI, 17)
        eta, etap, etapp = cur.evaluate(t)
        h = 1e-6
        eta_p = (cur.evaluate(t + h)[0] - cur.evaluate(t - h)[0]) / (2 * h)
        assert np.max(np.abs(etap - eta_p)) < 1e-8
        assert np.max(np.abs(etapp - (-(eta - (1 + 2j))))) < 1e-12

    def test_trig_curve_termwise_derivatives(self):
        rng = np.random.default_rng(7)
        coeffs = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        cur = fb.trig_curve(coeffs, k_min=-2)
        t = np.linspace(0, TWO_PI, 13)
        eta, etap, etapp = cur.evaluate(t)
        h = 1e-6
        fd = (cur.evaluate(t + h)[0] - cur.evaluate(t - h)[0]) / (2 * h)
        assert np.max(np.abs(etap - fd)) < 1e-7
        h2 = 1e-4
        fd2 = (cur.evaluate(t + h2)[0] - 2 * eta + cur.evaluate(t - h2)[0]) / h2**2
        assert np.max(np.abs(etapp - fd2)) < 1e-4

    def test_polygon_traces_vertices(self):
        verts = [1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]
        cur = fb.polygon(verts, grading=3)
        corners = np.array(cur.corners)
        eta, _, _ = cur.evaluate(corners)
        assert np.max(np.abs(eta - np.array(verts))) < 1e-14
