import math

import numpy as np
import pytest

import fastbie as fb
from fastbie import kernels


@pytest.fixture(scope="module")
def disc_circle():
    domain = fb.bounded_domain([fb.circle(0.0, 1.0, "ccw")], alpha=0.0)
    return fb.discretize(domain, 32)


@pytest.fixture(scope="module")
def aux_circle(disc_circle):
    # theta = pi/2 makes the phase factor 1, so A = eta exactly
    return fb.build_auxiliary(disc_circle, fb.PiecewiseConstant((math.pi / 2,)))


@pytest.fixture(scope="module")
def smooth_three():
    domain = fb.bounded_domain(
        [fb.circle(0, 1, "ccw"), fb.ellipse(0.45, 0.25, 0.12, "cw"), fb.circle(-0.45, 0.2, "cw")],
        alpha=0.0,
    )
    disc = fb.discretize(domain, 128)
    theta = fb.PiecewiseConstant((math.pi / 2, 0.0, 1.0))
    return disc, fb.build_auxiliary(disc, theta)


class TestAuxiliary:
    def test_bounded_disc_theta_half_pi(self, disc_circle, aux_circle):
        assert np.max(np.abs(aux_circle.a - disc_circle.eta)) < 1e-14
        assert np.max(np.abs(aux_circle.ap - disc_circle.etap)) < 1e-14

    def test_unbounded_constant_modulus(self):
        domain = fb.unbounded_domain([fb.circle(0, 1, "cw"), fb.circle(3, 1, "cw")])
        disc = fb.discretize(domain, 16)
        aux = fb.build_auxiliary(disc, fb.PiecewiseConstant((0.0, 0.0)))
        assert np.max(np.abs(aux.a - 1j)) < 1e-15  # exp(i pi/2)
        assert np.all(aux.ap == 0)

    def test_theta_length_checked(self, disc_circle):
        with pytest.raises(ValueError):
            fb.build_auxiliary(disc_circle, fb.PiecewiseConstant((0.0, 0.0)))


class TestCircleClosedForms:
    """On the unit circle with A = eta the kernels collapse to constants:
    N(s,t) = -1/(2 pi), M(s,t) = -cot((s-t)/2)/(2 pi), M1 = 0, N_k = 1/(2 pi)."""

    def test_kernel_n_offdiag_constant(self, disc_circle, aux_circle):
        rng = np.random.default_rng(3)
        for _ in range(20):
            i, j = rng.integers(0, disc_circle.total_nodes, 2)
            if i == j:
                continue
            val = kernels.kernel_n(disc_circle, aux_circle, int(i), int(j))
            assert val == pytest.approx(-1.0 / (2 * math.pi), abs=1e-14)

    def test_kernel_n_diagonal(self, disc_circle, aux_circle):
        val = kernels.kernel_n(disc_circle, aux_circle, 5, 5)
        assert val == pytest.approx(-1.0 / (2 * math.pi), abs=1e-14)

    def test_kernel_m_cotangent(self, disc_circle, aux_circle):
        t = disc_circle.t
        for i, j in ((0, 3), (7, 20), (31, 1)):
            expect = -math.cos((t[i] - t[j]) / 2) / math.sin((t[i] - t[j]) / 2) / (2 * math.pi)
            assert kernels.kernel_m(disc_circle, aux_circle, i, j) == pytest.approx(expect, abs=1e-13)

    def test_m1_vanishes_including_diagonal(self, disc_circle, aux_circle):
        assert kernels.kernel_m1(disc_circle, aux_circle, 4, 4) == pytest.approx(0.0, abs=1e-14)
        assert kernels.kernel_m1(disc_circle, aux_circle, 4, 9) == pytest.approx(0.0, abs=1e-13)

    def test_kernel_nk_constant(self, disc_circle):
        rng = np.random.default_rng(5)
        for _ in range(20):
            i, j = rng.integers(0, disc_circle.total_nodes, 2)
            if i == j:
                continue
            assert kernels.kernel_nk(disc_circle, int(i), int(j)) == pytest.approx(
                1.0 / (2 * math.pi), abs=1e-14)

    def test_ng_diagonal_zero(self, disc_circle, aux_circle):
        assert kernels.kernel_ng(disc_circle, aux_circle, 3, 3) == pytest.approx(0.0, abs=1e-15)


class TestEigenvalueRows:
    def test_n_row_sums_reach_minus_one(self, smooth_three):
        # discrete rows of the trapezoidal rule reproduce the eigenvalue -1
        disc, aux = smooth_three
        w = disc.weight
        rng = np.random.default_rng(11)
        for i in rng.integers(0, disc.total_nodes, 6):
            total = sum(kernels.kernel_n(disc, aux, int(i), j) for j in range(disc.total_nodes))
            assert abs(w * total + 1.0) < 1e-12

    def test_nk_rows_on_circle_match_closed_form(self, disc_circle):
        # all off-diagonal entries equal 1/(2 pi), so the row sum is exact
        n = disc_circle.total_nodes
        w = disc_circle.weight
        i = 7
        total = sum(kernels.kernel_nk(disc_circle, i, j) for j in range(n) if j != i)
        assert w * total == pytest.approx((n - 1) / n, abs=1e-13)


class TestAdjointIdentities:
    def test_tilde_kernels_are_negated_transposes(self, smooth_three):
        disc, aux = smooth_three
        rng = np.random.default_rng(17)
        for _ in range(50):
            i, j = rng.integers(0, disc.total_nodes, 2)
            if i == j:
                continue
            i, j = int(i), int(j)
            nt = kernels.kernel_n_tilde(disc, aux, i, j)
            mt = kernels.kernel_m_tilde(disc, aux, i, j)
            assert abs(nt + kernels.kernel_n(disc, aux, j, i)) < 1e-14
            assert abs(mt + kernels.kernel_m(disc, aux, j, i)) < 1e-14

    def test_adjoint_split(self, smooth_three):
        # N*(t_i, t_j) = N(t_j, t_i) = -N_k(t_i, t_j) + N_g(t_i, t_j)
        disc, aux = smooth_three
        rng = np.random.default_rng(23)
        for _ in range(50):
            i, j = rng.integers(0, disc.total_nodes, 2)
            if i == j:
                continue
            i, j = int(i), int(j)
            lhs = kernels.kernel_n(disc, aux, j, i)
            rhs = -kernels.kernel_nk(disc, i, j) + kernels.kernel_ng(disc, aux, i, j)
            assert abs(lhs - rhs) < 1e-13 * max(1.0, abs(lhs))


class TestInvariance:
    def test_same_component_theta_shift_invariance(self, smooth_three):
        disc, _ = smooth_three
        aux1 = fb.build_auxiliary(disc, fb.PiecewiseConstant((0.3, 0.3, 0.3)))
        aux2 = fb.build_auxiliary(disc, fb.PiecewiseConstant((0.3 + 0.9, 0.3 + 0.9, 0.3 + 0.9)))
        rng = np.random.default_rng(29)
        n = disc.n
        for _ in range(30):
            k = int(rng.integers(0, disc.num_curves))
            i, j = (int(v) + k * n for v in rng.integers(0, n, 2))
            if i == j:
                continue
            v1 = kernels.kernel_n(disc, aux1, i, j)
            v2 = kernels.kernel_n(disc, aux2, i, j)
            assert abs(v1 - v2) < 1e-13

    def test_evaluations_are_pure(self, smooth_three):
        disc, aux = smooth_three
        a = kernels.kernel_n(disc, aux, 3, 40)
        b = kernels.kernel_n(disc, aux, 3, 40)
        assert a == b


class TestGuards:
    def test_corner_diagonal_rejected(self):
        domain = fb.bounded_domain([fb.square(0, 1.0, grading=3)], alpha=0.0)
        disc = fb.discretize(domain, 16)  # corners on nodes 0, 4, 8, 12
        aux = fb.build_auxiliary(disc, fb.PiecewiseConstant((math.pi / 2,)))
        with pytest.raises(ValueError, match="corner"):
            kernels.kernel_n(disc, aux, 0, 0)
        with pytest.raises(ValueError, match="corner"):
            kernels.kernel_ng(disc, aux, 4, 4)

    def test_m_diagonal_rejected(self, disc_circle, aux_circle):
        with pytest.raises(ValueError):
            kernels.kernel_m(disc_circle, aux_circle, 2, 2)

    def test_nk_diagonal_rejected(self, disc_circle):
        with pytest.raises(ValueError):
            kernels.kernel_nk(disc_circle, 2, 2)
