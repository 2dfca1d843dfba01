"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report.  Tolerances are fixed here and nowhere else.
"""

import math
import time

import numpy as np
import pytest

import fastbie as fb
from fastbie import dense
from fastbie import fastsum as fs
from fastbie.gmres import GmresConfig
from fastbie.presets import (
    TEST_FUNCTIONS,
    default_theta,
    example1_bounded,
    example1_unbounded,
    example2_bounded,
    square_with_grading,
)


def report(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {num:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def solve_example1(domain, name, n, gmres_config=None):
    theta = default_theta(domain)
    test = TEST_FUNCTIONS[name]
    disc = fb.discretize(domain, n)
    aux = fb.build_auxiliary(disc, theta)
    gamma = test.gamma(disc.eta, aux.a)
    problem = fb.build_problem(domain, n, theta, gamma, gmres_config=gmres_config)
    solution = fb.solve_gnk(problem)
    err_mu = float(np.max(np.abs(solution.mu - test.exact_mu(disc.eta, aux.a))))
    err_h = float(np.max(np.abs(solution.h)))
    return solution, err_mu, err_h


class TestCriterion1ExactConvergence:
    def test_bounded(self):
        t0 = time.perf_counter()
        _, err_mu, err_h = solve_example1(example1_bounded(3), "example1-bounded", 256)
        elapsed = time.perf_counter() - t0
        ok = err_mu <= 1e-10 and err_h <= 1e-10 and elapsed < 5.0
        report(1, "exact solution, bounded 3-circle",
               ok, f"err_mu={err_mu:.2e} err_h={err_h:.2e} time={elapsed:.2f}s")

    def test_unbounded(self):
        t0 = time.perf_counter()
        _, err_mu, err_h = solve_example1(example1_unbounded(3), "example1-unbounded", 256)
        elapsed = time.perf_counter() - t0
        ok = err_mu <= 1e-10 and err_h <= 1e-10 and elapsed < 5.0
        report(1, "exact solution, unbounded 3-circle",
               ok, f"err_mu={err_mu:.2e} err_h={err_h:.2e} time={elapsed:.2f}s")


class TestCriterion2AdjointOrthogonality:
    @pytest.mark.parametrize("name,domfn", [("example1-bounded", example1_bounded),
                                            ("example1-unbounded", example1_unbounded)])
    def test_orthogonality(self, name, domfn):
        domain = domfn(3)
        theta = default_theta(domain)
        n = 256
        disc = fb.discretize(domain, n)
        aux = fb.build_auxiliary(disc, theta)
        problem = fb.build_adjoint_problem(domain, n, theta, np.ones(disc.total_nodes))
        solution = fb.solve_adjoint(problem)
        gamma_tilde = TEST_FUNCTIONS[name].gamma(disc.eta, aux.a)
        e_n = fb.adjoint_orthogonality(disc, gamma_tilde, solution.phi)
        report(2, f"adjoint orthogonality, {name}", e_n <= 1e-10, f"E_n={e_n:.2e}")


class TestCriterion3DenseOracleEquivalence:
    def test_all_fast_paths_match_dense(self):
        domain = example1_bounded(3)  # m = 2
        n = 64
        theta = fb.PiecewiseConstant((math.pi / 2, 0.4, -0.9))
        disc = fb.discretize(domain, n)
        aux = fb.build_auxiliary(disc, theta)
        test = TEST_FUNCTIONS["example1-bounded"]
        gamma = test.gamma(disc.eta, aux.a)
        problem = fb.build_problem(domain, n, theta, gamma)
        adj = fb.build_adjoint_problem(domain, n, theta, np.ones(disc.total_nodes))

        rng = np.random.default_rng(0)
        x = rng.standard_normal(disc.total_nodes)
        sys_mat = dense.system_matrix(disc, aux)
        m_mat = dense.m_operator_matrix(disc, aux)
        adj_mat = dense.adjoint_matrix(disc, aux)

        checks = {}
        checks["f_B"] = np.max(np.abs(fb.apply_system(problem, x) - sys_mat @ x))
        checks["g_B"] = np.max(np.abs(fb.apply_adjoint_system(adj, x) - adj_mat @ x))
        checks["y"] = np.max(np.abs(fb.assemble_rhs(problem) - m_mat @ gamma))

        solution = fb.solve_gnk(problem)
        h_dense = 0.5 * (m_mat @ solution.mu - sys_mat @ gamma)
        checks["h"] = np.max(np.abs(solution.h - h_dense))

        from fastbie.conjugation import (CirculantSymbol, apply_conjugation,
                                         dense_conjugation_matrix, wittich_matrix)
        sym = CirculantSymbol(n)
        lmat = dense_conjugation_matrix(n)
        lhat = np.kron(np.eye(3), lmat)
        checks["L"] = np.max(np.abs(apply_conjugation(sym, x) - lhat @ x))

        targets = np.array([0.05 + 0.1j, -0.1 - 0.07j, 0.2 + 0.0j])
        fast_c = fb.cauchy_eval(disc, test.f(disc.eta), targets, plan=problem.plan)
        num = fs.direct_f_matvec(disc.eta, test.f(disc.eta) * disc.etap, targets)
        den = fs.direct_f_matvec(disc.eta, disc.etap.copy(), targets)
        checks["cauchy"] = np.max(np.abs(fast_c - num / den))

        # Wittich identity, entrywise on one component block
        from fastbie import kernels
        k_w = wittich_matrix(n)
        w = disc.weight
        worst = 0.0
        for p in range(n):
            for q in range(n):
                if p == q:
                    continue
                lhs = -k_w[p, q] + w * kernels.kernel_m1(disc, aux, p, q)
                rhs = lmat[p, q] + w * kernels.kernel_m(disc, aux, p, q)
                worst = max(worst, abs(lhs - rhs))
        checks["wittich"] = worst

        bad = {k: v for k, v in checks.items() if v > 1e-12}
        detail = " ".join(f"{k}={v:.1e}" for k, v in checks.items())
        report(3, "dense-oracle equivalence at n=64, m=2", not bad, detail)


class TestCriterion4AccuracyClasses:
    def test_all_iprec_classes_at_8192(self):
        rng = np.random.default_rng(2024)
        pts = rng.random(8192) + 1j * rng.random(8192)
        x = rng.standard_normal(8192) + 1j * rng.standard_normal(8192)
        ref = fs.direct_e_matvec(pts, x)
        scale = np.max(np.abs(ref))
        results = []
        ok = True
        for iprec in (1, 2, 3, 4, 5):
            plan = fs.build_plan(pts, iprec)
            err = float(np.max(np.abs(fs.e_matvec(plan, x) - ref)) / scale)
            tol = fs.TOLERANCES[iprec] if iprec < 5 else 5e-15
            ok &= err <= tol
            results.append(f"iprec{iprec}:{err:.1e}<={tol:.0e}")
        report(4, "summation accuracy classes at 8192 points", ok, " ".join(results))


class TestCriterion5ComplexityScaling:
    def test_fast_vs_direct_scaling(self):
        rng = np.random.default_rng(99)
        times_fast = {}
        times_direct = {}
        for n in (2**15, 2**16):
            pts = rng.random(n) + 1j * rng.random(n)
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            plan = fs.build_plan(pts, 4)
            fs.e_matvec(plan, x)  # warm-up discarded
            runs = []
            for _ in range(5):
                t0 = time.perf_counter()
                fs.e_matvec(plan, x)
                runs.append(time.perf_counter() - t0)
            times_fast[n] = float(np.mean(runs))
            t0 = time.perf_counter()
            fs.direct_e_matvec(pts, x)
            times_direct[n] = time.perf_counter() - t0
        fast_ratio = times_fast[2**16] / times_fast[2**15]
        direct_ratio = times_direct[2**16] / times_direct[2**15]
        ok = fast_ratio <= 2.8 and direct_ratio >= 3.5
        report(5, "complexity scaling 2^15 -> 2^16",
               ok, f"fast x{fast_ratio:.2f} (<=2.8), direct x{direct_ratio:.2f} (>=3.5), "
                   f"fast(2^16)={times_fast[2**16]:.2f}s direct(2^16)={times_direct[2**16]:.1f}s")


class TestCriterion6CloseBoundaries:
    def test_subtraction_superiority_and_trends(self):
        test = TEST_FUNCTIONS["example1-bounded"]
        n = 512
        theta_const = fb.PiecewiseConstant.constant(math.pi / 2, 5)

        errs = {}
        iters = {}
        for eps in (1e-1, 1e-2, 1e-3):
            domain = example2_bounded(eps)
            disc = fb.discretize(domain, n)
            aux = fb.build_auxiliary(disc, theta_const)
            gamma = test.gamma(disc.eta, aux.a)
            exact = test.exact_mu(disc.eta, aux.a)
            problem = fb.build_problem(domain, n, theta_const, gamma)
            sol = fb.solve_gnk(problem)
            errs[eps] = float(np.max(np.abs(sol.mu - exact)))
            iters[eps] = sol.report.inner_iterations

        domain = example2_bounded(1e-2)
        disc = fb.discretize(domain, n)
        aux = fb.build_auxiliary(disc, theta_const)
        gamma = test.gamma(disc.eta, aux.a)
        exact = test.exact_mu(disc.eta, aux.a)
        baseline = fb.build_problem(domain, n, theta_const, gamma, subtract=False)
        sol_u = fb.solve_gnk(baseline)
        err_unsub = float(np.max(np.abs(sol_u.mu - exact)))

        ok_err = errs[1e-2] <= 1e-6 and errs[1e-2] < err_unsub
        ok_iters = iters[1e-1] <= iters[1e-2] + 1 and iters[1e-2] <= iters[1e-3] + 1
        report(6, "close boundaries: subtracted FBIE beats baseline",
               ok_err, f"subtracted={errs[1e-2]:.2e} unsubtracted={err_unsub:.2e}")
        report(6, "close boundaries: iteration growth as eps shrinks",
               ok_iters, f"iters={iters}")

    @pytest.mark.parametrize("theta", [
        ("constant", fb.PiecewiseConstant.constant(math.pi / 2, 5)),
        ("nonconstant", fb.PiecewiseConstant((math.pi / 2, 0.0, math.pi / 2, 0.0, math.pi / 2))),
    ], ids=["const", "nonconst"])
    def test_adjoint_close_boundaries(self, theta):
        label, theta_pc = theta
        test = TEST_FUNCTIONS["example1-bounded"]
        n = 512
        domain = example2_bounded(1e-2)
        disc = fb.discretize(domain, n)
        aux = fb.build_auxiliary(disc, theta_pc)
        problem = fb.build_adjoint_problem(domain, n, theta_pc, np.ones(disc.total_nodes))
        sol = fb.solve_adjoint(problem)
        gamma_tilde = test.gamma(disc.eta, aux.a)
        e_n = fb.adjoint_orthogonality(disc, gamma_tilde, sol.phi)
        report(6, f"close boundaries: adjoint E_n with {label} theta",
               e_n <= 1e-6, f"E_n={e_n:.2e}")


class TestCriterion7CornerGrading:
    def test_square_convergence(self):
        domain = square_with_grading(3)
        errs = []
        for n in (64, 128, 256, 512):
            _, err_mu, _ = solve_example1(domain, "example1-bounded", n)
            errs.append(err_mu)
        monotone = all(b < a for a, b in zip(errs, errs[1:]))
        ok = monotone and errs[-1] <= 1e-6
        report(7, "graded square convergence",
               ok, "errs=" + " ".join(f"{e:.2e}" for e in errs))


class TestCriterion8CauchyEvaluator:
    def test_near_boundary_and_constant(self):
        domain = fb.bounded_domain([fb.circle(0, 1, "ccw")], alpha=0.0)
        disc = fb.discretize(domain, 128)
        out = fb.cauchy_eval(disc, disc.eta.copy(), np.array([0.99 + 0j]))
        err = abs(out[0] - 0.99)
        ones = fb.cauchy_eval(disc, np.ones(disc.total_nodes, complex),
                              np.array([0.99 + 0j, 0.3 - 0.4j, 0.0 + 0.5j]))
        exact_one = bool(np.all(ones == 1.0 + 0.0j))
        ok = err <= 1e-10 and exact_one
        report(8, "near-boundary Cauchy evaluation",
               ok, f"err(|z|=0.99)={err:.2e} f=1 exact={exact_one}")


class TestCriterion9GmresBehavior:
    @pytest.mark.parametrize("name,domfn", [("example1-bounded", example1_bounded),
                                            ("example1-unbounded", example1_unbounded)])
    def test_history_and_iteration_budget(self, name, domfn):
        config = GmresConfig(restart=10, tol=1e-12, maxit=10)
        solution, err_mu, _ = solve_example1(domfn(3), name, 256, gmres_config=config)
        rep = solution.report
        inner = rep.residual_history[1:]
        cycles = [inner[i:i + 10] for i in range(0, len(inner), 10)]
        monotone = all(
            all(b <= a * (1 + 1e-12) for a, b in zip(cyc, cyc[1:])) for cyc in cycles
        )
        ok = rep.converged and monotone and rep.inner_iterations <= 30
        report(9, f"GMRES behavior, {name}",
               ok, f"inner={rep.inner_iterations} monotone={monotone} err_mu={err_mu:.1e}")
