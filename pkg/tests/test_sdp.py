"""Interior point solver tests against analytically solvable instances.

The main oracle here is a planted-solution generator: it builds a problem
around a hand-constructed primal-dual pair with zero duality gap, so the
optimal value is known exactly before the solver runs."""

import numpy as np
import pytest

from robustform.sdp import (SdpProblem, SdpStatus, residuals, smat, solve,
                            svec, svec_dim)


def sym(rng, n, scale=1.0):
    M = rng.normal(size=(n, n))
    return scale * (M + M.T) / 2.0


def planted_problem(seed, sizes=(5, 4), m=6, rank_split=None):
    """Problem with a known optimal value.

    For each block a complementary pair S* = Q1 D1 Q1', Z* = Q2 D2 Q2' is
    drawn with [Q1 Q2] orthogonal, so S* Z* = 0 and both are PSD.  The
    constant terms are back-solved from a drawn y*, and the objective from
    Z* via the stationarity condition, which makes (y*, S*) and Z* a primal
    dual pair with zero gap.  Returns (problem, optimal value)."""
    rng = np.random.default_rng(seed)
    prob = SdpProblem()
    idx = [prob.add_var() for _ in range(m)]
    y_star = rng.normal(size=m)
    b = np.zeros(m)
    for bi, n in enumerate(sizes):
        split = rank_split[bi] if rank_split else n // 2 + 1
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        d1 = rng.uniform(0.5, 2.0, size=split)
        d2 = rng.uniform(0.5, 2.0, size=n - split)
        S_star = Q[:, :split] @ np.diag(d1) @ Q[:, :split].T
        Z_star = Q[:, split:] @ np.diag(d2) @ Q[:, split:].T
        F = [sym(rng, n) for _ in range(m)]
        F0 = S_star - sum(y_star[i] * F[i] for i in range(m))
        prob.add_lmi(F0, {idx[i]: F[i] for i in range(m)})
        for i in range(m):
            b[i] -= float(np.sum(F[i] * Z_star))
    prob.set_objective({idx[i]: b[i] for i in range(m)})
    return prob, float(b @ y_star)


class TestSvec:

    @pytest.mark.parametrize("n", [1, 2, 5, 9])
    def test_roundtrip(self, n):
        rng = np.random.default_rng(n)
        X = sym(rng, n)
        assert np.allclose(smat(svec(X), n), X, atol=1e-14)

    def test_inner_product(self):
        rng = np.random.default_rng(0)
        X, Y = sym(rng, 6), sym(rng, 6)
        assert svec(X) @ svec(Y) == pytest.approx(np.sum(X * Y), rel=1e-13)

    def test_dim(self):
        assert [svec_dim(n) for n in (1, 2, 3, 10)] == [1, 3, 6, 55]


class TestAnalytic:

    def test_min_eigenvalue_of_diagonal(self):
        # max c with diag(2, 3) - c I PSD; the answer is the smallest entry.
        prob = SdpProblem()
        c = prob.add_var("c", obj=1.0)
        prob.add_lmi(np.diag([2.0, 3.0]), {c: -np.eye(2)})
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(2.0, abs=1e-6)

    def test_one_by_one_blocks(self):
        # max y with 3 - y >= 0 as a 1x1 LMI.
        prob = SdpProblem()
        yv = prob.add_var(obj=1.0)
        prob.add_lmi(np.array([[3.0]]), {yv: np.array([[-1.0]])})
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(3.0, abs=1e-7)

    def test_correlation_corner(self):
        # max y with [[1, y], [y, 1]] PSD; optimum at y = 1.
        prob = SdpProblem()
        yv = prob.add_var(obj=1.0)
        off = np.array([[0.0, 1.0], [1.0, 0.0]])
        prob.add_lmi(np.eye(2), {yv: off})
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(1.0, abs=1e-6)

    def test_equality_constrained_split(self):
        # max y1 + y2 with y1 + y2 = 1 and both nonnegative: value 1.
        prob = SdpProblem()
        y1 = prob.add_var(obj=1.0)
        y2 = prob.add_var(obj=1.0)
        prob.add_lmi(np.zeros((1, 1)), {y1: np.eye(1)})
        prob.add_lmi(np.zeros((1, 1)), {y2: np.eye(1)})
        prob.add_eq({y1: 1.0, y2: 1.0}, 1.0)
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(1.0, abs=1e-6)
        assert sol.eq_residual < 1e-7

    def test_largest_eigenvalue_via_trace_one(self):
        # max <C, X> over PSD X with trace X = 1 is the top eigenvalue of C.
        rng = np.random.default_rng(11)
        C = sym(rng, 5, scale=2.0)
        prob = SdpProblem()
        X = prob.add_psd_var(5, "X")
        prob.set_objective(X.inner_coeffs(C))
        prob.add_eq(X.inner_coeffs(np.eye(5)), 1.0)
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        target = float(np.linalg.eigvalsh(C)[-1])
        assert sol.objective_value == pytest.approx(target, abs=1e-6)
        Xval = X.value(sol.y)
        assert np.trace(Xval) == pytest.approx(1.0, abs=1e-6)
        assert np.linalg.eigvalsh(Xval)[0] > -1e-8


class TestPlanted:

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_recovers_known_optimum(self, seed):
        prob, opt = planted_problem(seed)
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(opt, abs=2e-6)
        assert min(sol.min_eigenvalues) > -1e-6
        assert sol.duality_gap < 1e-5

    def test_single_block(self):
        prob, opt = planted_problem(7, sizes=(6,), m=4)
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(opt, abs=2e-6)

    def test_chunking_invariant(self):
        prob, opt = planted_problem(5)
        a = solve(prob, chunk=2)
        bsol = solve(prob, chunk=512)
        assert a.status is SdpStatus.OPTIMAL
        assert bsol.status is SdpStatus.OPTIMAL
        assert a.objective_value == pytest.approx(bsol.objective_value,
                                                  abs=1e-7)

    def test_scaling_equivariance(self):
        # Multiplying every data matrix and the objective by 10 scales the
        # optimal value by 10 without changing the feasible set of y.
        prob1, opt = planted_problem(9, sizes=(4,), m=3)
        prob2 = SdpProblem()
        idx = [prob2.add_var() for _ in range(3)]
        blk = prob1.lmis[0]
        prob2.add_lmi(10.0 * blk.const,
                      {i: 10.0 * blk.coeff_matrix(i) for i in blk.cols})
        prob2.set_objective({i: 10.0 * c
                             for i, c in prob1.objective.items()})
        s1 = solve(prob1)
        s2 = solve(prob2)
        assert s2.objective_value == pytest.approx(10.0 * s1.objective_value,
                                                   rel=1e-5)

    def test_tighter_tol_smaller_gap(self):
        prob, _ = planted_problem(2)
        loose = solve(prob, tol=1e-4)
        tight = solve(prob, tol=1e-10)
        assert tight.status is SdpStatus.OPTIMAL
        assert tight.duality_gap <= loose.duality_gap + 1e-12


class TestDegenerate:

    def test_infeasible_pair(self):
        # y >= 0 and -1 - y >= 0 cannot both hold.
        prob = SdpProblem()
        yv = prob.add_var(obj=0.0)
        prob.add_lmi(np.zeros((1, 1)), {yv: np.eye(1)})
        prob.add_lmi(np.array([[-1.0]]), {yv: -np.eye(1)})
        sol = solve(prob)
        assert sol.status is SdpStatus.INFEASIBLE

    def test_unbounded_ray(self):
        # max y with y >= 0 only: no upper bound, reported as infeasible
        # or unbounded by dual divergence.
        prob = SdpProblem()
        yv = prob.add_var(obj=1.0)
        prob.add_lmi(np.zeros((1, 1)), {yv: np.eye(1)})
        sol = solve(prob)
        assert sol.status is SdpStatus.INFEASIBLE

    def test_presolve_dangling_objective_var(self):
        prob = SdpProblem()
        prob.add_var("free", obj=1.0)
        c = prob.add_var("c", obj=1.0)
        prob.add_lmi(np.diag([2.0]), {c: -np.eye(1)})
        sol = solve(prob)
        assert sol.status is SdpStatus.INFEASIBLE
        assert "unbounded" in sol.message

    def test_presolve_dangling_unused_var(self):
        # A variable in no constraint with no objective weight is harmless.
        prob = SdpProblem()
        prob.add_var("unused")
        c = prob.add_var("c", obj=1.0)
        prob.add_lmi(np.diag([2.0, 5.0]), {c: -np.eye(2)})
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(2.0, abs=1e-6)
        assert sol.y[0] == pytest.approx(0.0, abs=1e-6)


class TestValidationAndResiduals:

    def test_rejects_asymmetric_const(self):
        prob = SdpProblem()
        prob.add_var()
        with pytest.raises(ValueError):
            prob.add_lmi(np.array([[0.0, 1.0], [0.0, 0.0]]), {})

    def test_rejects_wrong_shape_coeff(self):
        prob = SdpProblem()
        v = prob.add_var()
        with pytest.raises(ValueError):
            prob.add_lmi(np.eye(2), {v: np.eye(3)})

    def test_rejects_unknown_index(self):
        prob = SdpProblem()
        prob.add_var()
        with pytest.raises(ValueError):
            prob.add_lmi(np.eye(2), {5: np.eye(2)})
        with pytest.raises(ValueError):
            prob.add_eq({5: 1.0}, 0.0)

    def test_residuals_report(self):
        prob = SdpProblem()
        c = prob.add_var("c", obj=1.0)
        prob.add_lmi(np.diag([2.0, 3.0]), {c: -np.eye(2)})
        prob.add_eq({c: 2.0}, 1.0)
        rep = residuals(prob, np.array([1.0]))
        assert rep["min_eigenvalues"][0] == pytest.approx(1.0, abs=1e-12)
        assert rep["eq_residual"] == pytest.approx(1.0, abs=1e-12)
        assert rep["objective"] == pytest.approx(1.0, abs=1e-12)

    def test_matrix_var_inner_coeffs(self):
        prob = SdpProblem()
        X = prob.add_psd_var(3, "X")
        rng = np.random.default_rng(4)
        A = sym(rng, 3)
        coeffs = X.inner_coeffs(A)
        y = np.zeros(prob.n_vars)
        M = sym(rng, 3)
        y[X.indices] = svec(M)
        lin = sum(cf * y[i] for i, cf in coeffs.items())
        assert lin == pytest.approx(np.sum(A * M), rel=1e-12)
