"""Polynomial and matrix-polynomial algebra."""

import numpy as np
import pytest

from robustform.polyalg import (
    COEFF_CLEANUP,
    MatrixPolynomial,
    Polynomial,
    matpoly_eval,
    matpoly_mul,
    mono_sort_key,
    poly_arith,
    poly_eval,
)


def quartic_example() -> Polynomial:
    # 7t^4 + 2t^3 + 4t^2 + 6t + 9
    return Polynomial(1, {(4,): 7, (3,): 2, (2,): 4, (1,): 6, (0,): 9})


class TestPolynomial:
    def test_eval_at_one(self):
        f = quartic_example()
        assert poly_eval(f, [1.0]) == 28.0
        assert f([1.0]) == 28.0

    def test_eval_at_integer_points_exact(self):
        f = quartic_example()
        # exact for integer inputs in float range
        assert f([2.0]) == 7 * 16 + 2 * 8 + 4 * 4 + 12 + 9
        assert f([-1.0]) == 7 - 2 + 4 - 6 + 9

    def test_subtraction_drops_leading_terms(self):
        f = quartic_example()
        g = Polynomial(1, {(4,): 7, (3,): 2})
        h = f - g
        assert h.terms == {(2,): 4.0, (1,): 6.0, (0,): 9.0}
        assert h.degree == 2

    def test_zero_padding_never_stored(self):
        p = Polynomial(2, {(0, 0): 0.0, (1, 0): 1.0})
        assert (0, 0) not in p.terms
        q = p - Polynomial.variable(2, 0)
        assert q.is_zero
        assert q.terms == {}
        assert q.degree == 0

    def test_cleanup_threshold(self):
        p = Polynomial(1, {(1,): COEFF_CLEANUP / 10})
        assert p.is_zero
        q = Polynomial(1, {(1,): 1.0}) - Polynomial(1, {(1,): 1.0 - 1e-16})
        assert q.is_zero

    def test_arith_ring_axioms_random(self):
        # seeded property check: (a+b)(c) == a(c)+b(c), (a*b)(c) == a(c)*b(c)
        rng = np.random.default_rng(7)
        for _ in range(50):
            r = int(rng.integers(1, 4))
            a = _random_poly(rng, r)
            b = _random_poly(rng, r)
            theta = rng.uniform(-2, 2, size=r)
            fa, fb = poly_eval(a, theta), poly_eval(b, theta)
            assert poly_eval(a + b, theta) == pytest.approx(fa + fb, abs=1e-9)
            assert poly_eval(a - b, theta) == pytest.approx(fa - fb, abs=1e-9)
            assert poly_eval(a * b, theta) == pytest.approx(fa * fb, rel=1e-9, abs=1e-9)

    def test_mul_commutes_and_distributes(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            a = _random_poly(rng, 2)
            b = _random_poly(rng, 2)
            c = _random_poly(rng, 2)
            ab, ba = a * b, b * a
            assert set(ab.terms) == set(ba.terms)
            for e, v in ab.terms.items():
                assert v == pytest.approx(ba.terms[e], rel=1e-12, abs=1e-12)
            lhs = a * (b + c)
            rhs = a * b + a * c
            for e in set(lhs.terms) | set(rhs.terms):
                assert lhs.terms.get(e, 0.0) == pytest.approx(
                    rhs.terms.get(e, 0.0), abs=1e-10)

    def test_mismatched_r_raises(self):
        with pytest.raises(ValueError):
            poly_arith(Polynomial.zero(1), Polynomial.zero(2), "add")

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            Polynomial(1, {(-1,): 1.0})

    def test_records_roundtrip(self):
        f = quartic_example()
        g = Polynomial.from_records(1, f.to_records())
        assert f == g
        # order in the serialization is graded descending
        exps = [tuple(rec["exponents"]) for rec in f.to_records()]
        assert exps == [(4,), (3,), (2,), (1,), (0,)]

    def test_mono_sort_key_order(self):
        monos = [(0, 0), (1, 1), (2, 0), (0, 2), (1, 0), (0, 1)]
        ordered = sorted(monos, key=mono_sort_key)
        assert ordered == [(2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0)]

    def test_batch_eval_matches_scalar(self):
        rng = np.random.default_rng(3)
        f = _random_poly(rng, 3)
        pts = rng.uniform(-1, 1, size=(40, 3))
        batch = f.eval_batch(pts)
        for i in range(40):
            assert batch[i] == pytest.approx(poly_eval(f, pts[i]), abs=1e-12)


class TestMatrixPolynomial:
    def test_eval_homomorphism(self):
        # evaluation commutes with matrix multiply: (A B)(theta) == A(theta) B(theta)
        rng = np.random.default_rng(5)
        for _ in range(25):
            A = _random_matpoly(rng, 3, 2, r=2)
            B = _random_matpoly(rng, 2, 4, r=2)
            theta = rng.uniform(-1.5, 1.5, size=2)
            lhs = matpoly_eval(matpoly_mul(A, B), theta)
            rhs = matpoly_eval(A, theta) @ matpoly_eval(B, theta)
            np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_add_transpose_eval(self):
        rng = np.random.default_rng(9)
        A = _random_matpoly(rng, 3, 3, r=1)
        theta = [0.37]
        np.testing.assert_allclose(
            matpoly_eval(A + A.T, theta),
            matpoly_eval(A, theta) + matpoly_eval(A, theta).T,
            atol=1e-12)

    def test_symmetry_flag(self):
        A = MatrixPolynomial.zeros(2, 2, 1)
        p = Polynomial(1, {(1,): 2.0})
        A.set_entry(0, 1, p)
        assert not A.is_symmetric()
        A.set_entry(1, 0, p)
        assert A.is_symmetric()

    def test_constant_roundtrip(self):
        M = np.arange(6, dtype=float).reshape(2, 3)
        A = MatrixPolynomial.constant(M, r=2)
        np.testing.assert_array_equal(matpoly_eval(A, [0.3, -0.7]), M)
        assert A.deg() == 0

    def test_coefficient_matrices_roundtrip(self):
        rng = np.random.default_rng(13)
        A = _random_matpoly(rng, 2, 2, r=2)
        B = MatrixPolynomial.from_coefficient_matrices(
            2, 2, 2, A.coefficient_matrices())
        for i in range(2):
            for j in range(2):
                assert A.entry(i, j) == B.entry(i, j)

    def test_eval_batch_matches_pointwise(self):
        rng = np.random.default_rng(17)
        A = _random_matpoly(rng, 3, 3, r=2)
        pts = rng.uniform(-1, 1, size=(25, 2))
        batch = A.eval_batch(pts)
        for i in range(25):
            np.testing.assert_allclose(batch[i], matpoly_eval(A, pts[i]),
                                       atol=1e-12)

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValueError):
            matpoly_mul(MatrixPolynomial.zeros(2, 3, 1),
                        MatrixPolynomial.zeros(2, 3, 1))


def _random_poly(rng, r, max_deg=3, n_terms=5):
    terms = {}
    for _ in range(n_terms):
        e = tuple(int(x) for x in rng.integers(0, max_deg + 1, size=r))
        terms[e] = float(rng.uniform(-3, 3))
    return Polynomial(r, terms)


def _random_matpoly(rng, rows, cols, r):
    return MatrixPolynomial(
        rows, cols, r,
        [_random_poly(rng, r, max_deg=2, n_terms=3)
         for _ in range(rows * cols)])
