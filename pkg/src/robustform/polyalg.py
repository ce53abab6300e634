"""Sparse multivariate polynomial and matrix-polynomial algebra.

Polynomials live over a parameter vector theta in R^r with float coefficients.
A polynomial is a dict mapping exponent tuples to coefficients:

    4*t1^2*t2 + 9  ->  {(2, 1): 4.0, (0, 0): 9.0}

Zero-coefficient terms are never stored; any coefficient whose magnitude drops
below COEFF_CLEANUP after an arithmetic operation is dropped, so equal
polynomials always have equal term dicts and == is reliable.

MatrixPolynomial is a dense rows-by-cols grid of Polynomial entries sharing one
parameter count r.  It exists to represent parameter-dependent adjacency and
Laplacian matrices and the matrix polynomials produced by Gram expansions, so
the operation set is deliberately small: add/sub/mul/transpose/scale,
evaluation at a point or a batch of points, and conversion to and from
per-monomial coefficient matrices (the representation every downstream
consumer actually wants).
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence

import numpy as np

# Exponent tuple: entry k is the power of theta_{k+1}.
ExponentVec = tuple[int, ...]

# Coefficients with |c| below this are dropped after every operation.
COEFF_CLEANUP = 1e-14


def mono_degree(e: ExponentVec) -> int:
    """Total degree of an exponent tuple."""
    return sum(e)


def mono_mul(a: ExponentVec, b: ExponentVec) -> ExponentVec:
    """Product of two monomials (exponent addition)."""
    return tuple(x + y for x, y in zip(a, b))


def mono_sort_key(e: ExponentVec):
    """Sort key giving graded-descending order, ties lexicographic with
    theta_1 > theta_2 > ..., so the constant monomial comes last.

    For r=1, d=2 this orders (2,), (1,), (0,), i.e. phi = (t^2, t, 1)."""
    return (-mono_degree(e), tuple(-x for x in e))


def mono_eval(e: ExponentVec, theta: Sequence[float]) -> float:
    v = 1.0
    for x, p in zip(theta, e):
        if p:
            v *= x ** p
    return v


class Polynomial:
    """Immutable-by-convention sparse polynomial in r parameters."""

    __slots__ = ("r", "terms")

    def __init__(self, r: int, terms: Mapping[ExponentVec, float] | None = None):
        if r < 0:
            raise ValueError(f"parameter count must be >= 0, got {r}")
        self.r = int(r)
        clean: dict[ExponentVec, float] = {}
        if terms:
            for e, c in terms.items():
                e = tuple(int(x) for x in e)
                if len(e) != r:
                    raise ValueError(f"exponent {e} has length {len(e)}, expected {r}")
                if any(x < 0 for x in e):
                    raise ValueError(f"negative exponent in {e}")
                c = float(c)
                if abs(c) > COEFF_CLEANUP:
                    clean[e] = clean.get(e, 0.0) + c
            # re-drop anything that cancelled during accumulation
            clean = {e: c for e, c in clean.items() if abs(c) > COEFF_CLEANUP}
        self.terms = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, r: int) -> "Polynomial":
        return cls(r, {})

    @classmethod
    def constant(cls, r: int, c: float) -> "Polynomial":
        return cls(r, {(0,) * r: float(c)})

    @classmethod
    def variable(cls, r: int, k: int) -> "Polynomial":
        """The polynomial theta_{k+1} (k is 0-based)."""
        if not 0 <= k < r:
            raise ValueError(f"variable index {k} out of range for r={r}")
        e = [0] * r
        e[k] = 1
        return cls(r, {tuple(e): 1.0})

    @classmethod
    def from_records(cls, r: int, records: Iterable[Mapping]) -> "Polynomial":
        """Build from serialized [{'exponents': [...], 'coeff': c}, ...]."""
        terms: dict[ExponentVec, float] = {}
        for rec in records:
            e = tuple(int(x) for x in rec["exponents"])
            terms[e] = terms.get(e, 0.0) + float(rec["coeff"])
        return cls(r, terms)

    def to_records(self) -> list[dict]:
        """Serialize as a list of {'exponents': [...], 'coeff': c} records,
        in graded-descending monomial order (deterministic)."""
        return [
            {"exponents": list(e), "coeff": self.terms[e]}
            for e in sorted(self.terms, key=mono_sort_key)
        ]

    # -- queries ------------------------------------------------------------

    @property
    def degree(self) -> int:
        """Total degree; 0 for the zero polynomial."""
        if not self.terms:
            return 0
        return max(mono_degree(e) for e in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, e: ExponentVec) -> float:
        return self.terms.get(tuple(e), 0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.r == other.r and self.terms == other.terms

    def __hash__(self):
        return hash((self.r, frozenset(self.terms.items())))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        return poly_arith(self, self._coerce(other), "add")

    __radd__ = __add__

    def __sub__(self, other) -> "Polynomial":
        return poly_arith(self, self._coerce(other), "sub")

    def __rsub__(self, other) -> "Polynomial":
        return poly_arith(self._coerce(other), self, "sub")

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        return poly_arith(self, other, "mul")

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, float)):
            return Polynomial.constant(self.r, float(other))
        raise TypeError(f"cannot combine Polynomial with {type(other)!r}")

    def scale(self, c: float) -> "Polynomial":
        return Polynomial(self.r, {e: v * c for e, v in self.terms.items()})

    # -- evaluation ---------------------------------------------------------

    def __call__(self, theta: Sequence[float]) -> float:
        return poly_eval(self, theta)

    def eval_batch(self, thetas: np.ndarray) -> np.ndarray:
        """Evaluate at a (m, r) batch of points, returning shape (m,)."""
        thetas = np.asarray(thetas, dtype=float)
        if thetas.ndim == 1:
            thetas = thetas.reshape(1, -1)
        if thetas.shape[1] != self.r:
            raise ValueError(f"batch has {thetas.shape[1]} columns, expected {self.r}")
        out = np.zeros(thetas.shape[0])
        for e, c in self.terms.items():
            term = np.full(thetas.shape[0], c)
            for k, p in enumerate(e):
                if p:
                    term *= thetas[:, k] ** p
            out += term
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return f"Polynomial(r={self.r}, 0)"
        parts = []
        for e in sorted(self.terms, key=mono_sort_key):
            c = self.terms[e]
            mono = "*".join(f"t{k+1}^{p}" if p > 1 else f"t{k+1}"
                            for k, p in enumerate(e) if p)
            parts.append(f"{c:g}" + (f"*{mono}" if mono else ""))
        return f"Polynomial(r={self.r}, {' + '.join(parts)})"


def poly_arith(a: Polynomial, b: Polynomial, kind: str) -> Polynomial:
    """Combine two polynomials: kind in {'add', 'sub', 'mul'}.

    Raises ValueError on mismatched parameter counts."""
    if a.r != b.r:
        raise ValueError(f"parameter count mismatch: {a.r} vs {b.r}")
    if kind == "add":
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms.get(e, 0.0) + c
    elif kind == "sub":
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms.get(e, 0.0) - c
    elif kind == "mul":
        terms = {}
        for ea, ca in a.terms.items():
            for eb, cb in b.terms.items():
                e = mono_mul(ea, eb)
                terms[e] = terms.get(e, 0.0) + ca * cb
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return Polynomial(a.r, terms)


def poly_eval(f: Polynomial, theta: Sequence[float]) -> float:
    """Direct monomial-by-monomial evaluation (exact for exactly
    representable inputs; no Horner rewriting)."""
    theta = tuple(float(t) for t in theta)
    if len(theta) != f.r:
        raise ValueError(f"point has length {len(theta)}, expected {f.r}")
    return math.fsum(c * mono_eval(e, theta) for e, c in f.terms.items())


class MatrixPolynomial:
    """Dense matrix with Polynomial entries, all sharing one parameter count."""

    __slots__ = ("rows", "cols", "r", "entries")

    def __init__(self, rows: int, cols: int, r: int,
                 entries: Sequence[Polynomial] | None = None):
        self.rows = int(rows)
        self.cols = int(cols)
        self.r = int(r)
        if entries is None:
            entries = [Polynomial.zero(r) for _ in range(rows * cols)]
        entries = list(entries)
        if len(entries) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
        for p in entries:
            if p.r != r:
                raise ValueError("entry parameter count mismatch")
        self.entries = entries

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int, r: int) -> "MatrixPolynomial":
        return cls(rows, cols, r)

    @classmethod
    def constant(cls, mat: np.ndarray, r: int) -> "MatrixPolynomial":
        mat = np.asarray(mat, dtype=float)
        ent = [Polynomial.constant(r, mat[i, j])
               for i in range(mat.shape[0]) for j in range(mat.shape[1])]
        return cls(mat.shape[0], mat.shape[1], r, ent)

    @classmethod
    def from_coefficient_matrices(cls, rows: int, cols: int, r: int,
                                  coeffs: Mapping[ExponentVec, np.ndarray]
                                  ) -> "MatrixPolynomial":
        terms_grid: list[dict[ExponentVec, float]] = [
            {} for _ in range(rows * cols)]
        for e, C in coeffs.items():
            C = np.asarray(C, dtype=float)
            for i in range(rows):
                for j in range(cols):
                    v = C[i, j]
                    if v != 0.0:
                        terms_grid[i * cols + j][tuple(e)] = \
                            terms_grid[i * cols + j].get(tuple(e), 0.0) + v
        return cls(rows, cols, r,
                   [Polynomial(r, t) for t in terms_grid])

    # -- access -------------------------------------------------------------

    def entry(self, i: int, j: int) -> Polynomial:
        return self.entries[i * self.cols + j]

    def set_entry(self, i: int, j: int, p: Polynomial) -> None:
        # construction-time helper; MatrixPolynomials are not mutated after use
        if p.r != self.r:
            raise ValueError("parameter count mismatch")
        self.entries[i * self.cols + j] = p

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def deg(self) -> int:
        """Max total degree over entries (0 for the zero matrix)."""
        return max((p.degree for p in self.entries if not p.is_zero), default=0)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        """Coefficient-wise symmetry check.  tol=0 demands exact equality of
        stored coefficients (canonical forms make this meaningful)."""
        if self.rows != self.cols:
            return False
        for i in range(self.rows):
            for j in range(i + 1, self.cols):
                a, b = self.entry(i, j), self.entry(j, i)
                keys = set(a.terms) | set(b.terms)
                for e in keys:
                    if abs(a.terms.get(e, 0.0) - b.terms.get(e, 0.0)) > tol:
                        return False
        return True

    def coefficient_matrices(self) -> dict[ExponentVec, np.ndarray]:
        """Per-monomial coefficient matrices: M(theta) = sum_e C_e theta^e."""
        out: dict[ExponentVec, np.ndarray] = {}
        for i in range(self.rows):
            for j in range(self.cols):
                for e, c in self.entry(i, j).terms.items():
                    if e not in out:
                        out[e] = np.zeros((self.rows, self.cols))
                    out[e][i, j] = c
        return out

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        self._check_same_shape(other)
        return MatrixPolynomial(
            self.rows, self.cols, self.r,
            [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        self._check_same_shape(other)
        return MatrixPolynomial(
            self.rows, self.cols, self.r,
            [a - b for a, b in zip(self.entries, other.entries)])

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        if isinstance(other, Polynomial):
            return MatrixPolynomial(self.rows, self.cols, self.r,
                                    [p * other for p in self.entries])
        if isinstance(other, MatrixPolynomial):
            return matpoly_mul(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1.0)

    def scale(self, c: float) -> "MatrixPolynomial":
        return MatrixPolynomial(self.rows, self.cols, self.r,
                                [p.scale(c) for p in self.entries])

    def transpose(self) -> "MatrixPolynomial":
        return MatrixPolynomial(
            self.cols, self.rows, self.r,
            [self.entry(i, j) for j in range(self.cols) for i in range(self.rows)])

    @property
    def T(self) -> "MatrixPolynomial":
        return self.transpose()

    def _check_same_shape(self, other: "MatrixPolynomial") -> None:
        if self.shape != other.shape or self.r != other.r:
            raise ValueError(
                f"shape/parameter mismatch: {self.shape},r={self.r} vs "
                f"{other.shape},r={other.r}")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, theta: Sequence[float]) -> np.ndarray:
        return matpoly_eval(self, theta)

    def eval_batch(self, thetas: np.ndarray) -> np.ndarray:
        """Evaluate at a (m, r) batch, returning (m, rows, cols).

        Uses the coefficient-matrix form so the per-sample work is a single
        tensor contraction; this is the path the certifier's sampling
        oracle leans on."""
        thetas = np.asarray(thetas, dtype=float)
        if thetas.ndim == 1:
            thetas = thetas.reshape(1, -1)
        coeffs = self.coefficient_matrices()
        if not coeffs:
            return np.zeros((thetas.shape[0], self.rows, self.cols))
        monos = sorted(coeffs, key=mono_sort_key)
        stack = np.stack([coeffs[e] for e in monos])          # (q, rows, cols)
        powers = np.ones((thetas.shape[0], len(monos)))
        for idx, e in enumerate(monos):
            for k, p in enumerate(e):
                if p:
                    powers[:, idx] *= thetas[:, k] ** p
        return np.einsum("mq,qrc->mrc", powers, stack)

    def __repr__(self) -> str:
        return f"MatrixPolynomial({self.rows}x{self.cols}, r={self.r}, deg={self.deg()})"


def matpoly_mul(a: MatrixPolynomial, b: MatrixPolynomial) -> MatrixPolynomial:
    """Matrix product with polynomial entries."""
    if a.cols != b.rows:
        raise ValueError(f"inner dimension mismatch: {a.shape} x {b.shape}")
    if a.r != b.r:
        raise ValueError(f"parameter count mismatch: {a.r} vs {b.r}")
    out = []
    for i in range(a.rows):
        for j in range(b.cols):
            terms: dict[ExponentVec, float] = {}
            for k in range(a.cols):
                pa, pb = a.entry(i, k), b.entry(k, j)
                if pa.is_zero or pb.is_zero:
                    continue
                for ea, ca in pa.terms.items():
                    for eb, cb in pb.terms.items():
                        e = mono_mul(ea, eb)
                        terms[e] = terms.get(e, 0.0) + ca * cb
            out.append(Polynomial(a.r, terms))
    return MatrixPolynomial(a.rows, b.cols, a.r, out)


def matpoly_eval(m: MatrixPolynomial, theta: Sequence[float]) -> np.ndarray:
    """Evaluate a matrix polynomial at a point, returning a float array."""
    out = np.empty((m.rows, m.cols))
    for i in range(m.rows):
        for j in range(m.cols):
            out[i, j] = poly_eval(m.entry(i, j), theta)
    return out
