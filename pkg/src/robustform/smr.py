"""Gram (square matrix) representations of polynomials and polynomial matrices.

A polynomial f(theta) of degree <= 2d in r parameters can be written as

    f(theta) = phi(theta)^T (F + C(delta)) phi(theta)

where phi is the power vector of all monomials of degree <= d, F is one fixed
symmetric representative, and C(delta) ranges over the linear space of
symmetric matrices that expand to the zero polynomial.  A symmetric s-by-s
matrix polynomial M(theta) of degree <= 2d gets the block analogue

    M(theta) = (phi(theta) (x) I_s)^T (B + D(delta)) (phi(theta) (x) I_s).

This module builds the canonical representative (coefficients split equally
over all Gram positions that produce a given monomial), an orthonormal basis
of the null space, the expansion map back to polynomials, and the embedding of
a Gram matrix at one degree into the power vector of a higher degree.

Power vector order is graded descending with ties broken lexicographically
(theta_1 before theta_2), so the constant monomial is always last: for r=1,
d=2 the vector is (t^2, t, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .polyalg import (
    ExponentVec,
    MatrixPolynomial,
    Polynomial,
    mono_mul,
    mono_sort_key,
)


@dataclass(frozen=True)
class PowerVector:
    """Ordered monomial basis phi(r, d): every monomial of degree <= d."""

    r: int
    d: int
    monos: tuple[ExponentVec, ...]

    def __len__(self) -> int:
        return len(self.monos)

    def index(self, e: ExponentVec) -> int:
        return self.monos.index(tuple(e))

    def eval(self, theta) -> np.ndarray:
        """phi(theta) as a float vector."""
        theta = np.asarray(theta, dtype=float)
        out = np.empty(len(self.monos))
        for i, e in enumerate(self.monos):
            v = 1.0
            for k, p in enumerate(e):
                if p:
                    v *= theta[k] ** p
            out[i] = v
        return out

    def eval_batch(self, thetas: np.ndarray) -> np.ndarray:
        """phi at a (m, r) batch of points, shape (m, len(phi))."""
        thetas = np.asarray(thetas, dtype=float)
        if thetas.ndim == 1:
            thetas = thetas.reshape(1, -1)
        out = np.ones((thetas.shape[0], len(self.monos)))
        for i, e in enumerate(self.monos):
            for k, p in enumerate(e):
                if p:
                    out[:, i] *= thetas[:, k] ** p
        return out


def power_vector(r: int, d: int) -> PowerVector:
    """All monomials of total degree <= d in r parameters, canonical order.

    Length is binomial(r + d, d).  r = 0 is allowed and gives the single
    constant monomial: the uncertainty-free case."""
    if r < 0:
        raise ValueError(f"need r >= 0, got {r}")
    if d < 0:
        raise ValueError(f"need d >= 0, got {d}")
    monos: list[ExponentVec] = []

    def rec(prefix: list[int], remaining: int, budget: int):
        if remaining == 0:
            monos.append(tuple(prefix))
            return
        for p in range(budget + 1):
            rec(prefix + [p], remaining - 1, budget - p)

    rec([], r, d)
    monos.sort(key=mono_sort_key)
    assert len(monos) == math.comb(r + d, d)
    return PowerVector(r, d, tuple(monos))


def _positions(pv: PowerVector) -> dict[ExponentVec, list[tuple[int, int]]]:
    """Unordered Gram positions grouped by the monomial they produce.

    positions[mu] lists the index pairs (a, b), a <= b, with
    phi_a * phi_b = mu."""
    out: dict[ExponentVec, list[tuple[int, int]]] = {}
    l = len(pv)
    for a in range(l):
        for b in range(a, l):
            mu = mono_mul(pv.monos[a], pv.monos[b])
            out.setdefault(mu, []).append((a, b))
    return out


@dataclass
class GramForm:
    """A Gram representation: base matrix plus the null-space family.

    size = len(power) * s.  base is the fixed representative; any matrix
    base + sum_k delta_k * null_basis[k] expands to the same polynomial
    matrix."""

    power: PowerVector
    s: int
    base: np.ndarray
    null_basis: list[np.ndarray] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.power) * self.s

    def family_member(self, delta) -> np.ndarray:
        """base + sum_k delta_k * null_basis[k]."""
        delta = np.asarray(delta, dtype=float).reshape(-1)
        if delta.size != len(self.null_basis):
            raise ValueError(
                f"delta has {delta.size} entries, null basis has "
                f"{len(self.null_basis)}")
        A = self.base.copy()
        for dk, Bk in zip(delta, self.null_basis):
            if dk:
                A = A + dk * Bk
        return A

    def expand(self, delta=None) -> MatrixPolynomial:
        A = self.base if delta is None else self.family_member(delta)
        return gram_expand_matrix(A, self.power, self.s)

    def dump_csv(self, path) -> None:
        """Write base and null-basis matrices as CSV blocks for debugging."""
        with open(path, "w") as fh:
            fh.write("# base %dx%d, power vector: %s\n"
                     % (self.size, self.size,
                        " ".join(str(e) for e in self.power.monos)))
            np.savetxt(fh, self.base, delimiter=",", fmt="%.17g")
            for k, B in enumerate(self.null_basis):
                fh.write(f"# null[{k}]\n")
                np.savetxt(fh, B, delimiter=",", fmt="%.17g")


def _as_matrix(m: MatrixPolynomial | Polynomial) -> MatrixPolynomial:
    if isinstance(m, Polynomial):
        return MatrixPolynomial(1, 1, m.r, [m])
    return m


def gram_canonical(m: MatrixPolynomial | Polynomial, d: int,
                   with_null_basis: bool = True) -> GramForm:
    """Canonical Gram form of a symmetric matrix polynomial of degree <= 2d.

    Each monomial coefficient is split equally over all Gram positions (pairs
    of power-vector monomials) whose product gives that monomial; an
    off-diagonal position holds half its share in each of its two blocks.
    For f = 7t^4 + 2t^3 + 4t^2 + 6t + 9 at d=2 this produces

        [[7, 1, 1], [1, 2, 3], [1, 3, 9]]

    against phi = (t^2, t, 1)."""
    M = _as_matrix(m)
    if M.rows != M.cols:
        raise ValueError(f"matrix must be square, got {M.shape}")
    if not M.is_symmetric(tol=0.0):
        raise ValueError("matrix polynomial is not symmetric")
    if M.deg() > 2 * d:
        raise ValueError(f"degree {M.deg()} exceeds 2*d = {2 * d}")
    s = M.rows
    pv = power_vector(M.r, d)
    pos = _positions(pv)
    size = len(pv) * s
    base = np.zeros((size, size))
    for mu, C in M.coefficient_matrices().items():
        places = pos.get(mu)
        if places is None:
            raise ValueError(f"monomial {mu} not representable at d={d}")
        share = C / len(places)
        for (a, b) in places:
            if a == b:
                base[a * s:(a + 1) * s, a * s:(a + 1) * s] += share
            else:
                base[a * s:(a + 1) * s, b * s:(b + 1) * s] += share / 2
                base[b * s:(b + 1) * s, a * s:(a + 1) * s] += share.T / 2
    nb = gram_null_basis(M.r, d, s) if with_null_basis else []
    return GramForm(pv, s, base, nb)


def gram_null_basis(r: int, d: int, s: int = 1) -> list[np.ndarray]:
    """Orthonormal basis of symmetric matrices expanding to zero.

    Two kinds of element span the kernel of the expansion map:

    * for each monomial mu produced by t >= 2 distinct Gram positions, the
      assignments of one symmetric s-by-s matrix per position that sum to
      zero ((t-1) * s(s+1)/2 dimensions);
    * for each unordered pair of distinct power-vector indices, the
      antisymmetric part of that off-diagonal block (l(l-1)/2 * s(s-1)/2
      dimensions), which cancels against its transpose on expansion.

    A dimension count against the full symmetric space minus the coefficient
    space shows these exhaust the kernel.  Elements are Frobenius-orthonormal:
    the two kinds have orthogonal supports, distinct monomials touch disjoint
    positions, and within one monomial a Gram-Schmidt pass handles the only
    non-trivial overlaps.  Everything is deterministic."""
    pv = power_vector(r, d)
    l = len(pv)
    size = l * s
    pos = _positions(pv)
    out: list[np.ndarray] = []

    # symmetric unit directions for the per-monomial assignment kernels
    sym_units: list[np.ndarray] = []
    for u in range(s):
        U = np.zeros((s, s))
        U[u, u] = 1.0
        sym_units.append(U)
    for u in range(s):
        for v in range(u + 1, s):
            U = np.zeros((s, s))
            U[u, v] = U[v, u] = 1.0
            sym_units.append(U)

    def embed(places, kappa, U):
        B = np.zeros((size, size))
        for k, (a, b) in enumerate(places):
            w = kappa[k]
            if w == 0.0:
                continue
            if a == b:
                B[a * s:(a + 1) * s, a * s:(a + 1) * s] += w * U
            else:
                B[a * s:(a + 1) * s, b * s:(b + 1) * s] += w * U / 2
                B[b * s:(b + 1) * s, a * s:(a + 1) * s] += w * U / 2
        return B

    for mu in sorted(pos, key=mono_sort_key):
        places = pos[mu]
        t = len(places)
        if t < 2:
            continue
        for U in sym_units:
            group: list[np.ndarray] = []
            for j in range(1, t):
                kappa = np.zeros(t)
                kappa[0], kappa[j] = 1.0, -1.0
                B = embed(places, kappa, U)
                # modified Gram-Schmidt against the group so far
                for G in group:
                    B = B - np.sum(B * G) * G
                B = B / np.linalg.norm(B)
                group.append(B)
            out.extend(group)

    # antisymmetric off-diagonal block directions (only exist for s >= 2)
    if s >= 2:
        for a in range(l):
            for b in range(a + 1, l):
                for u in range(s):
                    for v in range(u + 1, s):
                        B = np.zeros((size, size))
                        B[a * s + u, b * s + v] = 0.5
                        B[b * s + v, a * s + u] = 0.5
                        B[a * s + v, b * s + u] = -0.5
                        B[b * s + u, a * s + v] = -0.5
                        out.append(B)
    return out


def null_dimension(r: int, d: int, s: int = 1) -> int:
    """Kernel dimension by rank count: dim of the symmetric space minus the
    number of (monomial, symmetric-entry) coefficient constraints."""
    pv = power_vector(r, d)
    l = len(pv)
    pos = _positions(pv)
    sym_part = sum(len(p) - 1 for p in pos.values()) * (s * (s + 1) // 2)
    anti_part = (l * (l - 1) // 2) * (s * (s - 1) // 2)
    return sym_part + anti_part


def gram_expand_matrix(A: np.ndarray, pv: PowerVector, s: int
                       ) -> MatrixPolynomial:
    """Expand a Gram matrix back to the matrix polynomial it represents."""
    A = np.asarray(A, dtype=float)
    l = len(pv)
    if A.shape != (l * s, l * s):
        raise ValueError(f"Gram matrix shape {A.shape}, expected {(l*s, l*s)}")
    coeffs: dict[ExponentVec, np.ndarray] = {}
    for a in range(l):
        for b in range(l):
            mu = mono_mul(pv.monos[a], pv.monos[b])
            block = A[a * s:(a + 1) * s, b * s:(b + 1) * s]
            if mu not in coeffs:
                coeffs[mu] = np.zeros((s, s))
            coeffs[mu] += block
    return MatrixPolynomial.from_coefficient_matrices(s, s, pv.r, coeffs)


def gram_expand(g: GramForm, delta=None) -> MatrixPolynomial:
    """Expand base + C(delta) through the power vector."""
    return g.expand(delta)


def gram_pad(A: np.ndarray, r: int, d_from: int, d_to: int, s: int = 1
             ) -> np.ndarray:
    """Embed a Gram matrix over phi(r, d_from) into phi(r, d_to) >= d_from.

    The embedded matrix expands to the same polynomial matrix: blocks are
    scattered to the positions of the matching monomials, everything else
    is zero."""
    if d_to < d_from:
        raise ValueError(f"d_to={d_to} < d_from={d_from}")
    pv_from = power_vector(r, d_from)
    pv_to = power_vector(r, d_to)
    index_to = {e: i for i, e in enumerate(pv_to.monos)}
    idx = [index_to[e] for e in pv_from.monos]
    out = np.zeros((len(pv_to) * s, len(pv_to) * s))
    A = np.asarray(A, dtype=float)
    for a, a2 in enumerate(idx):
        for b, b2 in enumerate(idx):
            out[a2 * s:(a2 + 1) * s, b2 * s:(b2 + 1) * s] = \
                A[a * s:(a + 1) * s, b * s:(b + 1) * s]
    return out
