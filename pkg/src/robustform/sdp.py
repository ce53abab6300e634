"""Semidefinite programming with a dense Nesterov-Todd interior point method.

Problems are stated in linear-matrix-inequality form over a flat vector y of
scalar decision variables:

    maximize    b' y
    subject to  E y = e
                S_k(y) = F0_k + sum_i y_i F_{k,i}  is PSD,  k = 1..K

Symmetric matrix variables are layered on top through `add_psd_var`, which
allocates one scalar per upper-triangular entry in the scaled vectorization
(off-diagonal entries carry a factor sqrt(2) so that matrix inner products
become plain dot products) and attaches an identity-coefficient LMI that
keeps the reassembled matrix PSD.

The solver runs a standard primal-dual predictor-corrector iteration with
Nesterov-Todd scaling, an infeasible start, and a Schur complement system
assembled blockwise from sparse constraint columns.  Certificates produced
elsewhere in the package are re-checked by `residuals`, which evaluates the
constraints directly from the problem data without touching solver state.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

DIVERGENCE_LIMIT = 1e8


class SdpStatus(enum.Enum):
    OPTIMAL = "optimal"
    NEAR_OPTIMAL = "near_optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"
    NUMERICAL_FAILURE = "numerical_failure"


def svec_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the upper triangle, row-major."""
    return np.triu_indices(n)


def svec_weights(n: int) -> np.ndarray:
    iu, ju = svec_indices(n)
    w = np.where(iu == ju, 1.0, math.sqrt(2.0))
    return w


def svec(X: np.ndarray) -> np.ndarray:
    """Scaled upper-triangle vectorization; svec(X) . svec(Y) = <X, Y>."""
    n = X.shape[0]
    iu, ju = svec_indices(n)
    return X[iu, ju] * svec_weights(n)


def smat(v: np.ndarray, n: int) -> np.ndarray:
    X = np.zeros((n, n))
    iu, ju = svec_indices(n)
    vals = v / svec_weights(n)
    X[iu, ju] = vals
    X[ju, iu] = vals
    return X


def svec_dim(n: int) -> int:
    return n * (n + 1) // 2


@dataclass
class MatrixVar:
    """Handle for a symmetric PSD matrix variable stored as svec scalars."""

    name: str
    size: int
    indices: np.ndarray  # flat variable indices, one per upper-tri entry

    def basis_matrix(self, k: int) -> np.ndarray:
        """d(matrix)/d(scalar k): unit svec direction as a symmetric matrix."""
        e = np.zeros(svec_dim(self.size))
        e[k] = 1.0
        return smat(e, self.size)

    def inner_coeffs(self, A: np.ndarray) -> dict[int, float]:
        """Coefficients expressing <A, X> as a linear form in the scalars."""
        A = np.asarray(A, dtype=float)
        s = svec(0.5 * (A + A.T))
        return {int(self.indices[k]): float(s[k])
                for k in range(len(s)) if s[k] != 0.0}

    def value(self, y: np.ndarray) -> np.ndarray:
        return smat(np.asarray(y)[self.indices], self.size)


def _svec_sparse(F) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero svec positions and values of a symmetric matrix.

    Accepts dense arrays or scipy sparse matrices; only the upper triangle
    is read.  Positions follow the row-major triu order used by `svec`."""
    if sp.issparse(F):
        n = F.shape[0]
        C = sp.triu(F, 0).tocoo()
        i, j, v = C.row, C.col, C.data
    else:
        F = np.asarray(F, dtype=float)
        n = F.shape[0]
        i, j = np.nonzero(np.triu(F))
        v = F[i, j]
    pos = i * n - (i * (i - 1)) // 2 + (j - i)
    w = np.where(i == j, 1.0, math.sqrt(2.0))
    keep = v != 0.0
    return pos[keep].astype(np.int64), (v * w)[keep]


def _check_symmetric(F, n: int, what: str) -> None:
    if F.shape != (n, n):
        raise ValueError(f"{what} has shape {F.shape}, LMI size is {n}")
    if sp.issparse(F):
        d = F - F.T
        asym = np.max(np.abs(d.data)) if d.nnz else 0.0
    else:
        F = np.asarray(F)
        asym = float(np.max(np.abs(F - F.T))) if F.size else 0.0
    if asym > 1e-12:
        raise ValueError(f"{what} not symmetric (max asymmetry {asym:g})")


@dataclass
class LmiBlock:
    """One PSD constraint, coefficients held as sparse svec columns."""

    size: int
    const: np.ndarray
    cols: dict[int, tuple[np.ndarray, np.ndarray]] = field(
        default_factory=dict)

    def coeff_matrix(self, i: int) -> np.ndarray:
        v = np.zeros(svec_dim(self.size))
        if i in self.cols:
            idx, vals = self.cols[i]
            v[idx] = vals
        return smat(v, self.size)

    def value(self, y: np.ndarray) -> np.ndarray:
        v = np.zeros(svec_dim(self.size))
        for i, (idx, vals) in self.cols.items():
            yi = y[i]
            if yi != 0.0:
                v[idx] += yi * vals
        return self.const + smat(v, self.size)


class SdpProblem:
    """Incrementally built LMI problem; see the module docstring for the form."""

    def __init__(self):
        self.n_vars = 0
        self.var_names: list[str] = []
        self.objective: dict[int, float] = {}
        self.lmis: list[LmiBlock] = []
        self.eqs: list[tuple[dict[int, float], float]] = []
        self.matrix_vars: list[MatrixVar] = []

    def add_var(self, name: str = "", obj: float = 0.0) -> int:
        idx = self.n_vars
        self.n_vars += 1
        self.var_names.append(name or f"y{idx}")
        if obj:
            self.objective[idx] = self.objective.get(idx, 0.0) + obj
        return idx

    def add_psd_var(self, size: int, name: str = "") -> MatrixVar:
        """Symmetric PSD matrix variable of the given size.

        Allocates svec scalars and attaches the identity LMI that constrains
        the reassembled matrix to the PSD cone."""
        base = self.n_vars
        m = svec_dim(size)
        idx = np.arange(base, base + m)
        self.n_vars += m
        nm = name or f"X{len(self.matrix_vars)}"
        self.var_names.extend(f"{nm}[{k}]" for k in range(m))
        var = MatrixVar(nm, size, idx)
        coeffs = {int(idx[k]): var.basis_matrix(k) for k in range(m)}
        self.add_lmi(np.zeros((size, size)), coeffs)
        self.matrix_vars.append(var)
        return var

    def add_lmi(self, const: np.ndarray, coeffs: dict) -> int:
        """PSD constraint const + sum_i y_i coeffs[i]; coefficient values
        may be dense arrays or scipy sparse matrices."""
        const = np.asarray(const, dtype=float)
        n = const.shape[0]
        if const.shape != (n, n):
            raise ValueError("LMI constant term must be square")
        _check_symmetric(const, n, "LMI constant term")
        clean: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for i, F in coeffs.items():
            if not 0 <= i < self.n_vars:
                raise ValueError(f"unknown variable index {i}")
            _check_symmetric(F, n, f"coefficient for var {i}")
            idx, vals = _svec_sparse(F)
            if len(idx):
                clean[int(i)] = (idx, vals)
        self.lmis.append(LmiBlock(n, 0.5 * (const + const.T), clean))
        return len(self.lmis) - 1

    def add_eq(self, coeffs: dict[int, float], rhs: float) -> None:
        for i in coeffs:
            if not 0 <= i < self.n_vars:
                raise ValueError(f"unknown variable index {i}")
        self.eqs.append(({int(i): float(c) for i, c in coeffs.items()},
                         float(rhs)))

    def set_objective(self, coeffs: dict[int, float]) -> None:
        """Maximization coefficients b; replaces any previous objective."""
        for i in coeffs:
            if not 0 <= i < self.n_vars:
                raise ValueError(f"unknown variable index {i}")
        self.objective = {int(i): float(c) for i, c in coeffs.items()}

    def dump_text(self) -> str:
        """Plain-text dump (sizes, then matrices row-major) for external
        cross-checking with other solvers."""
        out = [f"vars {self.n_vars}", f"objective " +
               " ".join(f"{i}:{c:.17g}" for i, c in
                        sorted(self.objective.items()))]
        for coeffs, rhs in self.eqs:
            out.append("eq " + " ".join(
                f"{i}:{c:.17g}" for i, c in sorted(coeffs.items())) +
                f" = {rhs:.17g}")
        for k, blk in enumerate(self.lmis):
            out.append(f"lmi {k} size {blk.size}")
            out.append("const " + " ".join(
                f"{v:.17g}" for v in blk.const.ravel()))
            for i in sorted(blk.cols):
                out.append(f"coeff {i} " + " ".join(
                    f"{v:.17g}" for v in blk.coeff_matrix(i).ravel()))
        return "\n".join(out) + "\n"

    # -- assembled views ----------------------------------------------------

    def b_vector(self) -> np.ndarray:
        b = np.zeros(self.n_vars)
        for i, c in self.objective.items():
            b[i] = c
        return b

    def eq_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        E = np.zeros((len(self.eqs), self.n_vars))
        e = np.zeros(len(self.eqs))
        for r, (coeffs, rhs) in enumerate(self.eqs):
            for i, c in coeffs.items():
                E[r, i] = c
            e[r] = rhs
        return E, e

    def compile_columns(self) -> list[sp.csc_matrix]:
        """Per-block sparse matrix whose column i is svec(F_{k,i})."""
        out = []
        for blk in self.lmis:
            rows, cols, data = [], [], []
            for i, (idx, vals) in blk.cols.items():
                rows.append(idx)
                cols.append(np.full(len(idx), i, dtype=np.int64))
                data.append(vals)
            if rows:
                A = sp.csc_matrix(
                    (np.concatenate(data),
                     (np.concatenate(rows), np.concatenate(cols))),
                    shape=(svec_dim(blk.size), self.n_vars))
            else:
                A = sp.csc_matrix((svec_dim(blk.size), self.n_vars))
            out.append(A)
        return out

    def lmi_value(self, k: int, y: np.ndarray) -> np.ndarray:
        return self.lmis[k].value(np.asarray(y, dtype=float))


@dataclass
class SdpSolution:
    status: SdpStatus
    y: np.ndarray
    objective_value: float
    duality_gap: float
    min_eigenvalues: list[float]
    eq_residual: float
    n_iterations: int
    message: str = ""

    @property
    def ok(self) -> bool:
        """True when the returned point is trustworthy.  NEAR_OPTIMAL means
        every criterion was met within 100x the requested tolerance; it
        shows up on degenerate instances where the last digit of accuracy
        is not attainable in floating point."""
        return self.status in (SdpStatus.OPTIMAL, SdpStatus.NEAR_OPTIMAL)


def residuals(problem: SdpProblem, y: np.ndarray) -> dict:
    """Feasibility of a candidate point, straight from the problem data.

    Returns min eigenvalue per LMI block, the worst equality violation, and
    the objective value.  This path shares no code with the solver iteration
    on purpose: it is the re-check used on stored certificates."""
    y = np.asarray(y, dtype=float)
    mins = []
    for k in range(len(problem.lmis)):
        M = problem.lmi_value(k, y)
        mins.append(float(np.linalg.eigvalsh(M)[0]) if M.size else 0.0)
    eq_res = 0.0
    for coeffs, rhs in problem.eqs:
        val = sum(c * y[i] for i, c in coeffs.items())
        eq_res = max(eq_res, abs(val - rhs))
    b = problem.b_vector()
    return {
        "min_eigenvalues": mins,
        "eq_residual": eq_res,
        "objective": float(b @ y),
    }


def _presolve(problem: SdpProblem):
    """Split off variables that appear in no LMI and no equality.

    Such a variable is unconstrained: with zero objective coefficient it is
    fixed to zero, otherwise the problem is unbounded.  Returns (keep
    indices, failure message or None)."""
    used = np.zeros(problem.n_vars, dtype=bool)
    for blk in problem.lmis:
        for i in blk.cols:
            used[i] = True
    for coeffs, _ in problem.eqs:
        for i in coeffs:
            used[i] = True
    b = problem.b_vector()
    dangling = np.nonzero(~used)[0]
    bad = [i for i in dangling if b[i] != 0.0]
    if bad:
        return None, (f"objective variable {problem.var_names[bad[0]]} is "
                      "unconstrained; the objective is unbounded")
    return np.nonzero(used)[0], None


class _Scaling:
    """Per-block Nesterov-Todd scaling data."""

    __slots__ = ("lam", "R", "Rinv", "Winv")

    def __init__(self, S: np.ndarray, Z: np.ndarray):
        Ls = np.linalg.cholesky(S)
        G = Ls.T @ Z @ Ls
        lam2, Q = np.linalg.eigh(0.5 * (G + G.T))
        lam2 = np.maximum(lam2, 1e-300)
        lam = np.sqrt(lam2)
        lam_q = lam2 ** 0.25
        self.lam = lam
        self.R = Ls @ Q / lam_q[None, :]
        Linv = sla.solve_triangular(Ls, np.eye(Ls.shape[0]), lower=True)
        self.Rinv = lam_q[:, None] * (Q.T @ Linv)
        self.Winv = self.Rinv.T @ self.Rinv


def _max_step(S: np.ndarray, dS: np.ndarray) -> float:
    """Largest t with S + t dS still PSD, via a factorization of S."""
    try:
        Ls = np.linalg.cholesky(S)
        M = sla.solve_triangular(Ls, dS, lower=True)
        M = sla.solve_triangular(Ls, M.T, lower=True)
    except np.linalg.LinAlgError:
        # roundoff can push an extreme iterate just off the cone; clamp
        # the spectrum at a tiny positive floor instead of giving up
        lam, Q = np.linalg.eigh(0.5 * (S + S.T))
        root = np.sqrt(np.maximum(lam, 1e-15 * max(float(lam[-1]), 1e-300)))
        B = Q / root[None, :]
        M = B.T @ dS @ B
    lo = float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
    if lo >= -1e-14:
        return np.inf
    return -1.0 / lo


def _unpack_chunk(A: sp.csc_matrix, cols: np.ndarray, n: int) -> np.ndarray:
    """Dense (len(cols), n, n) symmetric matrices from svec columns."""
    dense = A[:, cols].toarray().T  # (C, svecdim)
    iu, ju = svec_indices(n)
    inv_w = 1.0 / svec_weights(n)
    M = np.zeros((dense.shape[0], n, n))
    vals = dense * inv_w[None, :]
    M[:, iu, ju] = vals
    M[:, ju, iu] = vals
    return M


def _schur_matrix(cols_list, A_list, scalings, sizes, n_vars, chunk):
    B = np.zeros((n_vars, n_vars))
    for A, sc, n, cols in zip(A_list, scalings, sizes, cols_list):
        if len(cols) == 0:
            continue
        iu, ju = svec_indices(n)
        w = svec_weights(n)
        Winv = sc.Winv
        At = A.T.tocsr()
        for start in range(0, len(cols), chunk):
            cc = cols[start:start + chunk]
            M = _unpack_chunk(A, cc, n)
            Y = np.matmul(Winv, np.matmul(M, Winv))
            K = (Y[:, iu, ju] * w[None, :]).T  # (svecdim, C)
            B[:, cc] += At @ K
    return 0.5 * (B + B.T)


class _KktSolver:
    """Factor [B E'; E 0] by eliminating y through a Cholesky of B."""

    def __init__(self, B: np.ndarray, E: np.ndarray):
        self.E = E
        scale = max(1.0, float(np.max(np.abs(np.diag(B)))))
        jitter = 0.0
        for attempt in range(8):
            try:
                self.chol = sla.cho_factor(
                    B + jitter * np.eye(B.shape[0]), lower=True)
                break
            except np.linalg.LinAlgError:
                jitter = scale * 1e-12 if jitter == 0.0 else jitter * 100.0
        else:
            raise np.linalg.LinAlgError("Schur complement not factorizable")
        if E.shape[0]:
            self.BiEt = sla.cho_solve(self.chol, E.T)
            self.Sw = E @ self.BiEt

    def solve(self, rhs_y: np.ndarray, rhs_w: np.ndarray):
        v = sla.cho_solve(self.chol, rhs_y)
        if self.E.shape[0] == 0:
            return v, np.zeros(0)
        dw = np.linalg.solve(self.Sw, self.E @ v - rhs_w)
        dy = v - self.BiEt @ dw
        return dy, dw


def solve(problem: SdpProblem, tol: float = 1e-8, max_iter: int = 200,
          chunk: int = 256, verbose: bool = False,
          callback=None) -> SdpSolution:
    """Run the predictor-corrector interior point method.

    tol bounds the relative duality gap and the scaled primal and dual
    residuals at termination.  `callback`, when given, is invoked once per
    iteration with a small stats dict."""
    keep, fail_msg = _presolve(problem)
    if fail_msg is not None:
        return SdpSolution(SdpStatus.INFEASIBLE, np.zeros(problem.n_vars),
                           math.inf, math.inf, [], 0.0, 0, fail_msg)

    n_vars = problem.n_vars
    b = problem.b_vector()
    E, e = problem.eq_matrix()
    A_list = problem.compile_columns()
    sizes = [blk.size for blk in problem.lmis]
    consts = [blk.const for blk in problem.lmis]
    if not sizes:
        raise ValueError("problem has no LMI constraints")
    cols_list = [np.nonzero(np.diff(A.indptr))[0] for A in A_list]
    n_tot = sum(sizes)

    def lmi_at(k, yv):
        return consts[k] + smat(np.asarray(A_list[k] @ yv).ravel(), sizes[k])

    # Infeasible start: y from the equalities, identity-scaled S and Z.
    if E.shape[0]:
        y = np.linalg.lstsq(E, e, rcond=None)[0]
    else:
        y = np.zeros(n_vars)
    S, Z = [], []
    for k, n in enumerate(sizes):
        M0 = lmi_at(k, y)
        zeta = max(1.0, float(np.linalg.norm(M0, 2)))
        S.append(zeta * np.eye(n))
        Z.append(np.eye(n))
    w = np.zeros(E.shape[0])

    b_scale = 1.0 + float(np.max(np.abs(b))) if b.size else 1.0
    msg = ""
    status = SdpStatus.MAX_ITER
    it = 0
    # Best iterate seen, by worst-of-three merit.  On degenerate problems
    # the dual residual can deteriorate after the gap bottoms out; keeping
    # the best point lets a stalled run still return its honest optimum.
    best_merit = math.inf
    best_point = None
    since_best = 0

    for it in range(1, max_iter + 1):
        res_d = [lmi_at(k, y) - S[k] for k in range(len(sizes))]
        r_p = e - E @ y if E.shape[0] else np.zeros(0)
        r_g = (E.T @ w if E.shape[0] else 0.0) - b
        for A, Zk in zip(A_list, Z):
            r_g = r_g - A.T @ svec(Zk)
        r_g = np.asarray(r_g).ravel()
        gap = sum(float(np.sum(Sk * Zk)) for Sk, Zk in zip(S, Z))
        pobj = float(b @ y)
        dobj = sum(float(np.sum(F0 * Zk)) for F0, Zk in zip(consts, Z)) \
            + (float(e @ w) if E.shape[0] else 0.0)

        pinf = max([np.linalg.norm(r_p, np.inf) if r_p.size else 0.0] +
                   [np.linalg.norm(rd, 2) / (1.0 + np.linalg.norm(c, 2))
                    for rd, c in zip(res_d, consts)])
        dinf = np.linalg.norm(r_g, np.inf) / b_scale
        relgap = gap / (1.0 + abs(pobj) + abs(dobj))

        if callback is not None:
            callback({"iter": it, "gap": gap, "pinf": pinf, "dinf": dinf,
                      "pobj": pobj, "dobj": dobj})
        if verbose:
            print(f"  it {it:3d}  pobj {pobj: .6e}  gap {relgap:.2e}  "
                  f"pinf {pinf:.2e}  dinf {dinf:.2e}")

        merit = max(relgap, pinf, dinf)
        if merit < best_merit:
            best_merit = merit
            best_point = (y.copy(), w.copy(), [Sk.copy() for Sk in S],
                          [Zk.copy() for Zk in Z])
            since_best = 0
        else:
            since_best += 1

        if relgap < tol and pinf < tol and dinf < tol:
            status = SdpStatus.OPTIMAL
            break
        if since_best >= 10:
            status = SdpStatus.NUMERICAL_FAILURE
            msg = "no merit progress over 10 iterations"
            break

        diverged = max(
            np.linalg.norm(y, np.inf) if y.size else 0.0,
            np.linalg.norm(w, np.inf) if w.size else 0.0,
            max(np.linalg.norm(Zk, np.inf) for Zk in Z))
        if diverged > DIVERGENCE_LIMIT:
            status = SdpStatus.INFEASIBLE
            msg = ("iterates diverged; the problem is infeasible or "
                   "unbounded")
            break

        try:
            scalings = [_Scaling(Sk, Zk) for Sk, Zk in zip(S, Z)]
            B = _schur_matrix(cols_list, A_list, scalings, sizes, n_vars,
                              chunk)
            kkt = _KktSolver(B, E)
        except np.linalg.LinAlgError as err:
            status = SdpStatus.NUMERICAL_FAILURE
            msg = f"scaling or factorization failed: {err}"
            break

        def direction(N_list):
            rhs_y = -r_g.copy()
            for A, sc, Nk, rd in zip(A_list, scalings, N_list, res_d):
                rhs_y += A.T @ svec(Nk - sc.Winv @ rd @ sc.Winv)
            dy, dw = kkt.solve(np.asarray(rhs_y).ravel(), r_p)
            dS, dZ = [], []
            for k, (A, sc, rd) in enumerate(zip(A_list, scalings, res_d)):
                dSk = smat(np.asarray(A @ dy).ravel(), sizes[k]) + rd
                dZk = N_list[k] - sc.Winv @ dSk @ sc.Winv
                dS.append(dSk)
                dZ.append(0.5 * (dZk + dZk.T))
            return dy, dw, dS, dZ

        # Predictor: drive straight at complementarity zero.
        N_aff = [-Zk for Zk in Z]
        dy_a, dw_a, dS_a, dZ_a = direction(N_aff)

        ap = min([1.0] + [_max_step(S[k], dS_a[k]) for k in range(len(S))])
        ad = min([1.0] + [_max_step(Z[k], dZ_a[k]) for k in range(len(Z))])
        gap_aff = sum(float(np.sum((S[k] + ap * dS_a[k]) *
                                   (Z[k] + ad * dZ_a[k])))
                      for k in range(len(S)))
        mu = gap / n_tot
        sigma = min(1.0, max(0.0, (max(gap_aff, 0.0) / gap) ** 3))

        # Corrector with the Mehrotra second order term.
        N_cmb = []
        for k, sc in enumerate(scalings):
            etaS = sc.Rinv @ dS_a[k] @ sc.Rinv.T
            etaZ = sc.R.T @ dZ_a[k] @ sc.R
            cross = etaS @ etaZ
            D = sigma * mu * np.eye(sizes[k]) - np.diag(sc.lam ** 2) \
                - 0.5 * (cross + cross.T)
            denom = sc.lam[:, None] + sc.lam[None, :]
            U = 2.0 * D / denom
            N_cmb.append(sc.Rinv.T @ U @ sc.Rinv)
        dy, dw, dS, dZ = direction(N_cmb)

        ap = min(1.0, 0.99 * min([np.inf] + [_max_step(S[k], dS[k])
                                             for k in range(len(S))]))
        ad = min(1.0, 0.99 * min([np.inf] + [_max_step(Z[k], dZ[k])
                                             for k in range(len(Z))]))
        if ap < 1e-10 and ad < 1e-10:
            status = SdpStatus.NUMERICAL_FAILURE
            msg = "step length collapsed"
            break

        y = y + ap * dy
        w = w + ad * dw
        for k in range(len(S)):
            S[k] = S[k] + ap * dS[k]
            Z[k] = Z[k] + ad * dZ[k]

    if status is not SdpStatus.OPTIMAL and best_point is not None \
            and best_merit <= 100.0 * tol:
        y, w, S, Z = best_point
        status = SdpStatus.NEAR_OPTIMAL
        msg = (f"stopped at the best iterate; criteria met within "
               f"{best_merit / tol:.1f}x tol")
    mins = [float(np.linalg.eigvalsh(lmi_at(k, y))[0])
            for k in range(len(sizes))]
    eq_res = float(np.linalg.norm(E @ y - e, np.inf)) if E.shape[0] else 0.0
    gap = sum(float(np.sum(Sk * Zk)) for Sk, Zk in zip(S, Z))
    if status is SdpStatus.MAX_ITER:
        msg = f"no convergence within {max_iter} iterations"
    return SdpSolution(status, y, float(b @ y), gap, mins, eq_res, it, msg)
