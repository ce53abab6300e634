"""Robust algebraic-connectivity certification over a parameter region.

Given a weighted interaction graph whose edge weights are polynomials in an
uncertain parameter vector, restricted to a semialgebraic region, this module
decides whether the graph stays connected for *every* admissible parameter
and produces a standalone certificate that can be re-checked without running
the solver again.

The certified quantity is a uniform lower bound c on the symmetrized reduced
pencil P(theta) Lhat(theta) + Lhat(theta)^T P(theta), where Lhat is the
Laplacian compressed onto the complement of the all-ones direction and P is a
trace-normalized positive matrix polynomial.  The bound is enforced through
Gram-matrix (sum of squares) constraints with one positive multiplier per
region inequality.  Because the squared power vector used in the Gram
expansion is at least one everywhere, a positive optimal c certifies that the
algebraic connectivity is bounded away from zero uniformly on the region.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from . import sdp
from .netgraph import UncertainAdjacency, laplacian, reduced_basis, \
    reduced_laplacian
from .polyalg import ExponentVec, MatrixPolynomial, Polynomial, mono_mul
from .smr import PowerVector, _positions, gram_expand_matrix, \
    gram_null_basis, power_vector

# A solved bound above this value counts as a connectivity verdict; below it
# the outcome is treated as inconclusive rather than as a disconnection proof.
CONNECTIVITY_THRESHOLD = 1e-6


class CertifierError(ValueError):
    pass


@dataclass(frozen=True)
class DegreePlan:
    """Relaxation degrees: d_P for the pencil matrix, d_H for the Gram
    identity, one multiplier degree per region inequality."""

    d_P: int
    d_H: int
    d_R: tuple[int, ...]

    @classmethod
    def auto(cls, deg_L: int, region_degrees: Sequence[int],
             d_P: int = 0) -> "DegreePlan":
        """Smallest balanced plan for the given data degrees.

        d_H starts at ceil((deg_L + 2 d_P) / 2) and is raised until every
        region inequality admits a nonnegative multiplier degree; each
        multiplier then gets the largest degree that still fits."""
        if d_P < 0:
            raise CertifierError(f"d_P must be nonnegative, got {d_P}")
        if deg_L < 0:
            raise CertifierError(f"deg_L must be nonnegative, got {deg_L}")
        d_H = (deg_L + 2 * d_P + 1) // 2
        for dg in region_degrees:
            if dg < 0:
                raise CertifierError("region degrees must be nonnegative")
            d_H = max(d_H, (dg + 1) // 2)
        d_R = tuple((2 * d_H - dg) // 2 for dg in region_degrees)
        return cls(d_P, d_H, d_R)

    def validate(self, deg_L: int, region_degrees: Sequence[int]) -> None:
        if self.d_P < 0 or self.d_H < 0 or any(d < 0 for d in self.d_R):
            raise CertifierError(f"negative degree in {self}")
        if len(self.d_R) != len(region_degrees):
            raise CertifierError(
                f"plan has {len(self.d_R)} multiplier degrees for "
                f"{len(region_degrees)} region inequalities")
        if deg_L + 2 * self.d_P > 2 * self.d_H:
            raise CertifierError(
                f"pencil degree {deg_L + 2 * self.d_P} exceeds 2*d_H "
                f"= {2 * self.d_H}")
        for i, (dr, dg) in enumerate(zip(self.d_R, region_degrees)):
            if 2 * dr + dg > 2 * self.d_H:
                raise CertifierError(
                    f"multiplier {i}: degree {2 * dr + dg} exceeds "
                    f"2*d_H = {2 * self.d_H}")

    def to_dict(self) -> dict:
        return {"d_P": self.d_P, "d_H": self.d_H, "d_R": list(self.d_R)}

    @classmethod
    def from_dict(cls, d: dict) -> "DegreePlan":
        return cls(int(d["d_P"]), int(d["d_H"]),
                   tuple(int(x) for x in d["d_R"]))


@dataclass
class Assembly:
    """A compiled certification problem plus the variable map needed to
    interpret its solution."""

    problem: sdp.SdpProblem
    plan: DegreePlan
    r: int
    s: int
    c_index: int
    p_var: sdp.MatrixVar
    r_vars: list[sdp.MatrixVar]
    delta_indices: list[int]
    phi_P: PowerVector
    phi_H: PowerVector
    phi_R: list[PowerVector]
    main_lmi: int

    def solution_vector(self, c: float, P_bar: np.ndarray,
                        R_bars: Sequence[np.ndarray],
                        delta: Sequence[float]) -> np.ndarray:
        """Pack certificate pieces into the problem's variable order."""
        y = np.zeros(self.problem.n_vars)
        y[self.c_index] = c
        y[self.p_var.indices] = sdp.svec(np.asarray(P_bar, dtype=float))
        if len(R_bars) != len(self.r_vars):
            raise CertifierError(
                f"{len(R_bars)} multiplier matrices for "
                f"{len(self.r_vars)} region inequalities")
        for var, R in zip(self.r_vars, R_bars):
            y[var.indices] = sdp.svec(np.asarray(R, dtype=float))
        delta = np.asarray(delta, dtype=float).reshape(-1)
        if delta.size != len(self.delta_indices):
            raise CertifierError(
                f"{delta.size} Gram offsets for "
                f"{len(self.delta_indices)} null directions")
        for idx, dk in zip(self.delta_indices, delta):
            y[idx] = dk
        return y


def _block_coeffs(B: np.ndarray, pv: PowerVector, s: int
                  ) -> dict[ExponentVec, np.ndarray]:
    """Coefficient matrices of the polynomial matrix a Gram matrix expands
    to.  Same contraction as smr.gram_expand_matrix, kept at the ndarray
    level so assembly never builds per-entry Polynomial objects."""
    l = len(pv)
    out: dict[ExponentVec, np.ndarray] = {}
    for a in range(l):
        for b in range(l):
            blk = B[a * s:(a + 1) * s, b * s:(b + 1) * s]
            if not np.any(blk):
                continue
            mu = mono_mul(pv.monos[a], pv.monos[b])
            if mu in out:
                out[mu] = out[mu] + blk
            else:
                out[mu] = blk.copy()
    return out


def _gram_base(coeffs: dict[ExponentVec, np.ndarray], pv: PowerVector,
               s: int, pos: dict) -> np.ndarray:
    """Equal-split Gram representative of a symmetric coefficient family,
    matching smr.gram_canonical position for position."""
    size = len(pv) * s
    G = np.zeros((size, size))
    for mu, C in coeffs.items():
        if not np.any(C):
            continue
        places = pos.get(mu)
        if places is None:
            raise CertifierError(
                f"monomial {mu} not representable at degree {pv.d}")
        share = C / len(places)
        for a, b in places:
            if a == b:
                G[a * s:(a + 1) * s, a * s:(a + 1) * s] += share
            else:
                G[a * s:(a + 1) * s, b * s:(b + 1) * s] += share / 2
                G[b * s:(b + 1) * s, a * s:(a + 1) * s] += share.T / 2
    return G


def assemble(L_hat: MatrixPolynomial, region: Sequence[Polynomial],
             plan: DegreePlan | None = None, d_P: int = 0) -> Assembly:
    """Compile the certification problem for a reduced Laplacian.

    Maximize c subject to

        P_bar >= 0,  trace(P_bar) = 1,  R_bar_i >= 0,
        Gram(P Lhat + Lhat^T P) + C(delta) - c I
            - sum_i Gram(R_i * g_i)  >=  0,

    where every Gram image is taken against the degree-d_H power vector,
    C(delta) ranges over the null directions of the Gram expansion, and g_i
    are the region inequalities.  Expanding the final constraint shows that
    on the region the pencil dominates c * |phi(theta)|^2 * I, hence c * I,
    since the power vector contains the constant monomial."""
    rows, cols = L_hat.shape
    if rows != cols:
        raise CertifierError(f"reduced Laplacian must be square, got "
                             f"{L_hat.shape}")
    if rows == 0:
        raise CertifierError("empty reduced Laplacian; need >= 2 agents")
    if not L_hat.is_symmetric(tol=1e-12):
        raise CertifierError("reduced Laplacian is not symmetric")
    s = rows
    r = L_hat.r
    for i, g in enumerate(region):
        if g.r != r:
            raise CertifierError(
                f"region inequality {i} has {g.r} variables, expected {r}")
    region_degrees = [g.degree for g in region]
    if plan is None:
        plan = DegreePlan.auto(L_hat.deg(), region_degrees, d_P=d_P)
    else:
        plan.validate(L_hat.deg(), region_degrees)

    phi_P = power_vector(r, plan.d_P)
    phi_H = power_vector(r, plan.d_H)
    phi_R = [power_vector(r, dr) for dr in plan.d_R]
    pos_H = _positions(phi_H)
    size_H = len(phi_H) * s
    Lc = L_hat.coefficient_matrices()

    prob = sdp.SdpProblem()
    c_index = prob.add_var("c", obj=1.0)
    p_var = prob.add_psd_var(len(phi_P) * s, "P")
    r_vars = [prob.add_psd_var(len(pv) * s, f"R{i}")
              for i, pv in enumerate(phi_R)]
    nulls = gram_null_basis(r, plan.d_H, s)
    delta_indices = [prob.add_var(f"delta{k}") for k in range(len(nulls))]

    prob.add_eq(p_var.inner_coeffs(np.eye(p_var.size)), 1.0)

    coeffs: dict[int, np.ndarray | sparse.csr_array] = {
        c_index: -np.eye(size_H)}
    for k in range(len(p_var.indices)):
        pk = _block_coeffs(p_var.basis_matrix(k), phi_P, s)
        hk: dict[ExponentVec, np.ndarray] = {}
        for e1, A in pk.items():
            for e2, C in Lc.items():
                M = A @ C
                M = M + M.T
                mu = mono_mul(e1, e2)
                if mu in hk:
                    hk[mu] = hk[mu] + M
                else:
                    hk[mu] = M
        coeffs[int(p_var.indices[k])] = sparse.csr_array(
            _gram_base(hk, phi_H, s, pos_H))
    for i, (g, var, pv) in enumerate(zip(region, r_vars, phi_R)):
        for k in range(len(var.indices)):
            rk = _block_coeffs(var.basis_matrix(k), pv, s)
            gk: dict[ExponentVec, np.ndarray] = {}
            for e1, A in rk.items():
                for e2, cf in g.terms.items():
                    mu = mono_mul(e1, e2)
                    if mu in gk:
                        gk[mu] = gk[mu] + cf * A
                    else:
                        gk[mu] = cf * A
            coeffs[int(var.indices[k])] = sparse.csr_array(
                -_gram_base(gk, phi_H, s, pos_H))
    for k, D in enumerate(nulls):
        coeffs[delta_indices[k]] = sparse.csr_array(D)

    main_lmi = prob.add_lmi(np.zeros((size_H, size_H)), coeffs)
    return Assembly(problem=prob, plan=plan, r=r, s=s, c_index=c_index,
                    p_var=p_var, r_vars=r_vars,
                    delta_indices=delta_indices, phi_P=phi_P, phi_H=phi_H,
                    phi_R=phi_R, main_lmi=main_lmi)


@dataclass
class Certificate:
    """Standalone connectivity certificate: the certified bound plus every
    matrix needed to replay the Gram identity."""

    n_agents: int
    r: int
    plan: DegreePlan
    c_star: float
    P_bar: np.ndarray
    R_bars: list[np.ndarray]
    delta: np.ndarray
    threshold: float = CONNECTIVITY_THRESHOLD

    @property
    def connected(self) -> bool:
        return self.c_star > self.threshold

    def to_dict(self) -> dict:
        return {
            "format": "connectivity-certificate/1",
            "n_agents": self.n_agents,
            "r": self.r,
            "degree_plan": self.plan.to_dict(),
            "c_star": self.c_star,
            "threshold": self.threshold,
            "P_bar": self.P_bar.tolist(),
            "R_bars": [R.tolist() for R in self.R_bars],
            "delta": self.delta.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        if d.get("format") != "connectivity-certificate/1":
            raise CertifierError(
                f"unrecognized certificate format {d.get('format')!r}")
        return cls(
            n_agents=int(d["n_agents"]),
            r=int(d["r"]),
            plan=DegreePlan.from_dict(d["degree_plan"]),
            c_star=float(d["c_star"]),
            P_bar=np.asarray(d["P_bar"], dtype=float),
            R_bars=[np.asarray(R, dtype=float) for R in d["R_bars"]],
            delta=np.asarray(d["delta"], dtype=float).reshape(-1),
            threshold=float(d.get("threshold", CONNECTIVITY_THRESHOLD)),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Certificate":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class CertifyResult:
    connected: bool
    c_star: float
    status: sdp.SdpStatus
    certificate: Certificate | None
    solution: sdp.SdpSolution
    assembly: Assembly

    @property
    def ok(self) -> bool:
        """Whether the solve itself is trustworthy (independent of the
        verdict)."""
        return self.solution.ok


def certify(adj: UncertainAdjacency, d_P: int = 0,
            plan: DegreePlan | None = None, tol: float = 1e-8,
            threshold: float = CONNECTIVITY_THRESHOLD, max_iter: int = 200,
            verbose: bool = False) -> CertifyResult:
    """Solve the certification problem for an uncertain adjacency.

    connected is True only when the solver converged and the certified
    bound clears the threshold; any other outcome is inconclusive, never a
    disconnection proof."""
    N = adj.N
    L = laplacian(adj)
    M = reduced_basis(N)
    L_hat = reduced_laplacian(L, M)
    asm = assemble(L_hat, adj.omega, plan=plan, d_P=d_P)
    sol = sdp.solve(asm.problem, tol=tol, max_iter=max_iter, verbose=verbose)
    cert = None
    c_star = float("nan")
    if sol.y is not None:
        y = sol.y
        c_star = float(y[asm.c_index])
        cert = Certificate(
            n_agents=N, r=asm.r, plan=asm.plan, c_star=c_star,
            P_bar=asm.p_var.value(y),
            R_bars=[v.value(y) for v in asm.r_vars],
            delta=np.array([y[i] for i in asm.delta_indices]),
            threshold=threshold)
    connected = bool(sol.ok and c_star > threshold)
    return CertifyResult(connected=connected, c_star=c_star,
                         status=sol.status, certificate=cert, solution=sol,
                         assembly=asm)


@dataclass
class VerifyReport:
    """Outcome of replaying a certificate against the graph data.

    Two independent routes: an algebraic replay of the Gram identity
    (min_eigenvalues, trace_error) and a pointwise sweep over sampled
    parameters (sampled_pencil_margin, sampled_P_margin)."""

    ok: bool
    c_star: float
    min_eigenvalues: list[float]
    trace_error: float
    pencil_margin: float
    sampled_pencil_margin: float
    sampled_P_margin: float
    n_samples: int
    failures: list[str] = field(default_factory=list)


def verify_certificate(cert: Certificate, adj: UncertainAdjacency,
                       n_samples: int = 2000, seed: int = 0,
                       psd_tol: float = 1e-6,
                       sample_tol: float = 1e-6) -> VerifyReport:
    """Re-check a certificate without the solver.

    Replays the Gram identity by packing the stored matrices into a freshly
    assembled problem and reading off block eigenvalues, then independently
    samples the region and checks the pencil dominance numerically at each
    sample point."""
    if cert.n_agents != adj.N:
        raise CertifierError(
            f"certificate is for {cert.n_agents} agents, adjacency has "
            f"{adj.N}")
    if cert.r != adj.r:
        raise CertifierError(
            f"certificate has {cert.r} parameters, adjacency has {adj.r}")
    L = laplacian(adj)
    M = reduced_basis(adj.N)
    L_hat = reduced_laplacian(L, M)
    asm = assemble(L_hat, adj.omega, plan=cert.plan)
    y = asm.solution_vector(cert.c_star, cert.P_bar, cert.R_bars, cert.delta)
    rep = sdp.residuals(asm.problem, y)
    min_eigs = [float(v) for v in rep["min_eigenvalues"]]
    pencil_margin = min_eigs[asm.main_lmi]
    trace_error = float(rep["eq_residual"])

    failures: list[str] = []
    for k, ev in enumerate(min_eigs):
        if k == asm.main_lmi:
            continue
        if ev < -psd_tol:
            failures.append(
                f"stored matrix for block {k} has eigenvalue {ev:.3e}")
    if pencil_margin < -psd_tol:
        failures.append(
            f"Gram identity violated: pencil block eigenvalue "
            f"{pencil_margin:.3e}")
    if trace_error > psd_tol:
        failures.append(f"trace normalization off by {trace_error:.3e}")

    # Pointwise route: evaluate everything numerically at region samples.
    rng = np.random.default_rng(seed)
    thetas = adj.sample_omega(rng, n_samples) if n_samples > 0 else \
        np.zeros((0, adj.r))
    sampled_pencil = float("inf")
    sampled_P = float("inf")
    if len(thetas):
        s = asm.s
        phiP_vals = asm.phi_P.eval_batch(thetas)
        phiH_vals = asm.phi_H.eval_batch(thetas)
        norm2 = np.sum(phiH_vals ** 2, axis=1)
        for t in range(len(thetas)):
            theta = thetas[t]
            Q = np.kron(phiP_vals[t], np.eye(s))
            P_num = Q @ cert.P_bar @ Q.T
            L_num = L_hat(theta)
            H_num = P_num @ L_num + L_num.T @ P_num
            ev_P = float(np.linalg.eigvalsh(P_num)[0])
            ev_H = float(np.linalg.eigvalsh(
                H_num - cert.c_star * norm2[t] * np.eye(s))[0])
            sampled_P = min(sampled_P, ev_P)
            sampled_pencil = min(sampled_pencil, ev_H)
        if sampled_P < -sample_tol:
            failures.append(
                f"sampled P(theta) eigenvalue {sampled_P:.3e}")
        if sampled_pencil < -sample_tol:
            failures.append(
                f"sampled pencil dominance violated by "
                f"{sampled_pencil:.3e}")

    return VerifyReport(ok=not failures, c_star=cert.c_star,
                        min_eigenvalues=min_eigs, trace_error=trace_error,
                        pencil_margin=pencil_margin,
                        sampled_pencil_margin=sampled_pencil,
                        sampled_P_margin=sampled_P,
                        n_samples=len(thetas), failures=failures)


@dataclass
class Lambda2Samples:
    """Sampled algebraic-connectivity sweep over the region."""

    values: np.ndarray
    thetas: np.ndarray
    min_value: float
    argmin: np.ndarray

    @property
    def n_samples(self) -> int:
        return len(self.values)


def sample_lambda2(adj: UncertainAdjacency, n_samples: int = 10000,
                   seed: int | None = None,
                   rng: np.random.Generator | None = None,
                   batch: int = 256) -> Lambda2Samples:
    """Second-smallest Laplacian eigenvalue at sampled region points.

    A purely numerical check, independent of the Gram machinery: draw
    parameters from the region, evaluate the Laplacian, take eigenvalues."""
    if rng is None:
        rng = np.random.default_rng(seed)
    if n_samples <= 0:
        raise CertifierError("n_samples must be positive")
    thetas = adj.sample_omega(rng, n_samples)
    Lc = laplacian(adj).coefficient_matrices()
    N = adj.N
    values = np.empty(n_samples)
    for lo in range(0, n_samples, batch):
        hi = min(lo + batch, n_samples)
        chunk = thetas[lo:hi]
        Lb = np.zeros((hi - lo, N, N))
        for e, C in Lc.items():
            if any(e):
                mono = np.prod(chunk ** np.asarray(e), axis=1)
            else:
                mono = np.ones(hi - lo)
            Lb += mono[:, None, None] * C
        values[lo:hi] = np.linalg.eigvalsh(Lb)[:, 1]
    k = int(np.argmin(values))
    return Lambda2Samples(values=values, thetas=thetas,
                          min_value=float(values[k]),
                          argmin=thetas[k].copy())
