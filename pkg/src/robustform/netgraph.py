"""Sensing graphs, uncertain adjacency matrices, and Laplacian reductions.

Agents interact through a time-varying undirected sensing graph with
hysteresis: a pair becomes an edge when its distance drops to r_s - eps and
the edge is only removed when the distance exceeds r_s.  Formation edges are
designated at setup and are never removed by the update rule; losing one at
runtime is an alarm raised by the simulator's monitors, not something this
module does silently.

Edge weights may depend polynomially on an uncertainty vector theta confined
to a semialgebraic set Omega = {theta : s_i(theta) >= 0}.  Connectedness of
the weighted graph for every theta in Omega is equivalent to positivity of
the second Laplacian eigenvalue throughout Omega, which the certifier module
decides through the reduced Laplacian M^T L M, where the columns of M form a
fixed orthonormal basis of the hyperplane orthogonal to the all-ones vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .polyalg import MatrixPolynomial, Polynomial


class GeometryError(ValueError):
    """Radius bookkeeping that cannot support the barrier construction."""


@dataclass(frozen=True)
class AgentGeometry:
    """Radii and margins shared by every agent.

    r_a   physical agent radius
    r_c   communication-hardware radius (r_c >= r_a)
    r_z   collision-avoidance activation radius
    r_s   sensing radius
    d_s   minimum allowed center distance (safety), d_s >= 2 r_c
    eps   hysteresis margin for edge addition, 0 <= eps <= r_s - r_z
    """

    r_a: float
    r_c: float
    r_z: float
    r_s: float
    d_s: float
    eps: float

    def __post_init__(self):
        if not (0 < self.r_a <= self.r_c < self.r_z < self.r_s):
            raise GeometryError(
                f"need 0 < r_a <= r_c < r_z < r_s, got r_a={self.r_a}, "
                f"r_c={self.r_c}, r_z={self.r_z}, r_s={self.r_s}")
        if self.d_s < 2 * self.r_c:
            raise GeometryError(
                f"need d_s >= 2*r_c, got d_s={self.d_s}, r_c={self.r_c}")
        if self.d_s >= self.r_z:
            raise GeometryError(
                f"need d_s < r_z, got d_s={self.d_s}, r_z={self.r_z}")
        if not (0 <= self.eps <= self.r_s - self.r_z):
            raise GeometryError(
                f"need 0 <= eps <= r_s - r_z, got eps={self.eps}")


@dataclass
class UncertainAdjacency:
    """Symmetric polynomial weight matrix plus the uncertainty set Omega.

    entries     N x N MatrixPolynomial, zero diagonal, symmetric
    omega       list of polynomials s_i; Omega = {theta : all s_i(theta) >= 0}
    box         per-parameter bounds enclosing Omega, used for rejection
                sampling
    """

    N: int
    entries: MatrixPolynomial
    omega: list[Polynomial]
    box: list[tuple[float, float]]

    def __post_init__(self):
        if self.entries.shape != (self.N, self.N):
            raise ValueError(
                f"adjacency shape {self.entries.shape}, expected "
                f"({self.N}, {self.N})")
        for i in range(self.N):
            if not self.entries.entry(i, i).is_zero:
                raise ValueError(f"nonzero diagonal entry at ({i},{i})")
        if not self.entries.is_symmetric(tol=0.0):
            raise ValueError("adjacency is not symmetric")
        r = self.entries.r
        for s in self.omega:
            if s.r != r:
                raise ValueError("Omega polynomial parameter count mismatch")
        if len(self.box) != r:
            raise ValueError(
                f"box has {len(self.box)} intervals, expected {r}")
        for lo, hi in self.box:
            if not lo < hi:
                raise ValueError(f"empty box interval ({lo}, {hi})")

    @property
    def r(self) -> int:
        return self.entries.r

    def sample_omega(self, rng: np.random.Generator, n: int,
                     max_tries: int = 200) -> np.ndarray:
        """Rejection-sample n points of Omega from the bounding box."""
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        out = np.empty((0, self.r))
        for _ in range(max_tries):
            cand = rng.uniform(lo, hi, size=(max(n, 64), self.r))
            keep = np.ones(cand.shape[0], dtype=bool)
            for s in self.omega:
                keep &= s.eval_batch(cand) >= 0.0
            out = np.vstack([out, cand[keep]])
            if out.shape[0] >= n:
                return out[:n]
        raise RuntimeError(
            f"could not draw {n} Omega samples from the box; got "
            f"{out.shape[0]} (is the box far larger than Omega?)")


@dataclass(frozen=True)
class TopologyState:
    """Current undirected edge set; pairs are stored as (i, j) with i < j."""

    n_agents: int
    edges: frozenset[tuple[int, int]]
    formation_edges: frozenset[tuple[int, int]]
    last_switch_time: float = 0.0

    def __post_init__(self):
        for (i, j) in self.edges | self.formation_edges:
            if not (0 <= i < j < self.n_agents):
                raise ValueError(f"bad edge ({i},{j}) for N={self.n_agents}")

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges


def canon_edge(i: int, j: int) -> tuple[int, int]:
    if i == j:
        raise ValueError("self loop")
    return (i, j) if i < j else (j, i)


def laplacian(G):
    """Graph Laplacian Delta - G for a numeric or polynomial adjacency."""
    if isinstance(G, UncertainAdjacency):
        G = G.entries
    if isinstance(G, MatrixPolynomial):
        if not G.is_symmetric(tol=0.0):
            raise ValueError("adjacency is not symmetric")
        N = G.rows
        for i in range(N):
            if not G.entry(i, i).is_zero:
                raise ValueError("adjacency has nonzero diagonal")
        L = MatrixPolynomial.zeros(N, N, G.r)
        for i in range(N):
            deg = Polynomial.zero(G.r)
            for j in range(N):
                if i != j:
                    deg = deg + G.entry(i, j)
                    L.set_entry(i, j, -G.entry(i, j))
            L.set_entry(i, i, deg)
        return L
    G = np.asarray(G, dtype=float)
    if not np.allclose(G, G.T, atol=0.0):
        raise ValueError("adjacency is not symmetric")
    if np.any(np.abs(np.diag(G)) > 0):
        raise ValueError("adjacency has nonzero diagonal")
    return np.diag(G.sum(axis=1)) - G


def reduced_basis(N: int) -> np.ndarray:
    """Deterministic orthonormal basis of the hyperplane {x : 1^T x = 0}.

    Columns are the Helmert vectors v_k = (1,...,1,-k,0,...,0)/sqrt(k(k+1)),
    giving an N x (N-1) matrix M with M^T M = I and 1^T M = 0."""
    if N < 2:
        raise ValueError("need at least two agents")
    M = np.zeros((N, N - 1))
    for k in range(1, N):
        M[:k, k - 1] = 1.0
        M[k, k - 1] = -k
        M[:, k - 1] /= np.sqrt(k * (k + 1))
    return M


def reduced_laplacian(L, M: np.ndarray):
    """M^T L M; drops the trivial all-ones eigenspace.

    Connectedness for a given theta is exactly positive definiteness of the
    reduced matrix there."""
    if isinstance(L, MatrixPolynomial):
        coeffs = {e: M.T @ C @ M for e, C in L.coefficient_matrices().items()}
        k = M.shape[1]
        return MatrixPolynomial.from_coefficient_matrices(k, k, L.r, coeffs)
    L = np.asarray(L, dtype=float)
    return M.T @ L @ M


def update_edges(positions: np.ndarray, topo: TopologyState,
                 geom: AgentGeometry, t: float = 0.0) -> TopologyState:
    """One hysteresis update of the edge set.

    Adds (i, j) when distance(i, j) <= r_s - eps and the edge is absent;
    removes a non-formation edge when distance(i, j) > r_s.  Formation edges
    are never removed here."""
    positions = np.asarray(positions, dtype=float)
    N = topo.n_agents
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    edges = set(topo.edges)
    changed = False
    for i in range(N):
        for j in range(i + 1, N):
            e = (i, j)
            if e in edges:
                if dist[i, j] > geom.r_s and e not in topo.formation_edges:
                    edges.remove(e)
                    changed = True
            else:
                if dist[i, j] <= geom.r_s - geom.eps:
                    edges.add(e)
                    changed = True
    if not changed:
        return topo
    return TopologyState(N, frozenset(edges), topo.formation_edges,
                         last_switch_time=t)


def neighbor_sets(i: int, positions: np.ndarray, topo: TopologyState,
                  geom: AgentGeometry
                  ) -> tuple[set[int], set[int], set[int]]:
    """(sensing neighbors, formation neighbors among them, collision-zone
    neighbors among them) for agent i.

    Zone membership uses a strict distance test dist < r_z."""
    positions = np.asarray(positions, dtype=float)
    ns: set[int] = set()
    nsf: set[int] = set()
    nsz: set[int] = set()
    for j in range(topo.n_agents):
        if j == i or not topo.has_edge(i, j):
            continue
        ns.add(j)
        if canon_edge(i, j) in topo.formation_edges:
            nsf.add(j)
        if np.linalg.norm(positions[i] - positions[j]) < geom.r_z:
            nsz.add(j)
    return ns, nsf, nsz


def connected_components(N: int, edges) -> int:
    """Number of connected components by union-find."""
    parent = list(range(N))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (i, j) in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    return len({find(i) for i in range(N)})


def is_connected(N: int, edges) -> bool:
    return connected_components(N, edges) == 1


@dataclass(frozen=True)
class AssumptionResult:
    name: str
    passed: bool
    skipped: bool = False
    reason: str = ""
    violations: tuple = ()


@dataclass(frozen=True)
class AssumptionReport:
    results: tuple[AssumptionResult, ...]

    @property
    def all_pass(self) -> bool:
        return all(r.passed or r.skipped for r in self.results)

    def get(self, name: str) -> AssumptionResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def summary_lines(self) -> list[str]:
        lines = []
        for r in self.results:
            if r.skipped:
                status = f"SKIPPED ({r.reason})"
            else:
                status = "PASS" if r.passed else "FAIL"
            lines.append(f"{r.name}: {status}")
            for v in r.violations:
                lines.append(f"  {v}")
        return lines


def validate_assumptions(tau: np.ndarray, formation_edges,
                         initial_positions: np.ndarray, geom: AgentGeometry,
                         overrides: dict[str, str] | None = None
                         ) -> AssumptionReport:
    """Check the three setup assumptions.

    A1: every formation pair's desired distance lies in [r_z, r_s - eps].
    A2: every formation pair is within sensing range (r_s - eps) at t0, so
        the initial edge set contains the formation edges.
    A3: r_s - ||tau_ij|| > d_s + ||tau_ij|| for formation pairs, i.e. the
        sensing-maintenance barrier's radius strictly exceeds the largest
        formation error at which a collision could occur.

    overrides maps an assumption name to a reason string; an overridden
    assumption is reported as skipped and does not fail the report."""
    tau = np.asarray(tau, dtype=float)
    initial_positions = np.asarray(initial_positions, dtype=float)
    overrides = overrides or {}
    fe = sorted(canon_edge(i, j) for (i, j) in formation_edges)
    results = []

    def finish(name, violations):
        if name in overrides:
            return AssumptionResult(name, passed=False, skipped=True,
                                    reason=overrides[name],
                                    violations=tuple(violations))
        return AssumptionResult(name, passed=not violations,
                                violations=tuple(violations))

    v1 = []
    for (i, j) in fe:
        d = float(np.linalg.norm(tau[i] - tau[j]))
        if not (geom.r_z <= d <= geom.r_s - geom.eps):
            v1.append(f"pair ({i},{j}): desired distance {d:.4f} outside "
                      f"[{geom.r_z}, {geom.r_s - geom.eps}]")
    results.append(finish("A1", v1))

    v2 = []
    for (i, j) in fe:
        d = float(np.linalg.norm(initial_positions[i] - initial_positions[j]))
        if d > geom.r_s - geom.eps:
            v2.append(f"pair ({i},{j}): initial distance {d:.4f} > "
                      f"{geom.r_s - geom.eps}")
    results.append(finish("A2", v2))

    v3 = []
    for (i, j) in fe:
        d = float(np.linalg.norm(tau[i] - tau[j]))
        if not (geom.r_s - d > geom.d_s + d):
            v3.append(f"pair ({i},{j}): r_s - {d:.4f} = {geom.r_s - d:.4f} "
                      f"not > d_s + {d:.4f} = {geom.d_s + d:.4f}")
    results.append(finish("A3", v3))

    return AssumptionReport(tuple(results))
