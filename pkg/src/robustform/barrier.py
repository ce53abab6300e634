"""Barrier potentials for edge keeping and collision avoidance.

Two families of scalar potentials drive the controller.  The edge-keeping
barrier psi_e grows from zero at perfect formation to its cap mu1 exactly
when a formation pair reaches its sensing margin, so bounded total energy
keeps formation edges alive.  The collision barrier psi_c vanishes at the
desired separation and climbs to its cap mu2 exactly at the safety distance
d_s, so bounded energy keeps agents apart.

The caps are not free parameters: tune_mu picks them above the worst-case
initial energy plus everything zone entries can ever add, which is what
makes the invariance argument go through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netgraph import AgentGeometry, TopologyState


class DomainViolation(RuntimeError):
    """A barrier was evaluated outside its admissible domain.

    During a simulation this means the invariance guarantee already failed
    upstream: either the caps were tuned wrong or the integrator stepped
    through the boundary."""


class TuneError(RuntimeError):
    pass


@dataclass(frozen=True)
class BarrierParams:
    """Barrier caps and the edge-keeping margin epsilon-hat."""

    mu1: float
    mu2: float
    eps_hat: float

    def __post_init__(self):
        if not (self.mu1 > 0 and self.mu2 > 0):
            raise ValueError(
                f"caps must be positive, got mu1={self.mu1}, "
                f"mu2={self.mu2}")
        if not self.eps_hat > 0:
            raise ValueError(f"eps_hat must be positive, got {self.eps_hat}")


def eps_hat_default(geom: AgentGeometry) -> float:
    """Margin below the sensing radius used by the edge-keeping argument.

    Half of min{d_s/2 - r_c, eps} when that interval is nonempty.  The
    boundary geometry d_s = 2 r_c leaves the interval empty; there the
    margin falls back to eps/2, which preserves every monitored invariant
    (the interval's role is slack between the collision cap and the hard
    radius, and the fallback only affects how close to the sensing boundary
    an edge may start)."""
    upper = min(geom.d_s / 2.0 - geom.r_c, geom.eps)
    if upper > 0:
        return upper / 2.0
    return geom.eps / 2.0


def psi_e(q: float, r_hat_s: float, mu1: float) -> float:
    """Edge-keeping barrier at formation error q = ||y_ij||.

    q^2 / (r_hat_s - q + r_hat_s^2/mu1); equals mu1 exactly at
    q = r_hat_s.  mu1 = inf gives the envelope q^2 / (r_hat_s - q)."""
    if q < 0:
        raise ValueError(f"q is a norm, got {q}")
    if r_hat_s <= 0:
        raise ValueError(f"r_hat_s must be positive, got {r_hat_s}")
    D = r_hat_s - q + r_hat_s * r_hat_s / mu1
    if D <= 0:
        raise DomainViolation(
            f"psi_e denominator {D:.3e} <= 0 at q={q:.6f}, "
            f"r_hat_s={r_hat_s:.6f}")
    return q * q / D


def grad_psi_e(y_ij: np.ndarray, r_hat_s: float, mu1: float) -> np.ndarray:
    """Gradient of psi_e with respect to the first agent's position.

    ((2 D + q) / D^2) * y_ij with D the psi_e denominator; finite as
    q -> 0."""
    y_ij = np.asarray(y_ij, dtype=float)
    q = float(np.linalg.norm(y_ij))
    D = r_hat_s - q + r_hat_s * r_hat_s / mu1
    if D <= 0:
        raise DomainViolation(
            f"psi_e denominator {D:.3e} <= 0 at q={q:.6f}, "
            f"r_hat_s={r_hat_s:.6f}")
    return ((2.0 * D + q) / (D * D)) * y_ij


def psi_c(p: float, tau_norm: float, d_s: float, mu2: float) -> float:
    """Collision barrier at separation p = ||x_ij||.

    (p - tau_norm)^2 / (p - d_s + (d_s - tau_norm)^2/mu2); vanishes at the
    desired separation and equals mu2 exactly at p = d_s.  mu2 = inf gives
    the envelope (p - tau_norm)^2 / (p - d_s)."""
    if p < 0:
        raise ValueError(f"p is a norm, got {p}")
    gap = d_s - tau_norm
    D = p - d_s + gap * gap / mu2
    if D <= 0:
        raise DomainViolation(
            f"psi_c denominator {D:.3e} <= 0 at p={p:.6f}, "
            f"tau_norm={tau_norm:.6f}, d_s={d_s:.6f}")
    diff = p - tau_norm
    return diff * diff / D


def grad_psi_c(y_ij: np.ndarray, tau_ij: np.ndarray, d_s: float,
               mu2: float) -> np.ndarray:
    """Gradient of psi_c with respect to the first agent's position.

    Chain rule through p = ||y_ij + tau_ij||; finite as p -> tau_norm."""
    y_ij = np.asarray(y_ij, dtype=float)
    tau_ij = np.asarray(tau_ij, dtype=float)
    x = y_ij + tau_ij
    p = float(np.linalg.norm(x))
    if p == 0.0:
        raise DomainViolation(
            "psi_c gradient singular at zero separation; collision "
            "avoidance has already failed")
    tau_norm = float(np.linalg.norm(tau_ij))
    gap = d_s - tau_norm
    D = p - d_s + gap * gap / mu2
    if D <= 0:
        raise DomainViolation(
            f"psi_c denominator {D:.3e} <= 0 at p={p:.6f}, "
            f"tau_norm={tau_norm:.6f}, d_s={d_s:.6f}")
    diff = p - tau_norm
    dpsi_dp = (2.0 * diff * D - diff * diff) / (D * D)
    return dpsi_dp * x / p


def zone_pairs_at(positions: np.ndarray, topo: TopologyState,
                  geom: AgentGeometry) -> frozenset:
    """Connected pairs currently inside the collision zone (dist < r_z)."""
    positions = np.asarray(positions, dtype=float)
    out = set()
    for (i, j) in topo.edges:
        if np.linalg.norm(positions[i] - positions[j]) < geom.r_z:
            out.add((i, j))
    return frozenset(out)


def energy_W(positions: np.ndarray, velocities: np.ndarray,
             tau: np.ndarray, topo: TopologyState, geom: AgentGeometry,
             G: np.ndarray, params: BarrierParams,
             zone_pairs=None) -> float:
    """Composite energy: barriers, Laplacian quadratic, kinetic term.

    W = sum over formation pairs of psi_e
      + sum over zone pairs of psi_c
      + 1/2 sum over connected pairs of G_ij ||y_ij||^2
      + 1/2 sum over agents of ||rho_i||^2.

    zone_pairs defaults to the pairs currently within r_z; passing an
    explicit set evaluates W against a frozen zone membership, which is
    what the drift monitor needs across a step."""
    positions = np.asarray(positions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    tau = np.asarray(tau, dtype=float)
    G = np.asarray(G, dtype=float)
    y = positions - tau
    if zone_pairs is None:
        zone_pairs = zone_pairs_at(positions, topo, geom)
    W = 0.0
    for (i, j) in topo.formation_edges:
        tau_norm = float(np.linalg.norm(tau[i] - tau[j]))
        W += psi_e(float(np.linalg.norm(y[i] - y[j])),
                   geom.r_s - tau_norm, params.mu1)
    for (i, j) in zone_pairs:
        W += psi_c(float(np.linalg.norm(positions[i] - positions[j])),
                   float(np.linalg.norm(tau[i] - tau[j])),
                   geom.d_s, params.mu2)
    for (i, j) in topo.edges:
        d = y[i] - y[j]
        W += 0.5 * G[i, j] * float(d @ d)
    W += 0.5 * float(np.sum(velocities * velocities))
    return W


@dataclass
class TuneResult:
    """Tuned caps plus the quantities that justify them."""

    params: BarrierParams
    mu_safe: float
    w0: float
    zone_term: float
    n_steps: int
    residual: float


def tune_mu(positions: np.ndarray, velocities: np.ndarray, tau: np.ndarray,
            topo: TopologyState, geom: AgentGeometry,
            weight_samples, margin: float = 1.1, max_iter: int = 100,
            tol: float = 1e-9) -> TuneResult:
    """Pick barrier caps that dominate the worst-case energy.

    The caps must beat mu_safe(mu) = W(t0; mu) + N(N-1)/2 * Psi_zone(mu),
    where Psi_zone bounds what one pair entering the collision zone can add
    and W(t0) is maximized over the supplied weight matrices.  mu_safe is
    increasing and bounded in mu (the envelope caps at mu = inf), so
    seeding at margin times the envelope value and iterating
    mu <- margin * mu_safe(mu) reaches self-consistency immediately in
    exact arithmetic; the loop guards against that ever failing and raises
    with a trace when it does."""
    positions = np.asarray(positions, dtype=float)
    tau = np.asarray(tau, dtype=float)
    N = positions.shape[0]
    eps_hat = eps_hat_default(geom)
    weight_samples = [np.asarray(G, dtype=float) for G in weight_samples]
    if not weight_samples:
        raise TuneError("need at least one weight matrix sample")

    pair_taus = []
    for i in range(N):
        for j in range(i + 1, N):
            tn = float(np.linalg.norm(tau[i] - tau[j]))
            if tn <= geom.d_s:
                raise TuneError(
                    f"infeasible formation: desired distance {tn:.4f} of "
                    f"pair ({i},{j}) is not above d_s={geom.d_s}")
            pair_taus.append(tn)

    def mu_safe_at(mu: float) -> tuple[float, float, float]:
        params = BarrierParams(mu, mu, eps_hat)
        try:
            w0 = max(energy_W(positions, velocities, tau, topo, geom, G,
                              params) for G in weight_samples)
        except DomainViolation as err:
            raise TuneError(
                f"initial state is outside the barrier envelope: {err}"
            ) from err
        zone = max(psi_c(geom.r_z, tn, geom.d_s, mu) for tn in pair_taus) \
            if pair_taus else 0.0
        zone_total = 0.5 * N * (N - 1) * zone
        return w0 + zone_total, w0, zone_total

    envelope, _, _ = mu_safe_at(math.inf)
    mu = margin * envelope if envelope > 0 else 1.0
    trace = []
    for step in range(1, max_iter + 1):
        need, w0, zone_total = mu_safe_at(mu)
        residual = max(0.0, margin * need - mu)
        trace.append((mu, need, residual))
        if residual <= tol * max(1.0, mu):
            params = BarrierParams(mu, mu, eps_hat)
            return TuneResult(params=params, mu_safe=need, w0=w0,
                              zone_term=zone_total, n_steps=step,
                              residual=residual)
        mu = margin * need
    lines = "\n".join(
        f"  step {k + 1}: mu={m:.6e} mu_safe={n:.6e} residual={r:.3e}"
        for k, (m, n, r) in enumerate(trace[-10:]))
    raise TuneError(
        f"cap tuning did not reach self-consistency in {max_iter} "
        f"iterations; last steps:\n{lines}")
