"""Graph structure, Laplacian, hysteresis, and setup-assumption tests.

Laplacian spectra for the small fixed graphs are standard results that can
be checked by hand: the path on three vertices has eigenvalues {0, 1, 3},
the complete graph on N vertices has {0, N, ..., N}."""

import numpy as np
import pytest

from robustform.netgraph import (AgentGeometry, AssumptionReport,
                                 GeometryError, TopologyState,
                                 UncertainAdjacency, canon_edge,
                                 connected_components, is_connected,
                                 laplacian, neighbor_sets, reduced_basis,
                                 reduced_laplacian, update_edges,
                                 validate_assumptions)
from robustform.polyalg import MatrixPolynomial, Polynomial

GEOM = AgentGeometry(r_a=0.5, r_c=0.75, r_z=2.5, r_s=8.0, d_s=1.875,
                     eps=0.1)


def complete_adjacency(N):
    return np.ones((N, N)) - np.eye(N)


class TestGeometry:

    def test_valid(self):
        assert GEOM.r_s == 8.0

    @pytest.mark.parametrize("kw", [
        dict(r_a=0.0),
        dict(r_c=0.4),
        dict(r_z=9.0),
        dict(r_z=0.7),
        dict(d_s=1.0),
        dict(d_s=2.6),
        dict(eps=-0.1),
        dict(eps=6.0),
    ])
    def test_invalid(self, kw):
        base = dict(r_a=0.5, r_c=0.75, r_z=2.5, r_s=8.0, d_s=1.875, eps=0.1)
        base.update(kw)
        with pytest.raises(GeometryError):
            AgentGeometry(**base)


class TestLaplacian:

    def test_path3_spectrum(self):
        G = np.zeros((3, 3))
        G[0, 1] = G[1, 0] = 1.0
        G[1, 2] = G[2, 1] = 1.0
        L = laplacian(G)
        eig = np.sort(np.linalg.eigvalsh(L))
        assert np.allclose(eig, [0.0, 1.0, 3.0], atol=1e-12)

    def test_complete4_lambda2(self):
        L = laplacian(complete_adjacency(4))
        eig = np.sort(np.linalg.eigvalsh(L))
        assert eig[1] == pytest.approx(4.0, abs=1e-12)

    def test_rows_sum_to_zero(self):
        rng = np.random.default_rng(7)
        W = rng.uniform(0.5, 2.0, size=(5, 5))
        G = np.triu(W, 1) + np.triu(W, 1).T
        L = laplacian(G)
        assert np.allclose(L.sum(axis=1), 0.0, atol=1e-12)
        assert np.allclose(L, L.T)

    def test_rejects_asymmetric(self):
        G = np.zeros((3, 3))
        G[0, 1] = 1.0
        with pytest.raises(ValueError):
            laplacian(G)

    def test_rejects_diagonal(self):
        G = complete_adjacency(3) + np.eye(3)
        with pytest.raises(ValueError):
            laplacian(G)

    def test_polynomial_matches_numeric_samples(self):
        # K3 with one uncertain weight 1 + 0.3 theta on edge (0,1).
        t = Polynomial.variable(1, 0)
        w01 = Polynomial.constant(1, 1.0) + t.scale(0.3)
        one = Polynomial.constant(1, 1.0)
        zero = Polynomial.zero(1)
        A = MatrixPolynomial(3, 3, 1, [
            zero, w01, one,
            w01, zero, one,
            one, one, zero,
        ])
        L = laplacian(A)
        for th in (-1.0, 0.0, 0.5, 2.0):
            num = complete_adjacency(3)
            num[0, 1] = num[1, 0] = 1.0 + 0.3 * th
            assert np.allclose(L(np.array([th])), laplacian(num), atol=1e-12)


class TestReducedBasis:

    @pytest.mark.parametrize("N", [2, 3, 6, 11, 50])
    def test_orthonormal_and_ones_free(self, N):
        M = reduced_basis(N)
        assert M.shape == (N, N - 1)
        assert np.allclose(M.T @ M, np.eye(N - 1), atol=1e-12)
        assert np.allclose(np.ones(N) @ M, 0.0, atol=1e-12)

    def test_deterministic(self):
        assert np.array_equal(reduced_basis(9), reduced_basis(9))

    def test_k2_reduced_laplacian(self):
        # K2 has Laplacian [[1,-1],[-1,1]]; its nontrivial eigenvalue is 2.
        L = laplacian(complete_adjacency(2))
        R = reduced_laplacian(L, reduced_basis(2))
        assert R.shape == (1, 1)
        assert R[0, 0] == pytest.approx(2.0, abs=1e-12)

    def test_reduced_spectrum_drops_zero(self):
        rng = np.random.default_rng(3)
        W = rng.uniform(0.1, 1.0, size=(6, 6))
        G = np.triu(W, 1) + np.triu(W, 1).T
        L = laplacian(G)
        R = reduced_laplacian(L, reduced_basis(6))
        full = np.sort(np.linalg.eigvalsh(L))
        red = np.sort(np.linalg.eigvalsh(R))
        assert np.allclose(red, full[1:], atol=1e-10)

    def test_polynomial_reduction_commutes_with_eval(self):
        t = Polynomial.variable(1, 0)
        w = Polynomial.constant(1, 2.0) + t
        zero = Polynomial.zero(1)
        A = MatrixPolynomial(2, 2, 1, [zero, w, w, zero])
        L = laplacian(A)
        M = reduced_basis(2)
        R = reduced_laplacian(L, M)
        th = np.array([0.7])
        assert np.allclose(R(th), M.T @ L(th) @ M, atol=1e-12)
        assert R(th)[0, 0] == pytest.approx(2 * 2.7, abs=1e-12)


class TestTopology:

    def make_topo(self):
        fe = frozenset({(0, 1), (1, 2)})
        return TopologyState(4, frozenset({(0, 1), (1, 2), (2, 3)}), fe)

    def test_hysteresis_add(self):
        # Agents 0 and 3 sit exactly at r_s - eps: edge is added.
        topo = TopologyState(2, frozenset(), frozenset())
        pos = np.array([[0.0, 0.0], [GEOM.r_s - GEOM.eps, 0.0]])
        new = update_edges(pos, topo, GEOM, t=1.5)
        assert new.has_edge(0, 1)
        assert new.last_switch_time == 1.5

    def test_no_add_inside_band(self):
        # Distance in (r_s - eps, r_s]: no addition, and an existing edge
        # also survives, which is the hysteresis band doing its job.
        pos = np.array([[0.0, 0.0], [GEOM.r_s - GEOM.eps / 2, 0.0]])
        empty = TopologyState(2, frozenset(), frozenset())
        assert not update_edges(pos, empty, GEOM).has_edge(0, 1)
        present = TopologyState(2, frozenset({(0, 1)}), frozenset())
        assert update_edges(pos, present, GEOM).has_edge(0, 1)

    def test_remove_beyond_rs(self):
        pos = np.array([[0.0, 0.0], [GEOM.r_s + 0.01, 0.0]])
        present = TopologyState(2, frozenset({(0, 1)}), frozenset())
        new = update_edges(pos, present, GEOM, t=2.0)
        assert not new.has_edge(0, 1)
        assert new.last_switch_time == 2.0

    def test_formation_edge_never_removed(self):
        pos = np.array([[0.0, 0.0], [GEOM.r_s + 5.0, 0.0]])
        present = TopologyState(2, frozenset({(0, 1)}),
                                frozenset({(0, 1)}))
        assert update_edges(pos, present, GEOM).has_edge(0, 1)

    def test_unchanged_returns_same_object(self):
        pos = np.array([[0.0, 0.0], [3.0, 0.0]])
        present = TopologyState(2, frozenset({(0, 1)}), frozenset())
        assert update_edges(pos, present, GEOM, t=9.0) is present

    def test_neighbor_sets(self):
        topo = self.make_topo()
        pos = np.array([[0.0, 0.0], [2.0, 0.0], [4.0, 0.0], [6.0, 0.0]])
        ns, nsf, nsz = neighbor_sets(1, pos, topo, GEOM)
        assert ns == {0, 2}
        assert nsf == {0, 2}
        assert nsz == {0, 2}
        ns0, nsf0, nsz0 = neighbor_sets(0, pos, topo, GEOM)
        assert ns0 == {1}
        # Distance 2.0 < r_z so agent 1 is in agent 0's zone set.
        assert nsz0 == {1}
        ns3, nsf3, nsz3 = neighbor_sets(3, pos, topo, GEOM)
        assert ns3 == {2}
        assert nsf3 == set()

    def test_canon_edge(self):
        assert canon_edge(3, 1) == (1, 3)
        with pytest.raises(ValueError):
            canon_edge(2, 2)

    def test_connectivity_helpers(self):
        assert is_connected(3, [(0, 1), (1, 2)])
        assert not is_connected(3, [(0, 1)])
        assert connected_components(5, [(0, 1), (2, 3)]) == 3


class TestUncertainAdjacency:

    def make(self):
        t = Polynomial.variable(1, 0)
        w = Polynomial.constant(1, 1.0) + t.scale(0.5)
        zero = Polynomial.zero(1)
        ent = MatrixPolynomial(2, 2, 1, [zero, w, w, zero])
        # Omega = [-1, 1] described by 1 - theta^2 >= 0.
        s = Polynomial.constant(1, 1.0) - t * t
        return UncertainAdjacency(2, ent, [s], [(-1.2, 1.2)])

    def test_valid(self):
        ua = self.make()
        assert ua.r == 1

    def test_sample_omega_in_set(self):
        ua = self.make()
        pts = ua.sample_omega(np.random.default_rng(0), 500)
        assert pts.shape == (500, 1)
        assert np.all(np.abs(pts) <= 1.0)
        # The sampler has to actually cover Omega, not a corner of it.
        assert pts.min() < -0.8 and pts.max() > 0.8

    def test_rejects_nonzero_diagonal(self):
        t = Polynomial.variable(1, 0)
        ent = MatrixPolynomial(2, 2, 1, [t, t, t, t])
        with pytest.raises(ValueError):
            UncertainAdjacency(2, ent, [], [(-1, 1)])

    def test_rejects_asymmetric(self):
        zero = Polynomial.zero(1)
        one = Polynomial.constant(1, 1.0)
        ent = MatrixPolynomial(2, 2, 1, [zero, one, zero, zero])
        with pytest.raises(ValueError):
            UncertainAdjacency(2, ent, [], [(-1, 1)])

    def test_rejects_bad_box(self):
        t = Polynomial.variable(1, 0)
        w = Polynomial.constant(1, 1.0) + t
        zero = Polynomial.zero(1)
        ent = MatrixPolynomial(2, 2, 1, [zero, w, w, zero])
        with pytest.raises(ValueError):
            UncertainAdjacency(2, ent, [], [])


class TestAssumptions:

    def line_setup(self):
        # Two agents, desired separation 3.5 along x.
        tau = np.array([[0.0, 0.0], [3.5, 0.0]])
        pos = np.array([[0.0, 0.0], [3.6, 0.0]])
        return tau, [(0, 1)], pos

    def test_a3_fails_for_wide_formation(self):
        # r_s - 3.5 = 4.5 is not greater than d_s + 3.5 = 5.375.
        tau, fe, pos = self.line_setup()
        rep = validate_assumptions(tau, fe, pos, GEOM)
        assert rep.get("A1").passed
        assert rep.get("A2").passed
        a3 = rep.get("A3")
        assert not a3.passed and not a3.skipped
        assert not rep.all_pass

    def test_a3_passes_for_tight_formation(self):
        tau = np.array([[0.0, 0.0], [2.8, 0.0]])
        pos = np.array([[0.0, 0.0], [2.9, 0.0]])
        rep = validate_assumptions(tau, [(0, 1)], pos, GEOM)
        # r_s - 2.8 = 5.2 > d_s + 2.8 = 4.675.
        assert rep.all_pass
        assert all(not r.skipped for r in rep.results)

    def test_a1_bounds(self):
        # Desired distance below r_z fails A1.
        tau = np.array([[0.0, 0.0], [2.0, 0.0]])
        pos = np.array([[0.0, 0.0], [2.0, 0.0]])
        rep = validate_assumptions(tau, [(0, 1)], pos, GEOM)
        assert not rep.get("A1").passed
        assert "pair (0,1)" in rep.get("A1").violations[0]

    def test_a2_initial_range(self):
        tau = np.array([[0.0, 0.0], [2.8, 0.0]])
        pos = np.array([[0.0, 0.0], [7.95, 0.0]])
        rep = validate_assumptions(tau, [(0, 1)], pos, GEOM)
        assert not rep.get("A2").passed

    def test_override_reports_skipped(self):
        tau, fe, pos = self.line_setup()
        rep = validate_assumptions(tau, fe, pos, GEOM,
                                   overrides={"A3": "wide-formation demo"})
        a3 = rep.get("A3")
        assert a3.skipped and not a3.passed
        assert rep.all_pass
        text = "\n".join(rep.summary_lines())
        assert "A3: SKIPPED (wide-formation demo)" in text

    def test_non_formation_pairs_ignored(self):
        # Same wide pair but no formation edge between them: nothing to
        # check, so every assumption passes vacuously.
        tau, _, pos = self.line_setup()
        rep = validate_assumptions(tau, [], pos, GEOM)
        assert rep.all_pass
