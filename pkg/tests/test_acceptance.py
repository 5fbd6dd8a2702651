"""Acceptance suite.

Each ``test_criterion_NN_*`` function checks one acceptance criterion at its
stated tolerance and time budget. The terminal summary prints one PASS/FAIL
line per criterion. Run directly with ``python tests/test_acceptance.py``.
"""
import itertools
import time
from contextlib import contextmanager

import numpy as np
import pytest

import revmc as r
from revmc.parameterization import st_jacobian_rank

from conftest import (
    RUNNING_EDGES,
    complete_graph,
    cycle_graph,
    grid_graph,
    petersen_graph,
    random_markov_on,
    random_tree,
)

ARCS = ["1->2", "1->4", "2->3", "2->4", "3->4", "2->1", "4->1", "3->2", "4->2", "4->3"]
# incidence matrix, columns in the input edge order 12, 23, 34, 14, 24
GAMMA = [
    [1, 0, 0, 1, 0],
    [1, 1, 0, 0, 1],
    [0, 1, 1, 0, 0],
    [0, 0, 1, 1, 1],
]
E_BLOCK = [
    [1, 0, 0, 0, 0, 1, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 0, 1],
]
U_ROWS = {
    (1,): [1, 1, 0, 0, 0, -1, -1, 0, 0, 0],
    (3,): [0, 0, -1, 0, 1, 0, 0, 1, 0, -1],
    (1, 2): [0, 1, 1, 1, 0, 0, -1, -1, -1, 0],
}
# arc sets of the six cycles
CYCLE_ARCS = [
    {"1->2", "2->4", "4->1"},
    {"1->4", "4->2", "2->1"},
    {"2->3", "3->4", "4->2"},
    {"2->4", "4->3", "3->2"},
    {"1->2", "2->3", "3->4", "4->1"},
    {"1->4", "4->3", "3->2", "2->1"},
]
Z_A = [1, -1, 0, 1, 0, -1, 1, 0, -1, 0]
Z_B = [0, 0, 1, -1, 1, 0, 0, -1, 1, -1]
FAMILY = [(1,), (3,), (1, 2)]


@contextmanager
def budget(seconds):
    t0 = time.perf_counter()
    yield
    elapsed = time.perf_counter() - t0
    assert elapsed < seconds, f"took {elapsed:.2f}s, budget {seconds}s"


def test_criterion_01_example_graph_structure(running):
    with budget(1.0):
        cycles = r.enumerate_cycles(running)
        assert len(cycles) == 6
        assert sorted(map(sorted, (set(c.arc_labels()) for c in cycles))) == sorted(map(sorted, CYCLE_ARCS))
        G = r.incidence_matrix(running)
        cols = running.edge_labels()
        order = [cols.index(f"{a}-{b}") for a, b in RUNNING_EDGES]
        assert G[:, order].tolist() == GAMMA
        mm = r.model_matrix(running, FAMILY)
        assert mm.column_labels() == ARCS
        assert mm.E.tolist() == E_BLOCK
        assert mm.U.tolist() == list(U_ROWS.values())
        assert mm.A.tolist() == E_BLOCK + list(U_ROWS.values())


def test_criterion_02_rank_and_lattice(running):
    with budget(1.0):
        mm = r.model_matrix(running, FAMILY)
        assert mm.rank() == 8 == running.n_edges + running.n_vertices - 1
        basis = r.lattice_basis(mm)
        assert running.n_arcs - mm.rank() == len(basis) == 2
        B = np.array([b.entries for b in basis], dtype=np.int64)
        T = np.array([Z_A, Z_B], dtype=np.int64)
        # solve B = X T exactly on two pivot columns where T is invertible
        cols = next(c for c in itertools.combinations(range(10), 2)
                    if round(np.linalg.det(T[:, c].astype(float))) != 0)
        Tc = T[:, cols]
        det = int(round(np.linalg.det(Tc.astype(float))))
        adj = np.array([[Tc[1, 1], -Tc[0, 1]], [-Tc[1, 0], Tc[0, 0]]])
        num = B[:, cols] @ adj
        assert np.all(num % det == 0)
        X = num // det
        assert np.array_equal(X @ T, B)
        assert abs(int(round(np.linalg.det(X.astype(float))))) == 1


def test_criterion_03_kolmogorov_round_trip():
    graphs = [r.build_graph(RUNNING_EDGES), cycle_graph(4), complete_graph(4), petersen_graph(), grid_graph(3, 3)]
    with budget(10.0):
        for g in graphs:
            for seed in range(100):
                P, params = r.sample_reversible(g, seed)
                assert r.certify_reversibility(P, tol=1e-9).reversible
                assert r.check_kolmogorov_exhaustive(P, tol=1e-9).holds
                assert r.check_detailed_balance(P, r.kappa_from_t(params), tol=1e-10)


def test_criterion_04_counterexample_detection():
    with budget(1.0):
        P = r.TransitionMatrix.from_rows([[0.2, 0.6, 0.2], [0.2, 0.2, 0.6], [0.6, 0.2, 0.2]])
        res = r.check_kolmogorov_exhaustive(P)
        assert not res.holds
        assert [c.labels() for c in res.violations] == [[1, 2, 3]]
        assert not r.certify_reversibility(P).reversible
        rng = np.random.default_rng(20)
        for _ in range(5):
            tree = random_tree(20, rng)
            Q = random_markov_on(tree, rng)
            assert r.certify_reversibility(Q).reversible
            assert r.check_kolmogorov_exhaustive(Q).holds


def test_criterion_05_graver_minimality(running):
    with budget(10.0):
        for g in (running, cycle_graph(4)):
            basis = r.graver_basis(g)
            assert sorted(b.entries for b in basis) == sorted(
                tuple(int(x) for x in r.cycle_vector(c)) for c in r.enumerate_cycles(g))
            assert r.verify_graver_minimality(basis)


def oracle_decompositions(z, cycles):
    """All multiplicity vectors over the cycles conformal to ``z`` summing to ``z``."""
    zc = [c for c in cycles if r.is_conformal(r.cycle_vector(c), z)]
    if not zc:
        return zc, np.zeros((1 if not np.any(z) else 0, 0), dtype=int)
    V = np.array([r.cycle_vector(c) for c in zc])
    k = int(np.abs(z).max())
    grid = np.array(list(itertools.product(range(k + 1), repeat=len(zc))))
    ok = np.all(grid @ V == z, axis=1)
    return zc, grid[ok]


def test_criterion_06_conformal_decomposition(running):
    rng = np.random.default_rng(6)
    cycles = r.enumerate_cycles(running)
    forward = [c for c in cycles if c.is_forward]
    with budget(30.0):
        for _ in range(100):
            coeffs = rng.integers(0, 6, size=3)
            sign = 1 if rng.random() < 0.5 else -1
            base = forward if sign > 0 else [c.reversed() for c in forward]
            z = sum(int(a) * r.cycle_vector(c) for a, c in zip(coeffs, base))
            z = np.asarray(z, dtype=np.int64)
            parts = r.conformal_decompose(r.LatticeElement(tuple(int(x) for x in z), running))
            total = np.zeros(10, dtype=np.int64)
            plus = np.zeros(10, dtype=np.int64)
            for c, k in parts:
                v = r.cycle_vector(c)
                assert k > 0 and r.is_conformal(v, z)
                total += k * v
                plus += k * np.maximum(v, 0)
            assert np.array_equal(total, z)
            assert np.array_equal(plus, np.maximum(z, 0))
            zc, sols = oracle_decompositions(z, cycles)
            ours = np.zeros(len(zc), dtype=int)
            for c, k in parts:
                ours[zc.index(c)] += k
            assert len(sols) >= 1
            assert any(np.array_equal(ours, s) for s in sols)


def test_criterion_07_syzygy_closure(running):
    with budget(1.0):
        mm = r.model_matrix(running)
        bins = [r.cycle_binomial(c) for c in r.enumerate_cycles(running)]
        for b1, b2 in itertools.permutations(bins, 2):
            assert r.toric_membership(r.syzygy(b1, b2), mm)
        ba = r.cycle_binomial(r.Cycle.from_labels(running, [1, 2, 4]))
        bc = r.cycle_binomial(r.Cycle.from_labels(running, [1, 2, 3, 4]))
        z = list(r.syzygy(ba, bc).exponent)
        assert z in (Z_B, [-x for x in Z_B])


def test_criterion_08_metropolis_suite(running):
    rng = np.random.default_rng(8)
    adj = np.zeros((4, 4), dtype=bool)
    for i, j in running.edges:
        adj[i, j] = adj[j, i] = True
    with budget(5.0):
        for _ in range(50):
            pi = rng.uniform(0.01, 1.0, size=4)
            pi /= pi.sum()
            Q = r.random_walk_joint(pi, running)
            for variant in ("hastings", "barker", "product"):
                J = r.metropolize(Q, variant)
                assert np.array_equal(J.p, J.p.T)
                assert np.allclose(J.marginal, pi, atol=1e-12, rtol=0)
                off = J.p > 0
                np.fill_diagonal(off, False)
                assert np.array_equal(off, adj)
                assert np.all(np.diag(J.p) > 0)
                assert np.all(np.diag(J.p) >= np.diag(Q.p) - 1e-15)


def test_criterion_09_parameterization_round_trips(running):
    rng = np.random.default_rng(9)
    graphs = [running, cycle_graph(5), complete_graph(4), grid_graph(2, 3)]
    with budget(10.0):
        for g in graphs:
            families = [r.default_family(g)]
            if g is running:
                families.append(FAMILY)
            for fam in families:
                for seed in range(10):
                    P, params = r.sample_reversible(g, seed, family=fam)
                    back = r.to_st_params(P, fam)
                    assert np.allclose(back.s, params.s, rtol=1e-10, atol=0)
                    assert np.allclose(back.t, params.t, rtol=1e-10, atol=0)
                    assert np.allclose(r.from_st_params(back).matrix, P.matrix, atol=1e-10, rtol=0)
            for _ in range(10):
                x = rng.uniform(0.05, 1.0, size=g.n_vertices + g.n_edges)
                x /= x.sum()
                th = r.ThetaVector(g, x[:g.n_vertices], x[g.n_vertices:])
                P = r.theta_to_transition(th)
                back = r.transition_to_theta(P, r.theta_to_pi(th))
                assert np.allclose(back.theta_v, th.theta_v, atol=1e-12, rtol=0)
                assert np.allclose(back.theta_e, th.theta_e, atol=1e-12, rtol=0)
                pi = rng.uniform(0.1, 1.0, size=g.n_vertices)
                pi /= pi.sum()
                s = np.full(g.n_edges, 0.5 * pi.min() / max(g.degree(v) for v in range(g.n_vertices)))
                Ps = r.from_pi_s(pi, s, g)
                assert np.allclose(r.invariant_distribution(Ps), pi, atol=1e-10, rtol=0)
            _, params = r.sample_reversible(g, 99)
            assert st_jacobian_rank(params) == g.n_edges + g.n_vertices - 1


def test_criterion_10_spectral_and_empirical(running):
    biased = r.TransitionMatrix.from_rows([[0.2, 0.6, 0.2], [0.2, 0.2, 0.6], [0.6, 0.2, 0.2]])
    with budget(60.0):
        for seed in range(5):
            P, _ = r.sample_reversible(running, seed)
            pi = r.invariant_distribution(P)
            rep = r.spectral_check(r.symmetrize(P, pi), tol=1e-10)
            assert rep.symmetric
            top = rep.eigenvectors[:, np.argmax(rep.eigenvalues)]
            assert rep.eigenvalues.max() == pytest.approx(1.0, abs=1e-10)
            assert np.allclose(top * np.sign(top.sum()), np.sqrt(pi), atol=1e-10)
            path = r.simulate_chain(P, pi, 10**6, seed)
            assert r.empirical_reversibility_test(path).passed
            bad = r.simulate_chain(biased, np.full(3, 1 / 3), 10**6, seed)
            assert not r.empirical_reversibility_test(bad).passed


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
