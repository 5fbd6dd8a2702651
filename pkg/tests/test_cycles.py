import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import revmc as r
from revmc.cycles import (
    CAP_ENV_VAR,
    enumerate_cycles,
    smallest_cycle_within,
    traversal_counts,
)
from revmc.errors import (
    CycleCapExceededError,
    DimensionMismatchError,
    GraphError,
    InstanceTooLargeError,
    NotInKernelError,
)

from conftest import complete_graph, connected_graphs, cycle_graph, grid_graph, petersen_graph, random_tree

Z_A = [1, -1, 0, 1, 0, -1, 1, 0, -1, 0]
Z_B = [0, 0, 1, -1, 1, 0, 0, -1, 1, -1]


def brute_force_cycles(g, min_len=3):
    """Every vertex sequence starting at its minimum whose consecutive arcs exist."""
    found = set()
    n = g.n_vertices
    for k in range(min_len, n + 1):
        for subset in itertools.combinations(range(n), k):
            s = subset[0]
            for rest in itertools.permutations(subset[1:]):
                seq = (s,) + rest
                if all(g.has_arc(a, b) for a, b in zip(seq, seq[1:] + seq[:1])):
                    found.add(seq)
    return found


def networkx_cycles(g):
    D = nx.DiGraph()
    D.add_nodes_from(range(g.n_vertices))
    D.add_edges_from(g.arcs)
    out = set()
    for c in nx.simple_cycles(D):
        if len(c) < 3:
            continue
        k = c.index(min(c))
        out.add(tuple(c[k:] + c[:k]))
    return out


def test_running_example_six_cycles(running):
    cycles = enumerate_cycles(running)
    assert len(cycles) == 6
    got = {tuple(c.labels()) for c in cycles}
    omega_a, omega_b, omega_c = (1, 2, 4), (2, 3, 4), (1, 2, 3, 4)
    expected = {omega_a, omega_b, omega_c}
    expected |= {(c[0],) + tuple(reversed(c[1:])) for c in expected}
    assert got == expected


def test_running_example_arc_sets(running):
    arcsets = {frozenset(c.arc_labels()) for c in enumerate_cycles(running)}
    assert frozenset(["1->2", "2->4", "4->1"]) in arcsets
    assert frozenset(["2->3", "3->4", "4->2"]) in arcsets
    assert frozenset(["1->2", "2->3", "3->4", "4->1"]) in arcsets


def test_two_cycles_counted_once(running):
    # a 2-cycle is its own reversal, so there is one per edge
    cycles = enumerate_cycles(running, include_two_cycles=True)
    assert len(cycles) == 6 + running.n_edges
    two = [c for c in cycles if c.is_two_cycle]
    assert {tuple(c.labels()) for c in two} == set(running.edge_list())
    assert all(not r.cycle_vector(c).any() for c in two)


def test_sorted_deterministic_order(running):
    cycles = enumerate_cycles(running)
    assert cycles == sorted(cycles)
    assert [c.sort_key() for c in cycles] == sorted(c.sort_key() for c in cycles)
    for fwd, bwd in zip(cycles[::2], cycles[1::2]):
        assert fwd.is_forward and not bwd.is_forward
        assert bwd == fwd.reversed()


def test_triangle_has_two_cycles():
    g = cycle_graph(3)
    cycles = enumerate_cycles(g)
    assert len(cycles) == 2
    assert {tuple(c.vertices) for c in cycles} == brute_force_cycles(g)


def test_tree_has_no_cycles():
    g = random_tree(12, np.random.default_rng(3))
    assert enumerate_cycles(g) == []
    assert r.graver_basis(g) == []
    assert r.lattice_basis(r.model_matrix(g)) == []


@pytest.mark.parametrize(
    "g",
    [complete_graph(4), complete_graph(5), grid_graph(3, 3), cycle_graph(6), petersen_graph()],
    ids=["K4", "K5", "grid3x3", "C6", "petersen"],
)
def test_enumeration_matches_networkx(g):
    got = {c.vertices for c in enumerate_cycles(g)}
    assert got == networkx_cycles(g)
    if g.n_vertices <= 7:
        assert got == brute_force_cycles(g)


@settings(max_examples=60, deadline=None)
@given(connected_graphs(max_vertices=6))
def test_enumeration_matches_brute_force(g):
    cycles = enumerate_cycles(g)
    assert {c.vertices for c in cycles} == brute_force_cycles(g)
    assert len(cycles) == len({c.vertices for c in cycles})


def test_cycle_cap(monkeypatch):
    g = complete_graph(5)
    with pytest.raises(CycleCapExceededError):
        enumerate_cycles(g, cap=10)
    monkeypatch.setenv(CAP_ENV_VAR, "5")
    with pytest.raises(CycleCapExceededError):
        enumerate_cycles(g)


def test_cycle_vector_golden(running):
    a = r.Cycle.from_labels(running, [1, 2, 4])
    b = r.Cycle.from_labels(running, [2, 3, 4])
    assert r.cycle_vector(a).tolist() == Z_A
    assert r.cycle_vector(b).tolist() == Z_B
    assert r.cycle_vector(a.reversed()).tolist() == [-x for x in Z_A]
    assert np.array_equal(np.maximum(r.cycle_vector(a), 0), traversal_counts(a))


def test_cycle_validation(running):
    with pytest.raises(GraphError):
        r.Cycle.from_labels(running, [1, 3, 4])  # 1-3 is not an edge
    with pytest.raises(GraphError):
        r.Cycle.from_labels(running, [1, 2, 1])
    with pytest.raises(GraphError):
        r.Cycle.from_labels(running, [1])


def test_canonical_rotation(running):
    c = r.Cycle.from_labels(running, [4, 1, 2])
    assert c.labels() == [1, 2, 4]
    assert c.canonical_form == c.reversed().canonical_form
    assert str(c) == "(1->2)(2->4)(4->1)"


@pytest.mark.parametrize(
    "g", [complete_graph(4), grid_graph(3, 3), petersen_graph()], ids=["K4", "grid", "petersen"]
)
def test_every_cycle_vector_in_kernel(g):
    A = r.model_matrix(g, r.default_family(g)).A
    for c in enumerate_cycles(g):
        z = r.cycle_vector(c)
        assert not (A @ z).any()
        assert r.in_cycle_lattice(g, z)


def test_lattice_basis_running_example(running):
    mm = r.model_matrix(running)
    basis = r.lattice_basis(mm)
    assert len(basis) == 2
    B = np.array([b.entries for b in basis])
    T = np.array([Z_A, Z_B])
    # exact change of basis with unimodular determinant
    X = np.linalg.lstsq(T.T.astype(float), B.T.astype(float), rcond=None)[0].T
    Xi = np.rint(X).astype(int)
    assert np.array_equal(Xi @ T, B)
    assert abs(round(np.linalg.det(Xi))) == 1


def test_lattice_basis_c4():
    g = cycle_graph(4)
    basis = r.lattice_basis(r.model_matrix(g))
    assert len(basis) == 1
    z = r.cycle_vector(enumerate_cycles(g)[0])
    assert list(basis[0].entries) in (z.tolist(), (-z).tolist())


@settings(max_examples=40, deadline=None)
@given(connected_graphs(max_vertices=6))
def test_lattice_basis_spans_fundamental_cycles(g):
    basis = np.array([b.entries for b in r.lattice_basis(r.model_matrix(g))]).reshape(-1, g.n_arcs)
    assert basis.shape[0] == g.n_edges - g.n_vertices + 1
    if basis.shape[0] == 0:
        return
    # every cycle vector is an integer combination of the basis
    for c in enumerate_cycles(g)[:20]:
        z = r.cycle_vector(c)
        x = np.linalg.lstsq(basis.T.astype(float), z.astype(float), rcond=None)[0]
        xi = np.rint(x).astype(int)
        assert np.array_equal(xi @ basis, z)


def test_is_conformal_examples(running):
    za, zb = np.array(Z_A), np.array(Z_B)
    assert r.is_conformal(za, za)
    assert not r.is_conformal(za, zb)
    assert r.is_conformal(np.zeros(10, dtype=int), zb)
    assert r.is_conformal(za, 2 * za)
    with pytest.raises(DimensionMismatchError):
        r.is_conformal(za, zb[:5])


def test_decompose_trivial(running):
    a = r.Cycle.from_labels(running, [1, 2, 4])
    assert r.conformal_decompose(r.LatticeElement.of_cycle(a)) == [(a, 1)]
    assert r.conformal_decompose(r.LatticeElement((0,) * 10, running)) == []


def test_decompose_worked_example(running):
    C = lambda *v: r.Cycle.from_labels(running, v)  # noqa: E731
    wa, wb, wc = C(1, 2, 4), C(2, 3, 4), C(1, 2, 3, 4)
    z = r.cycle_vector(wa) + 2 * r.cycle_vector(wb) + 2 * r.cycle_vector(wc)
    assert z.tolist() == [3, -3, 4, -1, 4, -3, 3, -4, 1, -4]
    parts = r.conformal_decompose(r.LatticeElement(tuple(z), running))
    assert parts == [(wc, 3), (wb, 1)]
    assert np.array_equal(sum(k * r.cycle_vector(c) for c, k in parts), z)


def test_decompose_not_in_kernel(running):
    with pytest.raises(NotInKernelError):
        r.conformal_decompose(r.LatticeElement((1, 0, 0, 0, 0, -1, 0, 0, 0, 0), running))
    with pytest.raises(NotInKernelError):
        r.conformal_decompose(r.LatticeElement((1,) + (0,) * 9, running))


def test_lattice_element_checked(running):
    with pytest.raises(NotInKernelError):
        r.LatticeElement.checked(running, (1,) + (0,) * 9)
    z = r.LatticeElement.checked(running, Z_A)
    assert np.array_equal(z.plus - z.minus, z.array)
    assert not np.any((z.plus > 0) & (z.minus > 0))


@st.composite
def graph_and_kernel_vector(draw):
    g = draw(connected_graphs(min_vertices=3, max_vertices=6))
    cycles = enumerate_cycles(g)
    z = np.zeros(g.n_arcs, dtype=np.int64)
    if cycles:
        picks = draw(st.lists(st.tuples(st.sampled_from(cycles), st.integers(1, 4)), max_size=4))
        for c, k in picks:
            z += k * r.cycle_vector(c)
    return g, z


@settings(max_examples=80, deadline=None)
@given(graph_and_kernel_vector())
def test_decomposition_properties(gz):
    g, z = gz
    parts = r.conformal_decompose(r.LatticeElement(tuple(z), g))
    total = np.zeros_like(z)
    plus = np.zeros_like(z)
    for c, k in parts:
        assert k > 0
        v = r.cycle_vector(c)
        assert r.is_conformal(v, z)
        total += k * v
        plus += k * np.maximum(v, 0)
    assert np.array_equal(total, z)
    assert np.array_equal(plus, np.maximum(z, 0))
    # orientation consistency
    neg = r.conformal_decompose(r.LatticeElement(tuple(-z), g))
    assert neg == [(c.reversed(), k) for c, k in parts]
    # the enumerated pool gives the same choice as the direct search
    assert r.conformal_decompose(r.LatticeElement(tuple(z), g), enumerate_cycles(g)) == parts


@settings(max_examples=60, deadline=None)
@given(connected_graphs(min_vertices=3, max_vertices=6), st.data())
def test_smallest_cycle_within_matches_pool(g, data):
    arcs = data.draw(st.sets(st.integers(0, g.n_arcs - 1)))
    found = smallest_cycle_within(g, arcs)
    pool = [c for c in enumerate_cycles(g) if set(c.arcs) <= arcs]
    assert found == (min(pool) if pool else None)


def test_graver_basis(running):
    basis = r.graver_basis(running)
    assert len(basis) == 6
    vecs = {b.entries for b in basis}
    assert all(tuple(-x for x in v) in vecs for v in vecs)
    assert len(r.graver_basis(cycle_graph(4))) == 2


def test_verify_graver_minimality(running):
    assert r.verify_graver_minimality(r.graver_basis(running))
    assert r.verify_graver_minimality(r.graver_basis(cycle_graph(4)))


def test_verify_graver_rejects_doubled_vector(running):
    z = r.LatticeElement(tuple(Z_A), running)
    assert not r.verify_graver_minimality([z, r.LatticeElement(tuple(2 * x for x in Z_A), running)])


def test_verify_graver_rejects_incomplete_basis(running):
    basis = r.graver_basis(running)
    assert not r.verify_graver_minimality(basis[:-1])


def test_verify_graver_too_large():
    g = petersen_graph()
    with pytest.raises(InstanceTooLargeError):
        r.verify_graver_minimality(r.graver_basis(g))


def test_cycle_from_vector(running):
    for c in enumerate_cycles(running):
        assert r.cycle_from_vector(running, r.cycle_vector(c)) == c
    assert r.cycle_from_vector(running, np.array(Z_A) + np.array(Z_B)) is not None
    assert r.cycle_from_vector(running, 2 * np.array(Z_A)) is None
