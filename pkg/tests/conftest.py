import itertools
import re

import numpy as np
import pytest
from hypothesis import strategies as st

import revmc as r

RUNNING_EDGES = [(1, 2), (2, 3), (3, 4), (1, 4), (2, 4)]


def cycle_graph(n):
    return r.build_graph([(k, k % n + 1) for k in range(1, n + 1)])


def complete_graph(n):
    return r.build_graph(list(itertools.combinations(range(1, n + 1), 2)))


def grid_graph(rows, cols):
    lab = lambda i, j: i * cols + j + 1  # noqa: E731
    edges = []
    for i in range(rows):
        for j in range(cols):
            if j + 1 < cols:
                edges.append((lab(i, j), lab(i, j + 1)))
            if i + 1 < rows:
                edges.append((lab(i, j), lab(i + 1, j)))
    return r.build_graph(edges)


def petersen_graph():
    outer = [(k, (k + 1) % 5) for k in range(5)]
    spokes = [(k, k + 5) for k in range(5)]
    inner = [(5 + k, 5 + (k + 2) % 5) for k in range(5)]
    return r.build_graph([(a + 1, b + 1) for a, b in outer + spokes + inner])


def random_tree(n, rng):
    return r.build_graph([(k + 1, int(rng.integers(0, k)) + 1) for k in range(1, n)])


def random_markov_on(g, rng, hold=0.3):
    """Positive on every arc, arbitrary (generally non-reversible) weights."""
    n = g.n_vertices
    W = np.zeros((n, n))
    for i, j in g.edges:
        W[i, j], W[j, i] = rng.uniform(0.1, 1.0, size=2)
    W = (1 - hold) * W / W.sum(axis=1, keepdims=True)
    np.fill_diagonal(W, 1 - W.sum(axis=1))
    return r.TransitionMatrix(g, W)


@st.composite
def connected_graphs(draw, min_vertices=2, max_vertices=7):
    """Random spanning tree plus a random set of extra edges."""
    n = draw(st.integers(min_vertices, max_vertices))
    edges = {tuple(sorted((k, draw(st.integers(0, k - 1))))) for k in range(1, n)}
    extra = [e for e in itertools.combinations(range(n), 2) if e not in edges]
    if extra:
        edges |= set(draw(st.lists(st.sampled_from(extra), unique=True, max_size=len(extra))))
    return r.build_graph([(a + 1, b + 1) for a, b in edges], vertices=range(1, n + 1))


@pytest.fixture
def running():
    return r.build_graph(RUNNING_EDGES)


@pytest.fixture
def biased_triangle():
    return r.TransitionMatrix.from_rows([[0.2, 0.6, 0.2], [0.2, 0.2, 0.6], [0.6, 0.2, 0.2]])


# -- acceptance report --------------------------------------------------------------

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")
_results: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    num, name = int(m.group(1)), m.group(2)
    if report.when == "call" or report.failed or report.skipped:
        prev = _results.get(num, (name, "PASS"))[1]
        outcome = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        _results[num] = (name, outcome if prev == "PASS" else prev)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        name, outcome = _results[num]
        terminalreporter.write_line(f"criterion {num:2d} {name.replace('_', ' ')}: {outcome}")
