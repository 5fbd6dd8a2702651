"""Structure graphs with their doubled digraphs, and the integer matrices built on them.

Vertices are kept sorted by label and addressed internally by their dense
index. Edges are stored as index pairs ``(i, j)`` with ``i < j`` in
lexicographic order. Arcs are the forward arcs ``i -> j`` in edge order
followed by the backward arcs ``j -> i`` in edge order, so that arc ``a`` and
its reversal sit ``m`` positions apart (``m`` the number of edges).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import intlinalg
from .errors import (
    DisconnectedError,
    DuplicateEdgeError,
    EmptyOrFullSubsetError,
    GraphError,
    RankDeficientFamilyError,
    SelfLoopError,
)

#: Above this many vertices the list of all proper subsets is never built.
MAX_FULL_FAMILY_VERTICES = 16


@dataclass(frozen=True)
class StructureGraph:
    """Undirected connected graph together with its doubled digraph.

    Build instances with :func:`build_graph`; the constructor expects already
    canonical data.
    """

    vertices: tuple
    edges: tuple[tuple[int, int], ...]
    arcs: tuple[tuple[int, int], ...] = field(init=False, repr=False)
    _vindex: dict = field(init=False, repr=False, compare=False, hash=False)
    _aindex: dict = field(init=False, repr=False, compare=False, hash=False)
    _adj: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        arcs = tuple(self.edges) + tuple((j, i) for i, j in self.edges)
        adj = [[] for _ in self.vertices]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "_vindex", {v: k for k, v in enumerate(self.vertices)})
        object.__setattr__(self, "_aindex", {a: k for k, a in enumerate(arcs)})
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    # sizes
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    @property
    def cyclomatic_number(self) -> int:
        return self.n_edges - self.n_vertices + 1

    # lookups
    def index(self, label) -> int:
        try:
            return self._vindex[label]
        except KeyError:
            raise GraphError(f"unknown vertex {label!r}") from None

    def label(self, i: int):
        return self.vertices[i]

    def arc_index(self, tail: int, head: int) -> int:
        """Index of the arc ``tail -> head`` (dense vertex indices)."""
        try:
            return self._aindex[(tail, head)]
        except KeyError:
            raise GraphError(f"no arc {self.vertices[tail]}->{self.vertices[head]}") from None

    def has_arc(self, tail: int, head: int) -> bool:
        return (tail, head) in self._aindex

    def reverse(self, a: int) -> int:
        m = self.n_edges
        return a + m if a < m else a - m

    def edge_of_arc(self, a: int) -> int:
        return a % self.n_edges

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def out_arcs(self, i: int) -> list[int]:
        return [self._aindex[(i, j)] for j in self._adj[i]]

    def in_arcs(self, i: int) -> list[int]:
        return [self._aindex[(j, i)] for j in self._adj[i]]

    # labels for output
    def vertex_labels(self) -> list[str]:
        return [str(v) for v in self.vertices]

    def edge_labels(self) -> list[str]:
        return [f"{self.vertices[i]}-{self.vertices[j]}" for i, j in self.edges]

    def arc_labels(self) -> list[str]:
        return [f"{self.vertices[i]}->{self.vertices[j]}" for i, j in self.arcs]

    def subset_indices(self, subset: Iterable) -> frozenset[int]:
        return frozenset(self.index(v) for v in subset)

    def subset_label(self, subset: Iterable[int]) -> str:
        return "{" + ",".join(str(self.vertices[i]) for i in sorted(subset)) + "}"

    def edge_list(self) -> list[tuple]:
        """Edges as label pairs; ``build_graph(g.edge_list())`` rebuilds ``g``."""
        return [(self.vertices[i], self.vertices[j]) for i, j in self.edges]


def _is_connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    if n <= 1:
        return True
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def build_graph(edge_list: Iterable[Sequence[Hashable]], vertices: Iterable[Hashable] | None = None) -> StructureGraph:
    """Build the canonical structure graph from an edge list.

    Parameters
    ----------
    edge_list : iterable of pairs
        Undirected edges given by their endpoint labels.
    vertices : iterable, optional
        Extra vertex labels (only needed for a one-vertex graph; any vertex
        not touched by an edge makes the graph disconnected).

    Raises
    ------
    SelfLoopError, DuplicateEdgeError, DisconnectedError
    """
    pairs = []
    for e in edge_list:
        e = tuple(e)
        if len(e) != 2:
            raise GraphError(f"edge {e!r} does not have two endpoints")
        v, w = e
        if v == w:
            raise SelfLoopError(f"self-loop at vertex {v!r}")
        pairs.append((v, w))
    labels = set(vertices) if vertices is not None else set()
    for v, w in pairs:
        labels.add(v)
        labels.add(w)
    if not labels:
        raise GraphError("empty graph")
    try:
        ordered = tuple(sorted(labels))
    except TypeError:
        raise GraphError("vertex labels must be mutually orderable") from None
    index = {v: k for k, v in enumerate(ordered)}
    seen = set()
    edges = []
    for v, w in pairs:
        i, j = sorted((index[v], index[w]))
        if (i, j) in seen:
            raise DuplicateEdgeError(f"duplicate edge {v!r}-{w!r}")
        seen.add((i, j))
        edges.append((i, j))
    edges.sort()
    if not _is_connected(len(ordered), edges):
        raise DisconnectedError("structure graph is not connected")
    return StructureGraph(ordered, tuple(edges))


def incidence_matrix(g: StructureGraph) -> np.ndarray:
    """Vertex-by-edge 0/1 incidence matrix (columns in canonical edge order)."""
    gamma = np.zeros((g.n_vertices, g.n_edges), dtype=np.int64)
    for k, (i, j) in enumerate(g.edges):
        gamma[i, k] = 1
        gamma[j, k] = 1
    return gamma


def edge_arc_matrix(g: StructureGraph) -> np.ndarray:
    """The 0/1 edge-by-arc matrix ``E``: ``E[e, a] = 1`` iff ``a`` is a direction of ``e``."""
    m = g.n_edges
    E = np.zeros((m, 2 * m), dtype=np.int64)
    E[np.arange(m), np.arange(m)] = 1
    E[np.arange(m), np.arange(m) + m] = 1
    return E


def _check_subset(g: StructureGraph, subset: frozenset[int]) -> None:
    if not subset or len(subset) >= g.n_vertices:
        raise EmptyOrFullSubsetError(
            f"cocycle subset must be proper and nonempty, got {g.subset_label(subset)}"
        )


def cocycle_vector_idx(g: StructureGraph, subset: frozenset[int]) -> np.ndarray:
    """Cocycle vector for a subset given by dense vertex indices."""
    _check_subset(g, subset)
    u = np.zeros(g.n_arcs, dtype=np.int64)
    for a, (i, j) in enumerate(g.arcs):
        inside_tail = i in subset
        inside_head = j in subset
        if inside_tail and not inside_head:
            u[a] = 1
        elif inside_head and not inside_tail:
            u[a] = -1
    return u


def cocycle_vector(g: StructureGraph, subset: Iterable) -> np.ndarray:
    """``+1`` on arcs leaving ``subset``, ``-1`` on arcs entering it, 0 elsewhere.

    ``subset`` is given by vertex labels.
    """
    return cocycle_vector_idx(g, g.subset_indices(subset))


def _family_indices(g: StructureGraph, family) -> tuple[frozenset[int], ...]:
    return tuple(g.subset_indices(B) for B in family)


def cocycle_matrix(g: StructureGraph, family: Iterable[Iterable]) -> np.ndarray:
    """Stack the cocycle vectors of ``family`` (subsets of labels) as rows."""
    fam = _family_indices(g, family)
    if not fam:
        return np.zeros((0, g.n_arcs), dtype=np.int64)
    return np.vstack([cocycle_vector_idx(g, B) for B in fam])


def all_proper_subsets(g: StructureGraph) -> list[tuple]:
    """Every nonempty proper vertex subset, by size then lexicographically."""
    n = g.n_vertices
    if n > MAX_FULL_FAMILY_VERTICES:
        raise GraphError(
            f"refusing to list 2^{n}-2 subsets; pass an explicit cocycle family"
        )
    out = []
    for size in range(1, n):
        for combo in itertools.combinations(range(n), size):
            out.append(tuple(g.vertices[i] for i in combo))
    return out


def default_family(g: StructureGraph) -> list[tuple]:
    """Singletons of every vertex except the largest label (the root)."""
    return [(v,) for v in g.vertices[:-1]]


@dataclass(frozen=True)
class ModelMatrix:
    """The block matrix ``A = [E; U]`` for a cocycle family."""

    graph: StructureGraph
    family: tuple[frozenset[int], ...]
    E: np.ndarray = field(repr=False, compare=False)
    U: np.ndarray = field(repr=False, compare=False)

    @property
    def A(self) -> np.ndarray:
        return np.vstack([self.E, self.U])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.E.shape[0] + self.U.shape[0], self.E.shape[1])

    def row_labels(self) -> list[str]:
        return self.graph.edge_labels() + [self.graph.subset_label(B) for B in self.family]

    def column_labels(self) -> list[str]:
        return self.graph.arc_labels()

    def rank(self) -> int:
        return intlinalg.rank(self.A.tolist())

    def family_labels(self) -> list[tuple]:
        return [tuple(self.graph.vertices[i] for i in sorted(B)) for B in self.family]


def model_matrix(g: StructureGraph, family: Iterable[Iterable] | None = None) -> ModelMatrix:
    """Build ``A = [E; U]`` and check that it reaches rank ``|E| + |V| - 1``.

    ``family`` defaults to :func:`default_family`.

    Raises
    ------
    RankDeficientFamilyError
        If the family's cocycle vectors do not span the cocycle space.
    """
    if family is None:
        family = default_family(g)
    fam = _family_indices(g, family)
    U = np.vstack([cocycle_vector_idx(g, B) for B in fam]) if fam else np.zeros((0, g.n_arcs), dtype=np.int64)
    mm = ModelMatrix(g, fam, edge_arc_matrix(g), U)
    expected = g.n_edges + g.n_vertices - 1
    r = mm.rank()
    if r != expected:
        raise RankDeficientFamilyError(
            f"model matrix has rank {r}, expected {expected}; the family does not span the cocycle space"
        )
    return mm


def is_antisymmetric(g: StructureGraph, z) -> bool:
    z = np.asarray(z)
    m = g.n_edges
    return bool(np.all(z[:m] == -z[m:]))


def graph_from_arcs(vertices: Sequence, arcs: Iterable[tuple]) -> StructureGraph:
    """Collapse a doubled arc set (pairs of label tuples) back into the undirected graph."""
    arcs = set(tuple(a) for a in arcs)
    for v, w in arcs:
        if (w, v) not in arcs:
            raise GraphError(f"arc {v}->{w} has no reversal")
    edges = {tuple(sorted((v, w))) for v, w in arcs}
    return build_graph(sorted(edges), vertices=vertices)
