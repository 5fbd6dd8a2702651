"""Row-stochastic transition matrices with a declared structure graph."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InvalidTransitionMatrixError, NotQReversibleError
from .graph import StructureGraph, build_graph

ROW_SUM_ATOL = 1e-12


class TransitionMatrix:
    """Markov matrix over the vertices of ``graph``.

    Off-diagonal mass is only allowed on edges of the graph; zero entries on
    edges are allowed (the positive support may be a subgraph). The stored
    array is read-only.
    """

    __slots__ = ("graph", "_P")

    def __init__(self, graph: StructureGraph, matrix, *, atol: float = ROW_SUM_ATOL):
        P = np.array(matrix, dtype=float)
        n = graph.n_vertices
        if P.shape != (n, n):
            raise InvalidTransitionMatrixError(f"expected a {n}x{n} matrix, got shape {P.shape}")
        if not np.all(np.isfinite(P)):
            raise InvalidTransitionMatrixError("matrix has non-finite entries")
        if np.any(P < 0):
            raise InvalidTransitionMatrixError("matrix has negative entries")
        sums = P.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > atol)
        if bad.size:
            v = graph.vertices[bad[0]]
            raise InvalidTransitionMatrixError(f"row {v} sums to {sums[bad[0]]!r}, not 1")
        allowed = np.eye(n, dtype=bool)
        for i, j in graph.edges:
            allowed[i, j] = allowed[j, i] = True
        off = np.argwhere((P > 0) & ~allowed)
        if off.size:
            i, j = off[0]
            raise InvalidTransitionMatrixError(
                f"positive transition {graph.vertices[i]}->{graph.vertices[j]} outside the structure graph"
            )
        P.setflags(write=False)
        self.graph = graph
        self._P = P

    @classmethod
    def from_rows(cls, rows, vertices: Sequence | None = None) -> "TransitionMatrix":
        """Infer the structure graph from the off-diagonal nonzero pattern."""
        P = np.asarray(rows, dtype=float)
        n = P.shape[0]
        labels = list(vertices) if vertices is not None else list(range(1, n + 1))
        if len(labels) != n:
            raise InvalidTransitionMatrixError("vertex list does not match matrix size")
        try:
            if list(labels) != sorted(labels):
                raise InvalidTransitionMatrixError("vertices must be listed in sorted order")
        except TypeError:
            raise InvalidTransitionMatrixError("vertex labels must be mutually orderable") from None
        edges = [
            (labels[i], labels[j])
            for i in range(n)
            for j in range(i + 1, n)
            if P[i, j] != 0 or P[j, i] != 0
        ]
        g = build_graph(edges, vertices=labels)
        return cls(g, P)

    @property
    def matrix(self) -> np.ndarray:
        return self._P

    @property
    def n(self) -> int:
        return self._P.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._P if dtype is None else self._P.astype(dtype)

    def __getitem__(self, idx):
        return self._P[idx]

    def __repr__(self) -> str:
        return f"TransitionMatrix(vertices={list(self.graph.vertices)!r})"

    def arc_values(self) -> np.ndarray:
        """Transition probabilities in canonical arc order."""
        arcs = np.asarray(self.graph.arcs)
        return self._P[arcs[:, 0], arcs[:, 1]]

    def support_edges(self) -> list[tuple[int, int]]:
        """Edges with positive transitions in both directions (dense indices)."""
        P = self._P
        return [(i, j) for i, j in self.graph.edges if P[i, j] > 0 and P[j, i] > 0]

    def q_reversibility_violations(self) -> list[tuple[int, int]]:
        P = self._P
        return [(i, j) for i, j in self.graph.edges if (P[i, j] > 0) != (P[j, i] > 0)]

    def is_q_reversible(self) -> bool:
        return not self.q_reversibility_violations()

    def require_q_reversible(self) -> None:
        bad = self.q_reversibility_violations()
        if bad:
            i, j = bad[0]
            vs = self.graph.vertices
            raise NotQReversibleError(
                f"P[{vs[i]}->{vs[j]}] = {self._P[i, j]!r} but P[{vs[j]}->{vs[i]}] = {self._P[j, i]!r}"
            )


def complete_diagonal(graph: StructureGraph, off_diagonal: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Fill the diagonal so rows sum to one; tiny negative remainders are clipped."""
    P = np.array(off_diagonal, dtype=float)
    np.fill_diagonal(P, 0.0)
    diag = 1.0 - P.sum(axis=1)
    if np.any(diag < -atol):
        raise InvalidTransitionMatrixError("row mass exceeds one")
    np.fill_diagonal(P, np.maximum(diag, 0.0))
    return P
