"""Directed cycles of the doubled digraph and the cycle lattice.

A :class:`Cycle` is stored as its canonical vertex sequence: rotated so that
the smallest vertex (dense index) comes first. The direction of traversal is
part of the cycle, so a cycle and its reversal are distinct objects, except
for 2-cycles ``v -> w -> v``, which are their own reversal.
"""
from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import intlinalg
from .errors import (
    CycleCapExceededError,
    DimensionMismatchError,
    GraphError,
    InstanceTooLargeError,
    NotInKernelError,
)
from .graph import ModelMatrix, StructureGraph, cocycle_vector_idx, is_antisymmetric

DEFAULT_CYCLE_CAP = 10**6
CAP_ENV_VAR = "REVMC_CYCLE_CAP"

#: Upper bound on the number of candidate vectors scanned by the brute force
#: in :func:`verify_graver_minimality`.
MAX_BRUTE_FORCE = 5_000_000


def default_cycle_cap() -> int:
    raw = os.environ.get(CAP_ENV_VAR)
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return DEFAULT_CYCLE_CAP


@functools.total_ordering
@dataclass(frozen=True)
class Cycle:
    """Directed elementary circuit in canonical rotation.

    Cycles sort by :attr:`canonical_form`, with the forward orientation
    before its reversal.
    """

    vertices: tuple[int, ...]
    graph: StructureGraph = field(compare=False, repr=False)

    def __post_init__(self):
        vs = tuple(self.vertices)
        if len(vs) < 2:
            raise GraphError("a cycle needs at least two vertices")
        if len(set(vs)) != len(vs):
            raise GraphError(f"cycle {vs} repeats a vertex")
        k = vs.index(min(vs))
        vs = vs[k:] + vs[:k]
        for a, b in zip(vs, vs[1:] + vs[:1]):
            if not self.graph.has_arc(a, b):
                raise GraphError(f"cycle uses missing arc {a}->{b}")
        object.__setattr__(self, "vertices", vs)

    @classmethod
    def from_labels(cls, g: StructureGraph, labels: Sequence) -> "Cycle":
        return cls(tuple(g.index(v) for v in labels), g)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def is_two_cycle(self) -> bool:
        return len(self.vertices) == 2

    @property
    def is_forward(self) -> bool:
        """True for the orientation whose second vertex is the smaller neighbour of the start."""
        return len(self.vertices) == 2 or self.vertices[1] < self.vertices[-1]

    @property
    def canonical_form(self) -> tuple[int, ...]:
        """Vertex sequence shared by both orientations: smallest vertex first,
        then its smaller neighbour on the cycle."""
        vs = self.vertices
        return vs if self.is_forward else (vs[0],) + tuple(reversed(vs[1:]))

    def sort_key(self) -> tuple:
        return (self.canonical_form, not self.is_forward)

    def __lt__(self, other: "Cycle") -> bool:
        if not isinstance(other, Cycle):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    @property
    def arcs(self) -> tuple[int, ...]:
        vs = self.vertices
        return tuple(self.graph.arc_index(a, b) for a, b in zip(vs, vs[1:] + vs[:1]))

    def reversed(self) -> "Cycle":
        vs = self.vertices
        return Cycle((vs[0],) + tuple(reversed(vs[1:])), self.graph)

    def labels(self) -> list:
        return [self.graph.vertices[i] for i in self.vertices]

    def arc_labels(self) -> list[str]:
        labels = self.graph.arc_labels()
        return [labels[a] for a in self.arcs]

    def __str__(self) -> str:
        return "".join(f"({a})" for a in self.arc_labels())


def traversal_counts(c: Cycle) -> np.ndarray:
    N = np.zeros(c.graph.n_arcs, dtype=np.int64)
    for a in c.arcs:
        N[a] += 1
    return N


def cycle_vector(c: Cycle) -> np.ndarray:
    """``z_a = N_a(c) - N_{r(a)}(c)``: +1 on arcs of ``c``, -1 on their reversals.

    For a 2-cycle both arcs are traversed once and the vector is zero.
    """
    N = traversal_counts(c)
    g = c.graph
    rev = np.array([g.reverse(a) for a in range(g.n_arcs)], dtype=np.int64)
    return N - N[rev]


# -- enumeration -------------------------------------------------------------

def _johnson(adj: list[list[int]], cap: int) -> list[tuple[int, ...]]:
    """Johnson's elementary circuit search.

    Circuits are emitted starting at their smallest vertex, so every circuit
    comes out exactly once and already in canonical rotation.
    """
    n = len(adj)
    out: list[tuple[int, ...]] = []

    for s in range(n):
        # strongly connected component of s inside the vertices >= s
        fwd = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w > s and w not in fwd:
                    fwd.add(w)
                    stack.append(w)
        radj: dict[int, list[int]] = {}
        for v in fwd:
            for w in adj[v]:
                if w in fwd:
                    radj.setdefault(w, []).append(v)
        comp = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for w in radj.get(v, ()):
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        if len(comp) < 2:
            continue
        sub = {v: [w for w in adj[v] if w in comp] for v in comp}

        blocked: set[int] = set()
        B: dict[int, set[int]] = {v: set() for v in comp}
        path: list[int] = []

        def unblock(u):
            stack = [u]
            while stack:
                x = stack.pop()
                if x in blocked:
                    blocked.discard(x)
                    stack.extend(B[x])
                    B[x].clear()

        def circuit(v) -> bool:
            found = False
            path.append(v)
            blocked.add(v)
            for w in sub[v]:
                if w == s:
                    out.append(tuple(path))
                    if len(out) > cap:
                        raise CycleCapExceededError(f"more than {cap} cycles")
                    found = True
                elif w not in blocked:
                    if circuit(w):
                        found = True
            if found:
                unblock(v)
            else:
                for w in sub[v]:
                    B[w].add(v)
            path.pop()
            return found

        circuit(s)
    return out


@functools.lru_cache(maxsize=64)
def _cached_cycles(g: StructureGraph, arcs: frozenset[int] | None, cap: int) -> tuple[tuple[int, ...], ...]:
    adj: list[list[int]] = [[] for _ in range(g.n_vertices)]
    for a, (i, j) in enumerate(g.arcs):
        if arcs is None or a in arcs:
            adj[i].append(j)
    for lst in adj:
        lst.sort()
    return tuple(_johnson(adj, cap))


def enumerate_cycles(
    g: StructureGraph,
    include_two_cycles: bool = False,
    cap: int | None = None,
    arcs: Iterable[int] | None = None,
) -> list[Cycle]:
    """All directed elementary cycles of the doubled digraph, sorted canonically.

    Both orientations of every cycle are listed. ``arcs`` restricts the search
    to a subset of arc indices (the result is still expressed on ``g``).

    Raises
    ------
    CycleCapExceededError
        When more than ``cap`` cycles exist (default from
        ``REVMC_CYCLE_CAP`` or ``10**6``). 2-cycles count towards the cap.
    """
    if cap is None:
        cap = default_cycle_cap()
    key = None if arcs is None else frozenset(int(a) for a in arcs)
    seqs = _cached_cycles(g, key, cap)
    return sorted(Cycle(vs, g) for vs in seqs if include_two_cycles or len(vs) > 2)


def _smallest_forward_cycle(succ: list[list[int]]) -> tuple[int, ...] | None:
    """Lexicographically smallest vertex sequence ``s, v1, ..., vk`` of a cycle
    (length >= 3) with ``s`` its smallest vertex and ``v1 < vk``.

    Greedy: from the smallest feasible start, repeatedly close the cycle if
    allowed, else step to the smallest successor from which a valid closing
    still exists.
    """
    n = len(succ)

    def can_close(x: int, s: int, avoid: set[int], above: int) -> bool:
        # a path from x through vertices > s outside avoid ends at some v > above with v -> s
        seen = {x}
        stack = [x]
        while stack:
            v = stack.pop()
            if v > above and s in succ[v]:
                return True
            for w in succ[v]:
                if w > s and w not in avoid and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def completable(path: list[int], used: set[int]) -> bool:
        s = path[0]
        if len(path) == 1:
            return any(w > s and completable(path + [w], used | {w}) for w in succ[s])
        v1, v = path[1], path[-1]
        if len(path) >= 3:
            return can_close(v, s, used, v1)
        return any(w > s and w not in used and can_close(w, s, used | {w}, v1) for w in succ[v])

    for s in range(n):
        path, used = [s], {s}
        if not completable(path, used):
            continue
        while True:
            v = path[-1]
            if len(path) >= 3 and v > path[1] and s in succ[v]:
                return tuple(path)
            for w in succ[v]:
                if w > s and w not in used and completable(path + [w], used | {w}):
                    path.append(w)
                    used.add(w)
                    break
            else:  # pragma: no cover - completable() guarantees a successor
                raise AssertionError("greedy cycle search lost feasibility")
    return None


def smallest_cycle_within(g: StructureGraph, arcs: Iterable[int]) -> Cycle | None:
    """Cycle (length >= 3) using only ``arcs`` with the smallest canonical form.

    The canonical form does not depend on orientation, so the smallest is
    taken over forward cycles of the arc set and over forward cycles of its
    reversal (whose reversals are the backward cycles of the arc set).
    """
    succ: list[list[int]] = [[] for _ in range(g.n_vertices)]
    pred: list[list[int]] = [[] for _ in range(g.n_vertices)]
    for a in set(int(a) for a in arcs):
        i, j = g.arcs[a]
        succ[i].append(j)
        pred[j].append(i)
    for lst in succ + pred:
        lst.sort()
    fwd = _smallest_forward_cycle(succ)
    bwd = _smallest_forward_cycle(pred)
    if fwd is None and bwd is None:
        return None
    if bwd is None or (fwd is not None and fwd <= bwd):
        return Cycle(fwd, g)
    return Cycle((bwd[0],) + tuple(reversed(bwd[1:])), g)


# -- lattice -------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeElement:
    """Integer arc vector, normally an element of ``ker A``."""

    entries: tuple[int, ...]
    graph: StructureGraph = field(compare=False, repr=False)

    def __post_init__(self):
        entries = tuple(int(x) for x in self.entries)
        if len(entries) != self.graph.n_arcs:
            raise DimensionMismatchError(
                f"vector of length {len(entries)} on a graph with {self.graph.n_arcs} arcs"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def checked(cls, g: StructureGraph, entries) -> "LatticeElement":
        """Construct and verify kernel membership."""
        z = cls(tuple(entries), g)
        if not in_cycle_lattice(g, z.array):
            raise NotInKernelError("vector is not in the cycle lattice")
        return z

    @classmethod
    def of_cycle(cls, c: Cycle) -> "LatticeElement":
        return cls(tuple(cycle_vector(c)), c.graph)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=np.int64)

    @property
    def plus(self) -> np.ndarray:
        return np.maximum(self.array, 0)

    @property
    def minus(self) -> np.ndarray:
        return np.maximum(-self.array, 0)

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __neg__(self) -> "LatticeElement":
        return LatticeElement(tuple(-x for x in self.entries), self.graph)

    def __len__(self) -> int:
        return len(self.entries)


def in_cycle_lattice(g: StructureGraph, z) -> bool:
    """``z`` is antisymmetric and orthogonal to every vertex cut.

    Equivalent to ``A z = 0`` for any model matrix of ``g``: the singleton
    cocycles span the cocycle space.
    """
    z = np.asarray(z, dtype=np.int64)
    if z.shape != (g.n_arcs,) or not is_antisymmetric(g, z):
        return False
    for i in range(g.n_vertices):
        if z[g.out_arcs(i)].sum() - z[g.in_arcs(i)].sum() != 0:
            return False
    return True


def lattice_basis(m: ModelMatrix) -> list[LatticeElement]:
    """Z-basis of ``ker A`` in Hermite normal form (``|E| - |V| + 1`` vectors)."""
    rows = intlinalg.integer_kernel(m.A.tolist(), ncols=m.graph.n_arcs)
    return [LatticeElement(tuple(r), m.graph) for r in rows]


def _vec(z) -> np.ndarray:
    if isinstance(z, LatticeElement):
        return z.array
    return np.asarray(z, dtype=np.int64)


def is_conformal(z1, z2) -> bool:
    """``z1`` is conformal to ``z2``: same sign pattern and ``|z1| <= |z2|`` componentwise."""
    a, b = _vec(z1), _vec(z2)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"lengths {a.shape} and {b.shape} differ")
    return bool(np.all(a * b >= 0) and np.all(np.abs(a) <= np.abs(b)))


def conformal_decompose(z: LatticeElement, cycles: Sequence[Cycle] | None = None) -> list[tuple[Cycle, int]]:
    """Write ``z`` as a positive integer combination of conformal cycle vectors.

    At each step the cycle with the lexicographically smallest canonical form
    lying in the positive support of the residual is taken, with the largest multiplier that keeps
    the residual's positive part nonnegative.

    Parameters
    ----------
    z : LatticeElement
    cycles : sequence of Cycle, optional
        Candidate cycles (e.g. the output of :func:`enumerate_cycles`). When
        omitted the smallest cycle is found directly without enumerating.

    Raises
    ------
    NotInKernelError
        If a nonzero residual has no cycle in its positive support, which
        happens exactly when ``z`` is not in the cycle lattice.
    """
    g = z.graph
    if cycles is not None:
        pool = sorted(c for c in cycles if not c.is_two_cycle)
        pool_arcs = [(c, c.arcs) for c in pool]
    r = z.array.copy()
    out: list[tuple[Cycle, int]] = []
    while np.any(r):
        positive = np.flatnonzero(r > 0)
        if cycles is None:
            chosen = smallest_cycle_within(g, positive) if positive.size else None
        else:
            pos = set(positive.tolist())
            chosen = next((c for c, arcs in pool_arcs if all(a in pos for a in arcs)), None)
        if chosen is None:
            raise NotInKernelError("residual has no cycle in its positive support; vector is not in ker A")
        arcs = list(chosen.arcs)
        alpha = int(r[arcs].min())
        r = r - alpha * cycle_vector(chosen)
        out.append((chosen, alpha))
    return out


def graver_basis(g: StructureGraph, cap: int | None = None) -> list[LatticeElement]:
    """Cycle vectors of all cycles of length >= 3 (both orientations), in cycle order."""
    seen = set()
    out = []
    for c in enumerate_cycles(g, cap=cap):
        z = LatticeElement.of_cycle(c)
        if z.entries not in seen:
            seen.add(z.entries)
            out.append(z)
    return out


def verify_graver_minimality(basis: Sequence[LatticeElement], graph: StructureGraph | None = None) -> bool:
    """Check that ``basis`` is exactly the set of conformally minimal kernel vectors.

    Two tests: no basis element conformally dominates another distinct one,
    and a brute-force scan of the kernel inside the box
    ``[-k, k]^arcs`` (``k`` the largest absolute entry of the basis) finds
    every basis element minimal and no minimal element outside the basis.
    Kernel vectors are antisymmetric, so the scan runs over one coordinate
    per edge.

    Raises
    ------
    InstanceTooLargeError
        When the basis or the box is too big for brute force.
    """
    if len(basis) > 10**4:
        raise InstanceTooLargeError(f"basis of size {len(basis)} is too large")
    if graph is None:
        if not basis:
            raise ValueError("graph is required for an empty basis")
        graph = basis[0].graph
    g = graph
    vecs = [_vec(b) for b in basis]
    for v in vecs:
        if v.shape != (g.n_arcs,):
            raise DimensionMismatchError("basis vector length does not match the graph")
    if any(not v.any() for v in vecs):
        return False
    for i, a in enumerate(vecs):
        for j, b in enumerate(vecs):
            if i != j and not np.array_equal(a, b) and is_conformal(a, b):
                return False

    k = max((int(np.abs(v).max()) for v in vecs), default=1)
    m = g.n_edges
    if (2 * k + 1) ** m > MAX_BRUTE_FORCE:
        raise InstanceTooLargeError(f"brute force over {(2 * k + 1)}^{m} vectors")

    # forward-arc coordinates, antisymmetric completion
    values = np.arange(-k, k + 1, dtype=np.int64)
    grid = np.array(list(itertools.product(values, repeat=m)), dtype=np.int64).reshape(-1, m)
    full = np.hstack([grid, -grid])
    cut = np.vstack([cocycle_vector_idx(g, frozenset([i])) for i in range(g.n_vertices - 1)]) if g.n_vertices > 1 else np.zeros((0, 2 * m), dtype=np.int64)
    kernel = full[np.all(full @ cut.T == 0, axis=1)]
    kernel = kernel[np.any(kernel != 0, axis=1)]

    def dominated(v: np.ndarray) -> bool:
        # some other nonzero kernel vector sits conformally below v
        same_sign = np.all(kernel * v >= 0, axis=1)
        below = np.all(np.abs(kernel) <= np.abs(v), axis=1)
        differs = np.any(kernel != v, axis=1)
        return bool(np.any(same_sign & below & differs))

    basis_set = {tuple(v.tolist()) for v in vecs}
    for v in vecs:
        if dominated(v):
            return False
    for v in kernel:
        if tuple(v.tolist()) not in basis_set and not dominated(v):
            return False
    return True


def cycle_from_vector(g: StructureGraph, z) -> Cycle | None:
    """The cycle whose cycle vector is ``z``, or None if ``z`` is not a cycle vector."""
    z = _vec(z)
    if z.shape != (g.n_arcs,) or not is_antisymmetric(g, z):
        return None
    if not np.all(np.isin(z, (-1, 0, 1))):
        return None
    pos = np.flatnonzero(z > 0)
    if pos.size < 3:
        return None
    nxt: dict[int, int] = {}
    for a in pos:
        i, j = g.arcs[a]
        if i in nxt:
            return None
        nxt[i] = j
    if sorted(nxt.values()) != sorted(nxt):
        return None
    start = min(nxt)
    seq = [start]
    v = nxt[start]
    while v != start:
        seq.append(v)
        v = nxt[v]
    if len(seq) != len(nxt):
        return None
    return Cycle(tuple(seq), g)
