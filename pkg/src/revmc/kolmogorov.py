"""Reversibility checks built on cycle binomials, plus toric membership tests.

All numeric checks work in the log domain: a cycle binomial
``P^{z+} - P^{z-}`` vanishes at a positive point iff
``sum_a z_a log P_a == 0``.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .cycles import Cycle, cycle_from_vector, cycle_vector, enumerate_cycles
from .errors import (
    DimensionMismatchError,
    DisconnectedSupportError,
    NonpositiveKappaError,
    NotCycleBinomialError,
    ZeroOnSupportError,
)
from .graph import ModelMatrix, StructureGraph
from .transition import TransitionMatrix

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Binomial:
    """``P^{z+} - P^{z-}`` for an integer arc vector ``z``."""

    exponent: tuple[int, ...]
    graph: StructureGraph = field(compare=False, repr=False)
    cycle: Cycle | None = field(default=None, compare=False)

    def __post_init__(self):
        exp = tuple(int(x) for x in self.exponent)
        if len(exp) != self.graph.n_arcs:
            raise DimensionMismatchError("exponent length does not match the number of arcs")
        object.__setattr__(self, "exponent", exp)

    @property
    def z(self) -> np.ndarray:
        return np.asarray(self.exponent, dtype=np.int64)

    @property
    def plus(self) -> np.ndarray:
        return np.maximum(self.z, 0)

    @property
    def minus(self) -> np.ndarray:
        return np.maximum(-self.z, 0)

    @property
    def is_trivial(self) -> bool:
        return not any(self.exponent)

    @property
    def degree(self) -> int:
        return int(self.plus.sum())

    def __str__(self) -> str:
        return f"{_monomial_str(self.graph, self.plus)} - {_monomial_str(self.graph, self.minus)}"


def _monomial_str(g: StructureGraph, e) -> str:
    labels = g.arc_labels()
    parts = []
    for a, k in enumerate(e):
        if k:
            parts.append(f"P[{labels[a]}]" + (f"^{k}" if k > 1 else ""))
    return "*".join(parts) or "1"


def cycle_binomial(c: Cycle) -> Binomial:
    """``P^c - P^{r(c)}``; identically zero for a 2-cycle."""
    return Binomial(tuple(cycle_vector(c)), c.graph, cycle=c)


def evaluate_binomial(b: Binomial, P: TransitionMatrix) -> float:
    """Value of the binomial at ``P``.

    Both monomials are formed in log space and recombined as
    ``e^{L+} * (1 - e^{L- - L+})`` to limit cancellation.
    """
    vals = P.arc_values()
    z = b.z
    needed = np.flatnonzero(z)
    if np.any(vals[needed] <= 0):
        raise ZeroOnSupportError("binomial involves a zero transition")
    logs = np.zeros_like(vals)
    logs[needed] = np.log(vals[needed])
    lp = float(np.dot(b.plus, logs))
    lm = float(np.dot(b.minus, logs))
    return -math.exp(lp) * math.expm1(lm - lp)


def log_imbalance(b: Binomial, P: TransitionMatrix) -> float:
    """``sum_a z_a log P_a`` (zero exactly when the binomial vanishes)."""
    vals = P.arc_values()
    needed = np.flatnonzero(b.z)
    if np.any(vals[needed] <= 0):
        raise ZeroOnSupportError("binomial involves a zero transition")
    return float(np.dot(b.z[needed], np.log(vals[needed])))


class KolmogorovResult(NamedTuple):
    holds: bool
    violations: list[Cycle]


def _support_arcs(P: TransitionMatrix) -> list[int]:
    g = P.graph
    arcs = []
    for i, j in P.support_edges():
        arcs.append(g.arc_index(i, j))
        arcs.append(g.arc_index(j, i))
    return arcs


def check_kolmogorov_exhaustive(P: TransitionMatrix, tol: float = DEFAULT_TOL, cap: int | None = None) -> KolmogorovResult:
    """Test ``P^w = P^{r(w)}`` on every cycle of the positive support.

    One orientation per cycle is evaluated (the reversed binomial is the
    negative). Violations are returned in canonical cycle order.

    Raises
    ------
    NotQReversibleError, CycleCapExceededError
    """
    P.require_q_reversible()
    g = P.graph
    cycles = [c for c in enumerate_cycles(g, cap=cap, arcs=_support_arcs(P)) if c.is_forward]
    if not cycles:
        return KolmogorovResult(True, [])
    vals = P.arc_values()
    logs = np.zeros_like(vals)
    pos = vals > 0
    logs[pos] = np.log(vals[pos])
    Z = np.vstack([cycle_vector(c) for c in cycles]).astype(float)
    imbalance = np.abs(Z @ logs)
    bad = [c for c, x in zip(cycles, imbalance) if not x <= tol]
    return KolmogorovResult(not bad, bad)


class Verdict(str, enum.Enum):
    REVERSIBLE = "reversible"
    NOT_REVERSIBLE = "not-reversible"
    NOT_Q_REVERSIBLE = "not-q-reversible"


@dataclass(frozen=True)
class ReversibilityCertificate:
    """Outcome of the spanning-tree reversibility test.

    ``kappa`` is normalized to sum one; ``worst_arc`` is the arc carrying
    ``max_residual`` (dense vertex indices), None when there are no arcs.
    """

    kappa: np.ndarray
    max_residual: float
    spanning_tree: list[tuple[int, int]]
    verdict: Verdict
    worst_arc: tuple[int, int] | None
    graph: StructureGraph = field(repr=False)

    @property
    def reversible(self) -> bool:
        return self.verdict is Verdict.REVERSIBLE

    def tree_labels(self) -> list[tuple]:
        vs = self.graph.vertices
        return [(vs[i], vs[j]) for i, j in self.spanning_tree]


def certify_reversibility(P: TransitionMatrix, tol: float = DEFAULT_TOL) -> ReversibilityCertificate:
    """Build the detailed-balance witness along a BFS spanning tree and test every arc.

    The root is the smallest vertex; ``kappa(child) = kappa(parent) *
    P[parent->child] / P[child->parent]``. A non-tree arc's residual is the
    log-imbalance of its fundamental cycle, so the verdict agrees with the
    exhaustive cycle check.

    Raises
    ------
    NotQReversibleError, DisconnectedSupportError
    """
    P.require_q_reversible()
    g = P.graph
    n = g.n_vertices
    M = P.matrix
    support = P.support_edges()
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in support:
        adj[i].append(j)
        adj[j].append(i)
    for lst in adj:
        lst.sort()

    logk = np.full(n, np.nan)
    logk[0] = 0.0
    tree: list[tuple[int, int]] = []
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if np.isnan(logk[w]):
                logk[w] = logk[v] + math.log(M[v, w]) - math.log(M[w, v])
                tree.append((v, w))
                queue.append(w)
    if np.any(np.isnan(logk)):
        missing = [g.vertices[i] for i in np.flatnonzero(np.isnan(logk))]
        raise DisconnectedSupportError(f"vertices {missing} are not reachable through positive transitions")

    worst, worst_arc = 0.0, None
    for i, j in support:
        r = abs(logk[i] + math.log(M[i, j]) - logk[j] - math.log(M[j, i]))
        if worst_arc is None or r > worst:
            worst, worst_arc = r, (i, j)
    kappa = np.exp(logk - logk.max())
    kappa /= kappa.sum()
    verdict = Verdict.REVERSIBLE if worst <= tol else Verdict.NOT_REVERSIBLE
    return ReversibilityCertificate(kappa, float(worst), tree, verdict, worst_arc, g)


def check_detailed_balance(P: TransitionMatrix, kappa, tol: float = DEFAULT_TOL) -> bool:
    """Relative detailed-balance residual over all arcs is at most ``tol``."""
    k = np.asarray(kappa, dtype=float)
    if k.shape != (P.n,):
        raise DimensionMismatchError("kappa length does not match the matrix")
    if np.any(~(k > 0)):
        raise NonpositiveKappaError("kappa must be strictly positive")
    M = P.matrix
    flow = k[:, None] * M
    for i, j in P.graph.edges:
        a, b = flow[i, j], flow[j, i]
        scale = max(a, b)
        if scale == 0:
            continue
        if abs(a - b) / scale > tol:
            return False
    return True


def toric_membership(b: Binomial, m: ModelMatrix) -> bool:
    """``A z == 0`` in exact integer arithmetic."""
    A = m.A
    if A.shape[1] != len(b.exponent):
        raise DimensionMismatchError(f"model matrix has {A.shape[1]} columns, exponent has {len(b.exponent)}")
    z = b.exponent
    return all(sum(int(x) * y for x, y in zip(row, z)) == 0 for row in A.tolist())


# -- syzygies -----------------------------------------------------------------

def lex_arc_order(g: StructureGraph) -> list[int]:
    """Arc indices sorted by (tail label, head label), smallest first."""
    return sorted(range(g.n_arcs), key=lambda a: g.arcs[a])


def lex_leading_sign(b: Binomial) -> int:
    """+1 if ``P^{z+}`` is the leading monomial under lex order, -1 otherwise.

    Lex compares exponents at the largest arc first; with disjoint supports
    this is the sign of ``z`` at the largest arc of its support.
    """
    z = b.exponent
    for a in reversed(lex_arc_order(b.graph)):
        if z[a]:
            return 1 if z[a] > 0 else -1
    return 1


def _require_cycle_binomial(b: Binomial) -> None:
    if b.is_trivial:
        return
    if b.cycle is None and cycle_from_vector(b.graph, b.z) is None:
        raise NotCycleBinomialError("exponent is not a cycle vector")


def syzygy_terms(b1: Binomial, b2: Binomial, leading: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Exponents of the two monomials of ``syz(b1, b2)`` before cancelling common factors.

    With ``L_i`` the leading and ``T_i`` the trailing exponent of ``b_i`` and
    ``g = min(L_1, L_2)``:

        syz = P^{L_1 - g + T_2} - P^{L_2 - g + T_1}

    ``leading`` gives, per binomial, +1 when ``P^{z+}`` leads and -1 when
    ``P^{z-}`` leads; by default the lex order is used.
    """
    if b1.graph != b2.graph:
        raise DimensionMismatchError("binomials live on different graphs")
    _require_cycle_binomial(b1)
    _require_cycle_binomial(b2)
    if leading is None:
        leading = (lex_leading_sign(b1), lex_leading_sign(b2))
    lead, trail = [], []
    for b, sgn in zip((b1, b2), leading):
        if sgn > 0:
            lead.append(b.plus)
            trail.append(b.minus)
        else:
            lead.append(b.minus)
            trail.append(b.plus)
    g = np.minimum(lead[0], lead[1])
    return lead[0] - g + trail[1], lead[1] - g + trail[0]


def syzygy(b1: Binomial, b2: Binomial, leading: Sequence[int] | None = None) -> Binomial:
    """Syzygy of two cycle binomials, reduced to disjoint positive/negative parts.

    Raises
    ------
    NotCycleBinomialError
    """
    first, second = syzygy_terms(b1, b2, leading)
    return Binomial(tuple(first - second), b1.graph)
