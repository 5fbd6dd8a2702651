"""Numerical Markov chain utilities.

Random numbers come from numpy's Philox4x64-10 counter-based bit generator
seeded through ``SeedSequence(seed)``. Uniform doubles are formed from the
top 53 bits of each raw 64-bit output, so paths depend only on the Philox
raw stream, not on numpy's distribution code.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .errors import NonpositivePiError, PathTooShortError, ReducibleError
from .graph import StructureGraph, default_family
from .parameterization import ReversibleParams, from_st_params, st_off_diagonal
from .transition import TransitionMatrix

RNG_NAME = "Philox4x64-10"
DIRECT_SOLVE_LIMIT = 2000
EMPIRICAL_THRESHOLD = 5.0
MIN_PATH_TRANSITIONS = 10_000


class _Uniforms:
    """Stream of doubles in [0, 1) from Philox raw output."""

    def __init__(self, seed: int):
        self._bg = np.random.Philox(np.random.SeedSequence(seed))

    def draw(self, k: int) -> np.ndarray:
        raw = self._bg.random_raw(k)
        return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def _strongly_connected(M: np.ndarray) -> bool:
    n = M.shape[0]
    pos = M > 0
    for mat in (pos, pos.T):
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in np.flatnonzero(mat[v]):
                if w not in seen:
                    seen.add(int(w))
                    stack.append(int(w))
        if len(seen) != n:
            return False
    return True


def invariant_distribution(P: TransitionMatrix, tol: float = 1e-15, maxiter: int = 100_000) -> np.ndarray:
    """Unique invariant probability of an irreducible chain.

    Direct solve of ``(P^T - I) pi = 0`` with one equation replaced by
    ``sum(pi) = 1``; power iteration on the lazy chain ``(P + I) / 2`` for
    more than 2000 states.

    Raises
    ------
    ReducibleError
    """
    M = P.matrix
    n = M.shape[0]
    if not _strongly_connected(M):
        raise ReducibleError("transition matrix is reducible")
    if n <= DIRECT_SOLVE_LIMIT:
        A = M.T - np.eye(n)
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        pi = np.linalg.solve(A, b)
    else:
        lazy = 0.5 * (M + np.eye(n))
        pi = np.full(n, 1.0 / n)
        for _ in range(maxiter):
            nxt = pi @ lazy
            if np.abs(nxt - pi).sum() < tol:
                pi = nxt
                break
            pi = nxt
    pi = np.maximum(pi, 0.0)
    return pi / pi.sum()


def symmetrize(P: TransitionMatrix, pi) -> np.ndarray:
    """``S = diag(pi)^{1/2} P diag(pi)^{-1/2}``."""
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (P.n,) or np.any(~(pi > 0)):
        raise NonpositivePiError("pi must be a strictly positive vector over the states")
    r = np.sqrt(pi)
    return r[:, None] * P.matrix / r[None, :]


@dataclass(frozen=True)
class SpectralReport:
    symmetric: bool
    asymmetry: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = field(default=None, repr=False)


def spectral_check(S, tol: float = 1e-10) -> SpectralReport:
    """Symmetry test plus spectrum.

    For a symmetric ``S`` the spectrum comes from ``eigh`` (ascending, with
    eigenvectors as columns); otherwise from the general solver and may be
    complex.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("S must be square")
    asym = float(np.max(np.abs(S - S.T))) if S.size else 0.0
    if asym <= tol:
        vals, vecs = np.linalg.eigh(0.5 * (S + S.T))
        return SpectralReport(True, asym, vals, vecs)
    return SpectralReport(False, asym, np.linalg.eigvals(S), None)


@dataclass(frozen=True)
class ChainPath:
    """Simulated trajectory; ``states`` holds dense vertex indices."""

    states: np.ndarray
    seed: int
    graph: StructureGraph = field(repr=False)
    rng: str = RNG_NAME

    @property
    def n_transitions(self) -> int:
        return len(self.states) - 1

    def labels(self) -> list:
        vs = self.graph.vertices
        return [vs[i] for i in self.states]


def _cumulative(row: np.ndarray) -> list[float]:
    cum = np.cumsum(row)
    last = int(np.flatnonzero(row > 0)[-1])
    cum[last:] = 1.0
    return cum.tolist()


def simulate_chain(P: TransitionMatrix, start, n: int, seed: int) -> ChainPath:
    """Run ``n`` steps from ``X_0 ~ start``; identical output for identical arguments."""
    if n < 1:
        raise ValueError("n must be at least 1")
    start = np.asarray(start, dtype=float)
    if start.shape != (P.n,) or np.any(start < 0) or abs(start.sum() - 1.0) > 1e-9:
        raise ValueError("start must be a probability vector over the states")
    cums = [_cumulative(row) for row in P.matrix]
    u = _Uniforms(seed).draw(n + 1).tolist()
    x = bisect.bisect_right(_cumulative(start), u[0])
    states = [x]
    append = states.append
    br = bisect.bisect_right
    for k in range(1, n + 1):
        x = br(cums[x], u[k])
        append(x)
    return ChainPath(np.asarray(states, dtype=np.int64), seed, P.graph)


@dataclass(frozen=True)
class EmpiricalReport:
    statistic: float
    worst_edge: tuple[int, int] | None
    counts: np.ndarray = field(repr=False)
    n_transitions: int
    threshold: float

    @property
    def passed(self) -> bool:
        return self.statistic < self.threshold


def empirical_reversibility_test(
    path: ChainPath,
    g: StructureGraph | None = None,
    threshold: float = EMPIRICAL_THRESHOLD,
    min_transitions: int = MIN_PATH_TRANSITIONS,
) -> EmpiricalReport:
    """Normalized pair-count asymmetry ``max_e |N(v,w) - N(w,v)| / sqrt(N(v,w) + N(w,v) + 1)``.

    Stays O(1) for a stationary reversible chain and grows like ``sqrt(n)``
    when there is a net circulation.

    Raises
    ------
    PathTooShortError
        If the path has fewer than ``min_transitions`` transitions.
    """
    g = g or path.graph
    if path.n_transitions < min_transitions:
        raise PathTooShortError(f"{path.n_transitions} transitions, need at least {min_transitions}")
    n = g.n_vertices
    s = path.states
    counts = np.bincount(s[:-1] * n + s[1:], minlength=n * n).reshape(n, n)
    stat, worst = 0.0, None
    for i, j in g.edges:
        a, b = int(counts[i, j]), int(counts[j, i])
        val = abs(a - b) / np.sqrt(a + b + 1)
        if worst is None or val > stat:
            stat, worst = float(val), (i, j)
    return EmpiricalReport(stat, worst, counts, path.n_transitions, threshold)


def sample_reversible(g: StructureGraph, seed: int, family=None, max_row_mass: float = 0.9) -> tuple[TransitionMatrix, ReversibleParams]:
    """Random reversible matrix from the ``(s, t)`` parameterization.

    ``log t_B ~ U(-1, 1)`` over ``family`` (default: singletons without the
    root) and ``s ~ U(0.05, 1.05)`` per edge, then ``s`` is rescaled so that
    the largest off-diagonal row mass is ``max_row_mass``.
    """
    if family is None:
        family = default_family(g)
    fam = tuple(g.subset_indices(B) for B in family)
    u = _Uniforms(seed)
    t = np.exp(2.0 * u.draw(len(fam)) - 1.0)
    s = 0.05 + u.draw(g.n_edges)
    raw = ReversibleParams(g, s, t, fam)
    mass = st_off_diagonal(raw).sum(axis=1).max()
    params = ReversibleParams(g, s * (max_row_mass / mass), t, fam)
    return from_st_params(params), params
