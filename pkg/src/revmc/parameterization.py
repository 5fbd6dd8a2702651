"""Three coordinate systems for reversible Markov matrices on a structure graph.

* ``theta``: loop masses ``theta_v`` and symmetrized edge masses
  ``theta_vw`` of the stationary two-step joint distribution.
* ``(pi, s)``: ``P[v->w] = pi(v)^{-1/2} pi(w)^{1/2} s(v,w)``.
* ``(s, t)``: ``P[v->w] = s(v,w) * prod_B t_B^{u_{v->w}(B)}`` over a cocycle
  family, with unnormalized invariant measure ``kappa(v) = prod_{B ni v} t_B^{-2}``.

Vectors indexed by vertices or edges follow the graph's canonical order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import intlinalg
from .errors import (
    BadSupportError,
    DimensionMismatchError,
    EntriesOutOfRangeError,
    FeasibilityViolatedError,
    IsolatedMasslessError,
    NonpositiveParamsError,
    NonpositivePiError,
    NotABasisError,
    NotReversibleError,
    ZeroTransitionError,
)
from .graph import StructureGraph, cocycle_vector_idx, default_family, incidence_matrix
from .kolmogorov import check_detailed_balance
from .transition import TransitionMatrix, complete_diagonal

SIMPLEX_ATOL = 1e-12
LOG_RESIDUAL_LIMIT = 1e-8
#: slack tolerance absorbing rounding when the row mass is exactly one
FEASIBILITY_ATOL = 1e-12


def _positive_vector(x, n: int, what: str, exc=NonpositivePiError) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (n,):
        raise DimensionMismatchError(f"{what} must have length {n}, got shape {v.shape}")
    if np.any(~(v > 0)):
        raise exc(f"{what} must be strictly positive")
    return v


def _edge_weights(g: StructureGraph, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape != (g.n_edges,):
        raise DimensionMismatchError(f"edge weights must have length {g.n_edges}")
    return s


# -- theta ----------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaVector:
    """Point of the flat simplex over vertices and edges."""

    graph: StructureGraph = field(repr=False)
    theta_v: np.ndarray
    theta_e: np.ndarray

    def __post_init__(self):
        tv = np.array(self.theta_v, dtype=float)
        te = np.array(self.theta_e, dtype=float)
        if tv.shape != (self.graph.n_vertices,) or te.shape != (self.graph.n_edges,):
            raise DimensionMismatchError("theta has the wrong shape for this graph")
        if np.any(tv < 0) or np.any(te < 0):
            raise ValueError("theta entries must be nonnegative")
        total = tv.sum() + te.sum()
        if abs(total - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"theta sums to {total!r}, not 1")
        object.__setattr__(self, "theta_v", tv)
        object.__setattr__(self, "theta_e", te)


def theta_to_pi(theta: ThetaVector) -> np.ndarray:
    """Marginal ``pi = theta_V + Gamma theta_E / 2``."""
    return theta.theta_v + 0.5 * incidence_matrix(theta.graph) @ theta.theta_e


def theta_to_transition(theta: ThetaVector) -> TransitionMatrix:
    """``P[v->w] = theta_vw / (2 theta_v + sum_z theta_vz)``, diagonal completing rows.

    Raises
    ------
    IsolatedMasslessError
        When a vertex carries no mass at all.
    """
    g = theta.graph
    denom = 2.0 * theta.theta_v + incidence_matrix(g) @ theta.theta_e
    if np.any(denom <= 0):
        bad = [g.vertices[i] for i in np.flatnonzero(denom <= 0)]
        raise IsolatedMasslessError(f"vertices {bad} have zero mass")
    n = g.n_vertices
    P = np.zeros((n, n))
    for k, (i, j) in enumerate(g.edges):
        P[i, j] = theta.theta_e[k] / denom[i]
        P[j, i] = theta.theta_e[k] / denom[j]
    return TransitionMatrix(g, complete_diagonal(g, P))


def transition_to_theta(P: TransitionMatrix, pi, tol: float = 1e-9) -> ThetaVector:
    """Inverse of :func:`theta_to_transition`: ``theta_vw = 2 pi(v) P[v->w]``, ``theta_v = pi(v) P[v->v]``.

    Raises
    ------
    NotReversibleError
        If ``pi`` is not a detailed-balance measure for ``P``.
    """
    g = P.graph
    pi = _positive_vector(pi, g.n_vertices, "pi")
    pi = pi / pi.sum()
    if not check_detailed_balance(P, pi, tol):
        raise NotReversibleError("P is not reversible with respect to pi")
    M = P.matrix
    theta_e = np.array([pi[i] * M[i, j] + pi[j] * M[j, i] for i, j in g.edges])
    theta_v = pi * np.diag(M)
    # absorb the rounding left over from normalization
    total = theta_v.sum() + theta_e.sum()
    return ThetaVector(g, theta_v / total, theta_e / total)


# -- joint distributions and the Metropolis construction ----------------------------

@dataclass(frozen=True)
class JointDistribution:
    """Probability on ``V x V`` supported on the edges and the diagonal."""

    graph: StructureGraph = field(repr=False)
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        n = self.graph.n_vertices
        if p.shape != (n, n):
            raise DimensionMismatchError(f"joint must be {n}x{n}")
        if np.any(p < 0):
            raise ValueError("joint has negative entries")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def marginal(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def is_symmetric(self, atol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.p - self.p.T)) <= atol)

    def to_transition(self) -> TransitionMatrix:
        pi = self.marginal
        if np.any(pi <= 0):
            raise NonpositivePiError("joint has a vertex with zero marginal")
        M = self.p / pi[:, None]
        return TransitionMatrix(self.graph, complete_diagonal(self.graph, M))

    def to_theta(self) -> ThetaVector:
        g = self.graph
        te = np.array([self.p[i, j] + self.p[j, i] for i, j in g.edges])
        tv = np.diag(self.p).copy()
        total = tv.sum() + te.sum()
        return ThetaVector(g, tv / total, te / total)


def random_walk_joint(pi, g: StructureGraph) -> JointDistribution:
    """``Q(v, w) = pi(v) A(v, w)`` for the lazy random walk ``A`` (holding 1/2, else uniform over neighbours)."""
    pi = _positive_vector(pi, g.n_vertices, "pi")
    n = g.n_vertices
    Q = np.zeros((n, n))
    for v in range(n):
        Q[v, v] = pi[v] / 2
        d = g.degree(v)
        for w in g.neighbors(v):
            Q[v, w] = pi[v] / (2 * d)
    return JointDistribution(g, Q)


def hastings(x, y):
    return np.minimum(x, y)


def barker(x, y):
    return x * y / (x + y)


def product(x, y):
    return x * y


ACCEPTANCE_FUNCTIONS: dict[str, Callable] = {
    "hastings": hastings,
    "barker": barker,
    "product": product,
}


def metropolize(Q: JointDistribution, f_variant: str | Callable = "hastings") -> JointDistribution:
    """Symmetrize a joint distribution while keeping its marginal.

    Off the diagonal ``P(v, w) = f(Q(v, w), Q(w, v))`` (computed once per
    edge and mirrored); the diagonal takes what is left of ``pi(v)``.

    Raises
    ------
    BadSupportError
        If ``Q`` is not positive exactly on the edges and the diagonal.
    EntriesOutOfRangeError
        If some entry is outside ``(0, 1)`` or ``f`` exceeds ``min(x, y)``.
    """
    g = Q.graph
    f = ACCEPTANCE_FUNCTIONS[f_variant] if isinstance(f_variant, str) else f_variant
    q = Q.p
    n = g.n_vertices
    expected = np.eye(n, dtype=bool)
    for i, j in g.edges:
        expected[i, j] = expected[j, i] = True
    if not np.array_equal(q > 0, expected):
        raise BadSupportError("Q must be positive exactly on the edges and the diagonal")
    if np.any(q[expected] >= 1):
        raise EntriesOutOfRangeError("Q entries must lie in (0, 1)")
    edges = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
    x = q[edges[:, 0], edges[:, 1]]
    y = q[edges[:, 1], edges[:, 0]]
    fx = np.asarray(f(x, y), dtype=float)
    if np.any(fx > np.minimum(x, y)) or np.any(fx <= 0):
        raise EntriesOutOfRangeError("acceptance function must satisfy 0 < f(x, y) <= min(x, y)")
    P = np.zeros((n, n))
    P[edges[:, 0], edges[:, 1]] = fx
    P[edges[:, 1], edges[:, 0]] = fx
    pi = Q.marginal
    np.fill_diagonal(P, pi - P.sum(axis=1))
    return JointDistribution(g, P)


# -- square-root parameterization -------------------------------------------------

def pi_s_slack(pi, s, g: StructureGraph) -> np.ndarray:
    """``sqrt(pi(v)) - sum_w s(v, w) sqrt(pi(w))`` per vertex."""
    pi = _positive_vector(pi, g.n_vertices, "pi")
    s = _edge_weights(g, s)
    r = np.sqrt(pi)
    slack = r.copy()
    for k, (i, j) in enumerate(g.edges):
        slack[i] -= s[k] * r[j]
        slack[j] -= s[k] * r[i]
    return slack


def from_pi_s(pi, s, g: StructureGraph) -> TransitionMatrix:
    """``P[v->w] = pi(v)^{-1/2} pi(w)^{1/2} s(v, w)``; reversible with invariant ``pi``.

    ``pi`` need not be normalized.

    Raises
    ------
    FeasibilityViolatedError
        If ``sum_w s(v, w) sqrt(pi(w)) > sqrt(pi(v))`` for some ``v``.
    """
    pi = _positive_vector(pi, g.n_vertices, "pi")
    s = _edge_weights(g, s)
    if np.any(~(s > 0)):
        raise NonpositiveParamsError("s must be strictly positive on every edge")
    slack = pi_s_slack(pi, s, g)
    bad = np.flatnonzero(slack < -FEASIBILITY_ATOL * np.sqrt(pi))
    if bad.size:
        raise FeasibilityViolatedError([g.vertices[i] for i in bad], slack)
    r = np.sqrt(pi)
    n = g.n_vertices
    P = np.zeros((n, n))
    for k, (i, j) in enumerate(g.edges):
        P[i, j] = s[k] * r[j] / r[i]
        P[j, i] = s[k] * r[i] / r[j]
    return TransitionMatrix(g, complete_diagonal(g, P))


# -- monomial (s, t) parameterization ----------------------------------------------

@dataclass(frozen=True)
class ReversibleParams:
    """Edge weights ``s`` and cocycle multipliers ``t`` over ``family``.

    ``family`` holds subsets as frozensets of dense vertex indices; use
    :meth:`create` to build from labels.
    """

    graph: StructureGraph = field(repr=False)
    s: np.ndarray
    t: np.ndarray
    family: tuple[frozenset[int], ...]

    def __post_init__(self):
        s = np.array(self.s, dtype=float)
        t = np.array(self.t, dtype=float)
        fam = tuple(frozenset(B) for B in self.family)
        if s.shape != (self.graph.n_edges,):
            raise DimensionMismatchError(f"s must have one entry per edge ({self.graph.n_edges})")
        if t.shape != (len(fam),):
            raise DimensionMismatchError("t must have one entry per family member")
        if np.any(~(s > 0)) or np.any(~(t > 0)):
            raise NonpositiveParamsError("s and t must be strictly positive")
        for B in fam:
            cocycle_vector_idx(self.graph, B)  # validates the subset
        s.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "family", fam)

    @classmethod
    def create(cls, g: StructureGraph, s, t, family: Iterable[Iterable] | None = None) -> "ReversibleParams":
        if family is None:
            family = default_family(g)
        fam = tuple(g.subset_indices(B) for B in family)
        return cls(g, s, t, fam)

    @property
    def kappa(self) -> np.ndarray:
        return kappa_from_t(self)

    def cocycles(self) -> np.ndarray:
        if not self.family:
            return np.zeros((0, self.graph.n_arcs))
        return np.vstack([cocycle_vector_idx(self.graph, B) for B in self.family]).astype(float)

    def family_labels(self) -> list[tuple]:
        vs = self.graph.vertices
        return [tuple(vs[i] for i in sorted(B)) for B in self.family]

    def n_parameters(self) -> int:
        return self.graph.n_edges + len(self.family)


def _membership(params: ReversibleParams) -> np.ndarray:
    """0/1 matrix ``vertex x family``: ``v in B``."""
    g = params.graph
    M = np.zeros((g.n_vertices, len(params.family)))
    for k, B in enumerate(params.family):
        for i in B:
            M[i, k] = 1.0
    return M


def kappa_from_t(params: ReversibleParams, normalize: bool = False) -> np.ndarray:
    """``kappa(v) = prod_{B ni v} t_B^{-2}``."""
    logk = -2.0 * _membership(params) @ np.log(params.t)
    k = np.exp(logk)
    return k / k.sum() if normalize else k


def _vertex_potential(params: ReversibleParams) -> np.ndarray:
    """``prod_{B ni v} t_B^{-1}`` per vertex."""
    return np.exp(-_membership(params) @ np.log(params.t))


def feasibility_report(params: ReversibleParams) -> np.ndarray:
    """Per-vertex slack ``prod_{B ni v} t_B^{-1} - sum_w s(v,w) prod_{B ni w} t_B^{-1}``.

    Multiplying ``slack(v)`` by ``prod_{B ni v} t_B`` gives the diagonal
    entry ``P[v->v]``.
    """
    g = params.graph
    h = _vertex_potential(params)
    slack = h.copy()
    for k, (i, j) in enumerate(g.edges):
        slack[i] -= params.s[k] * h[j]
        slack[j] -= params.s[k] * h[i]
    return slack


def st_off_diagonal(params: ReversibleParams) -> np.ndarray:
    """Off-diagonal part of the monomial map, no feasibility check."""
    g = params.graph
    logP = np.log(np.concatenate([params.s, params.s])) + params.cocycles().T @ np.log(params.t)
    n = g.n_vertices
    P = np.zeros((n, n))
    arcs = np.asarray(g.arcs)
    P[arcs[:, 0], arcs[:, 1]] = np.exp(logP)
    return P


def from_st_params(params: ReversibleParams) -> TransitionMatrix:
    """Transition matrix of the monomial parameterization.

    Raises
    ------
    FeasibilityViolatedError
        If some vertex has negative slack (row mass above one).
    """
    g = params.graph
    slack = feasibility_report(params)
    h = _vertex_potential(params)
    bad = np.flatnonzero(slack < -FEASIBILITY_ATOL * h)
    if bad.size:
        raise FeasibilityViolatedError([g.vertices[i] for i in bad], slack)
    return TransitionMatrix(g, complete_diagonal(g, st_off_diagonal(params)))


def to_st_params(P: TransitionMatrix, family: Iterable[Iterable] | None = None) -> ReversibleParams:
    """Recover ``(s, t)`` from a reversible matrix with full support.

    ``s(v, w) = sqrt(P[v->w] P[w->v])``; ``log t`` is the minimum-norm least
    squares solution of ``U_S^T log t = log P - log s``. With an over-complete
    family ``t`` is one representative of the confounded set.

    Raises
    ------
    ZeroTransitionError, NotABasisError, NotReversibleError
    """
    g = P.graph
    if family is None:
        family = default_family(g)
    fam = tuple(g.subset_indices(B) for B in family)
    vals = P.arc_values()
    if np.any(vals <= 0):
        raise ZeroTransitionError("every arc of the structure graph must carry positive probability")
    m = g.n_edges
    U = np.vstack([cocycle_vector_idx(g, B) for B in fam]) if fam else np.zeros((0, g.n_arcs), dtype=np.int64)
    if intlinalg.rank(U.tolist()) != g.n_vertices - 1:
        raise NotABasisError("family does not span the cocycle space")
    logP = np.log(vals)
    log_s = 0.5 * (logP[:m] + logP[m:])
    rhs = logP - np.concatenate([log_s, log_s])
    log_t, *_ = np.linalg.lstsq(U.T.astype(float), rhs, rcond=None)
    resid = np.max(np.abs(U.T @ log_t - rhs)) if rhs.size else 0.0
    if resid > LOG_RESIDUAL_LIMIT:
        raise NotReversibleError(f"log-linear system residual {resid:.3g} exceeds {LOG_RESIDUAL_LIMIT}")
    return ReversibleParams(g, np.exp(log_s), np.exp(log_t), fam)


def st_jacobian_rank(params: ReversibleParams, step: float = 1e-6, rtol: float = 1e-6) -> int:
    """Numerical rank of ``(log s, log t) -> log P`` by central differences."""
    x0 = np.concatenate([np.log(params.s), np.log(params.t)])
    m = params.graph.n_edges

    def f(x):
        p = ReversibleParams(params.graph, np.exp(x[:m]), np.exp(x[m:]), params.family)
        P = st_off_diagonal(p)
        arcs = np.asarray(params.graph.arcs)
        return np.log(P[arcs[:, 0], arcs[:, 1]])

    J = np.empty((params.graph.n_arcs, x0.size))
    for k in range(x0.size):
        e = np.zeros_like(x0)
        e[k] = step
        J[:, k] = (f(x0 + e) - f(x0 - e)) / (2 * step)
    sv = np.linalg.svd(J, compute_uv=False)
    return int(np.sum(sv > rtol * sv.max())) if sv.size else 0


def pi_s_to_st(pi, s, g: StructureGraph) -> ReversibleParams:
    """Express a ``(pi, s)`` point in the vertex-singleton family (root excluded)."""
    pi = _positive_vector(pi, g.n_vertices, "pi")
    scaled = pi / pi[-1]
    t = scaled[:-1] ** -0.5
    return ReversibleParams.create(g, s, t, default_family(g))
