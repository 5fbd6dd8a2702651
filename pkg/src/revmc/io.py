"""Readers and writers for the file formats used by the command line.

Floats are written with ``repr`` in JSON (shortest string that round-trips
exactly) and with ``%.17g`` in CSV.
"""
from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .cycles import Cycle, LatticeElement
from .errors import InputError, SelfLoopError
from .graph import StructureGraph, build_graph
from .markov import RNG_NAME, ChainPath
from .parameterization import ReversibleParams, ThetaVector
from .transition import TransitionMatrix


def _read_text(source) -> str:
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        try:
            return Path(source).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc}") from None
    return str(source)


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {what}: {exc.msg}", line=exc.lineno) from None


def _coerce_label(tok):
    if isinstance(tok, bool):
        raise InputError(f"invalid vertex label {tok!r}")
    if isinstance(tok, (int, str)):
        return tok
    raise InputError(f"invalid vertex label {tok!r}")


# -- graphs -----------------------------------------------------------------------

def parse_graph(text: str) -> StructureGraph:
    """Graph from an edge list (``u v`` per line, ``#`` comments) or the JSON form.

    Edge-list labels are integers when every token parses as one, strings
    otherwise.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _graph_from_json(_load_json(text, "graph"))
    pairs: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.replace(",", " ").split()
        if len(toks) != 2:
            raise InputError(f"expected two vertex labels, got {len(toks)} tokens", line=lineno)
        pairs.append((lineno, toks))
    if not pairs:
        raise InputError("empty edge list")
    try:
        conv = [(ln, (int(a), int(b))) for ln, (a, b) in pairs]
    except ValueError:
        conv = [(ln, (a, b)) for ln, (a, b) in pairs]
    for ln, (a, b) in conv:
        if a == b:
            raise SelfLoopError(f"line {ln}: self-loop at vertex {a}")
    return build_graph([e for _, e in conv])


def _graph_from_json(obj) -> StructureGraph:
    if not isinstance(obj, dict) or "edges" not in obj:
        raise InputError('graph JSON needs an "edges" array')
    edges = obj["edges"]
    if not isinstance(edges, list) or not all(isinstance(e, list) and len(e) == 2 for e in edges):
        raise InputError('"edges" must be a list of [u, v] pairs')
    edges = [(_coerce_label(u), _coerce_label(v)) for u, v in edges]
    verts = obj.get("vertices")
    if verts is not None:
        verts = [_coerce_label(v) for v in verts]
    return build_graph(edges, vertices=verts)


def read_graph(source) -> StructureGraph:
    return parse_graph(_read_text(source))


def graph_to_json(g: StructureGraph) -> dict:
    return {"vertices": list(g.vertices), "edges": [list(e) for e in g.edge_list()]}


# -- label helpers ----------------------------------------------------------------

def _label_map(g: StructureGraph) -> dict[str, object]:
    return {str(v): v for v in g.vertices}


def _resolve(g: StructureGraph, tok) -> object:
    lm = _label_map(g)
    key = str(tok).strip()
    if key not in lm:
        raise InputError(f"unknown vertex {tok!r}")
    return lm[key]


def _edge_key(g: StructureGraph, key: str) -> int:
    parts = key.split("-")
    if len(parts) != 2:
        raise InputError(f"edge key {key!r} is not of the form 'v-w'")
    u, v = (_resolve(g, p) for p in parts)
    i, j = sorted((g.index(u), g.index(v)))
    try:
        return g.edges.index((i, j))
    except ValueError:
        raise InputError(f"{key!r} is not an edge of the graph") from None


def _subset_key(g: StructureGraph, key) -> tuple:
    if isinstance(key, list):
        toks = key
    else:
        toks = [t for t in str(key).strip("{}[] ").split(",") if t.strip()]
    return tuple(sorted(_resolve(g, t) for t in toks))


def subset_key(B) -> str:
    return ",".join(str(v) for v in B)


def edge_key(g: StructureGraph, k: int) -> str:
    i, j = g.edges[k]
    return f"{g.vertices[i]}-{g.vertices[j]}"


def parse_family(g: StructureGraph, text: str) -> list[tuple] | None:
    """A keyword (``default`` or ``all``) or subsets separated by ``;`` with members separated by ``,``."""
    from .graph import all_proper_subsets, default_family

    text = text.strip()
    if text == "default":
        return default_family(g)
    if text == "all":
        return all_proper_subsets(g)
    return [_subset_key(g, part) for part in text.split(";") if part.strip()]


# -- transition matrices ----------------------------------------------------------

def parse_matrix(text: str, g: StructureGraph | None = None) -> TransitionMatrix:
    """``{"vertices": [...], "rows": [[...], ...]}``; the graph is inferred when not given."""
    obj = _load_json(text, "matrix")
    if not isinstance(obj, dict) or "rows" not in obj:
        raise InputError('matrix JSON needs a "rows" array')
    try:
        rows = np.array(obj["rows"], dtype=float)
    except (TypeError, ValueError):
        raise InputError('"rows" must be a rectangular array of numbers') from None
    if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
        raise InputError('"rows" must be a square matrix')
    verts = obj.get("vertices")
    if g is None:
        if verts is not None:
            verts = [_coerce_label(v) for v in verts]
        return TransitionMatrix.from_rows(rows, vertices=verts)
    if verts is not None:
        order = [g.index(_resolve(g, v)) for v in verts]
        if sorted(order) != list(range(g.n_vertices)) or len(order) != rows.shape[0]:
            raise InputError("matrix vertices do not match the graph")
        perm = np.empty(len(order), dtype=int)
        perm[order] = np.arange(len(order))
        rows = rows[np.ix_(perm, perm)]
    return TransitionMatrix(g, rows)


def read_matrix(source, g: StructureGraph | None = None) -> TransitionMatrix:
    return parse_matrix(_read_text(source), g)


def matrix_to_json(P: TransitionMatrix) -> dict:
    return {"vertices": list(P.graph.vertices), "rows": P.matrix.tolist()}


def labeled_matrix_json(M, row_labels, col_labels) -> dict:
    M = np.asarray(M)
    return {"row_labels": list(row_labels), "col_labels": list(col_labels), "data": M.tolist()}


def labeled_matrix_csv(M, row_labels, col_labels) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([""] + [str(c) for c in col_labels])
    M = np.asarray(M)
    integral = np.issubdtype(M.dtype, np.integer)
    for lab, row in zip(row_labels, M):
        w.writerow([str(lab)] + [str(int(x)) if integral else "%.17g" % x for x in row])
    return buf.getvalue()


# -- parameters -------------------------------------------------------------------

def parse_params(text: str, g: StructureGraph) -> ReversibleParams:
    """``{"s": {"v-w": x}, "t": {"1,2": x}, "family": [[1, 2], ...]}``.

    Without ``family`` the keys of ``t`` define it (in file order).
    """
    obj = _load_json(text, "parameters")
    if not isinstance(obj, dict) or "s" not in obj:
        raise InputError('parameter JSON needs an "s" object')
    s = np.full(g.n_edges, np.nan)
    for key, val in obj["s"].items():
        s[_edge_key(g, key)] = float(val)
    if np.any(np.isnan(s)):
        missing = [edge_key(g, k) for k in np.flatnonzero(np.isnan(s))]
        raise InputError(f"missing s for edges {missing}")
    tmap = {_subset_key(g, k): float(v) for k, v in obj.get("t", {}).items()}
    if "family" in obj:
        family = [_subset_key(g, B) for B in obj["family"]]
    else:
        family = list(tmap)
    try:
        t = [tmap[B] for B in family]
    except KeyError as exc:
        raise InputError(f"no t value for family member {list(exc.args[0])}") from None
    if set(tmap) - set(family):
        raise InputError("t has entries for subsets outside the family")
    return ReversibleParams.create(g, s, t, family)


def read_params(source, g: StructureGraph) -> ReversibleParams:
    return parse_params(_read_text(source), g)


def params_to_json(p: ReversibleParams) -> dict:
    g = p.graph
    fam = p.family_labels()
    return {
        "s": {edge_key(g, k): float(x) for k, x in enumerate(p.s)},
        "t": {subset_key(B): float(x) for B, x in zip(fam, p.t)},
        "family": [list(B) for B in fam],
    }


def parse_theta(text: str, g: StructureGraph) -> ThetaVector:
    obj = _load_json(text, "theta")
    if not isinstance(obj, dict) or "theta_v" not in obj or "theta_e" not in obj:
        raise InputError('theta JSON needs "theta_v" and "theta_e"')
    tv = np.zeros(g.n_vertices)
    for key, val in obj["theta_v"].items():
        tv[g.index(_resolve(g, key))] = float(val)
    te = np.zeros(g.n_edges)
    for key, val in obj["theta_e"].items():
        te[_edge_key(g, key)] = float(val)
    return ThetaVector(g, tv, te)


def theta_to_json(th: ThetaVector) -> dict:
    g = th.graph
    return {
        "theta_v": {str(v): float(x) for v, x in zip(g.vertices, th.theta_v)},
        "theta_e": {edge_key(g, k): float(x) for k, x in enumerate(th.theta_e)},
    }


# -- cycles and lattice vectors ----------------------------------------------------

def cycle_to_json(c: Cycle) -> list:
    return c.labels()


def vector_to_json(g: StructureGraph, z) -> dict:
    return {"arcs": g.arc_labels(), "entries": [int(x) for x in np.asarray(z)]}


def parse_vector(text: str, g: StructureGraph) -> LatticeElement:
    """Integer arc vector: a JSON list in canonical arc order, ``{"entries": [...]}``,
    or ``{"arcs": [...], "entries": [...]}`` in any arc order."""
    obj = _load_json(text, "vector")
    if isinstance(obj, dict):
        entries = obj.get("entries")
        if entries is None:
            raise InputError('vector JSON needs an "entries" array')
        arcs = obj.get("arcs")
    else:
        entries, arcs = obj, None
    if not isinstance(entries, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in entries):
        raise InputError("vector entries must be integers")
    if arcs is not None:
        canon = g.arc_labels()
        if sorted(arcs) != sorted(canon) or len(arcs) != len(entries):
            raise InputError("arc labels do not match the graph")
        pos = {a: k for k, a in enumerate(arcs)}
        entries = [entries[pos[a]] for a in canon]
    if len(entries) != g.n_arcs:
        raise InputError(f"expected {g.n_arcs} entries, got {len(entries)}")
    return LatticeElement(tuple(entries), g)


# -- chain paths ------------------------------------------------------------------

def path_to_text(path: ChainPath) -> str:
    head = f"# rng={path.rng} seed={path.seed} transitions={path.n_transitions}\n"
    return head + "\n".join(str(v) for v in path.labels()) + "\n"


def path_to_json(path: ChainPath) -> dict:
    return {"rng": path.rng, "seed": path.seed, "states": path.labels()}


def parse_path(text: str, g: StructureGraph) -> ChainPath:
    """Inverse of :func:`path_to_text` and :func:`path_to_json`."""
    if text.lstrip().startswith("{"):
        obj = _load_json(text, "path")
        labels, seed, rng = obj.get("states", []), obj.get("seed"), obj.get("rng", RNG_NAME)
    else:
        labels, seed, rng = [], None, RNG_NAME
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    k, _, v = tok.partition("=")
                    if k == "seed":
                        seed = int(v)
                    elif k == "rng":
                        rng = v
                continue
            labels.append(line)
    states = np.array([g.index(_resolve(g, v)) for v in labels], dtype=np.int64)
    if states.size == 0:
        raise InputError("empty path")
    return ChainPath(states, seed, g, rng)


def dumps(obj) -> str:
    """Compact JSON with exact float round trips."""
    return json.dumps(obj, default=_json_default)


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")
