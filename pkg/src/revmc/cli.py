"""``revmc`` command-line driver.

Exit codes: 0 success or reversible, 1 not reversible, 2 parse or input
error, 3 invalid graph, 4 not q-reversible, 5 infeasible parameters.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as rio
from .cycles import conformal_decompose, enumerate_cycles, graver_basis, lattice_basis
from .errors import (
    FeasibilityViolatedError,
    GraphError,
    NotQReversibleError,
    RevMCError,
)
from .graph import incidence_matrix, model_matrix
from .kolmogorov import DEFAULT_TOL, certify_reversibility, check_kolmogorov_exhaustive
from .markov import (
    MIN_PATH_TRANSITIONS,
    EMPIRICAL_THRESHOLD,
    empirical_reversibility_test,
    invariant_distribution,
    sample_reversible,
    simulate_chain,
)
from .parameterization import feasibility_report, from_st_params, to_st_params

EXIT_OK = 0
EXIT_NOT_REVERSIBLE = 1
EXIT_PARSE = 2
EXIT_GRAPH = 3
EXIT_NOT_Q_REVERSIBLE = 4
EXIT_INFEASIBLE = 5


class _Failure(Exception):
    def __init__(self, code: int, payload: dict):
        super().__init__(payload.get("error", ""))
        self.code = code
        self.payload = payload


# -- output helpers -----------------------------------------------------------------

def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def _table(rows: list[str], cols: list[str], M) -> str:
    cells = [[""] + list(cols)] + [[r] + [_fmt(x) for x in row] for r, row in zip(rows, np.asarray(M).tolist())]
    width = [max(len(c[k]) for c in cells) for k in range(len(cells[0]))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(line, width)) for line in cells)


def _text(report: dict, indent: str = "") -> str:
    out = []
    for key, val in report.items():
        if isinstance(val, dict) and {"row_labels", "col_labels", "data"} <= set(val):
            out.append(f"{indent}{key}:")
            tab = _table(val["row_labels"], val["col_labels"], val["data"]) if val["data"] else "(empty)"
            out.extend(indent + "  " + line for line in tab.splitlines())
        elif isinstance(val, dict):
            out.append(f"{indent}{key}:")
            out.append(_text(val, indent + "  "))
        elif isinstance(val, list) and val and isinstance(val[0], (list, dict)):
            out.append(f"{indent}{key}: ({len(val)})")
            out.extend(f"{indent}  {rio.dumps(v)}" for v in val)
        else:
            out.append(f"{indent}{key}: {rio.dumps(val) if isinstance(val, (list, dict)) else _fmt(val)}")
    return "\n".join(out)


def _emit(args, report: dict) -> None:
    body = rio.dumps(report) if args.format == "json" else _text(report)
    if args.output:
        Path(args.output).write_text(body + "\n")
    else:
        sys.stdout.write(body + "\n")


# -- subcommands ------------------------------------------------------------------

def _family(args, g):
    return rio.parse_family(g, args.family) if args.family else None


def cmd_analyze(args) -> int:
    g = rio.read_graph(args.graph)
    mm = model_matrix(g, _family(args, g))
    arcs = g.arc_labels()
    cycles = enumerate_cycles(g)
    report = {
        **rio.graph_to_json(g),
        "arcs": arcs,
        "gamma": rio.labeled_matrix_json(incidence_matrix(g), g.vertex_labels(), g.edge_labels()),
        "E": rio.labeled_matrix_json(mm.E, g.edge_labels(), arcs),
        "U": rio.labeled_matrix_json(mm.U, [g.subset_label(B) for B in mm.family], arcs),
        "A": rio.labeled_matrix_json(mm.A, mm.row_labels(), arcs),
        "family": [list(B) for B in mm.family_labels()],
        "rank": mm.rank(),
        "kernel_dimension": g.n_arcs - mm.rank(),
        "cycles": [rio.cycle_to_json(c) for c in cycles],
        "lattice_basis": [list(z.entries) for z in lattice_basis(mm)],
        "graver_basis": [list(z.entries) for z in graver_basis(g)],
    }
    _emit(args, report)
    return EXIT_OK


def _certificate_json(P, cert) -> dict:
    g = P.graph
    vs = g.vertices
    return {
        "verdict": cert.verdict.value,
        "kappa": {str(v): float(k) for v, k in zip(vs, cert.kappa)},
        "max_residual": cert.max_residual,
        "worst_arc": None if cert.worst_arc is None else [vs[cert.worst_arc[0]], vs[cert.worst_arc[1]]],
        "tree": [list(e) for e in cert.tree_labels()],
    }


def _load_pair(args):
    g = rio.read_graph(args.graph)
    P = rio.read_matrix(args.matrix, g)
    return g, P


def cmd_check(args) -> int:
    g, P = _load_pair(args)
    if getattr(args, "exhaustive", False):
        res = check_kolmogorov_exhaustive(P, tol=args.tol)
        report = {
            **rio.matrix_to_json(P),
            "verdict": "reversible" if res.holds else "not-reversible",
            "mode": "exhaustive",
            "violations": [rio.cycle_to_json(c) for c in res.violations],
        }
        _emit(args, report)
        return EXIT_OK if res.holds else EXIT_NOT_REVERSIBLE
    cert = certify_reversibility(P, tol=args.tol)
    report = {**rio.matrix_to_json(P), "mode": "certificate", **_certificate_json(P, cert)}
    _emit(args, report)
    return EXIT_OK if cert.reversible else EXIT_NOT_REVERSIBLE


def cmd_params(args) -> int:
    g = rio.read_graph(args.graph)
    if args.direction == "to":
        if not args.matrix:
            raise _Failure(EXIT_PARSE, {"error": "--direction to needs --matrix"})
        P = rio.read_matrix(args.matrix, g)
        cert = certify_reversibility(P, tol=args.tol)
        if not cert.reversible:
            report = {"error": "matrix is not reversible", **_certificate_json(P, cert)}
            _emit(args, report)
            return EXIT_NOT_REVERSIBLE
        _emit(args, rio.params_to_json(to_st_params(P, _family(args, g))))
        return EXIT_OK
    if not args.params:
        raise _Failure(EXIT_PARSE, {"error": "--direction from needs --params"})
    params = rio.read_params(args.params, g)
    try:
        P = from_st_params(params)
    except FeasibilityViolatedError as exc:
        slack = feasibility_report(params)
        raise _Failure(EXIT_INFEASIBLE, {
            "error": str(exc),
            "violating_vertices": exc.vertices,
            "slack": {str(v): float(x) for v, x in zip(g.vertices, slack)},
        }) from None
    _emit(args, rio.matrix_to_json(P))
    return EXIT_OK


def cmd_sample(args) -> int:
    g = rio.read_graph(args.graph)
    P, params = sample_reversible(g, args.seed, family=_family(args, g))
    _emit(args, {**rio.matrix_to_json(P), **rio.params_to_json(params), "seed": args.seed})
    return EXIT_OK


def cmd_simulate(args) -> int:
    g, P = _load_pair(args)
    if args.start == "pi":
        start = invariant_distribution(P)
    else:
        start = np.zeros(g.n_vertices)
        start[g.index(rio._resolve(g, args.start))] = 1.0
    path = simulate_chain(P, start, args.steps, args.seed)
    report = {"rng": path.rng, "seed": args.seed, "transitions": path.n_transitions}
    if path.n_transitions >= args.min_transitions:
        emp = empirical_reversibility_test(path, threshold=args.threshold, min_transitions=args.min_transitions)
        vs = g.vertices
        report["empirical"] = {
            "statistic": emp.statistic,
            "threshold": emp.threshold,
            "passed": emp.passed,
            "worst_edge": None if emp.worst_edge is None else [vs[emp.worst_edge[0]], vs[emp.worst_edge[1]]],
        }
    else:
        report["empirical"] = None
    if args.path_out:
        Path(args.path_out).write_text(rio.path_to_text(path))
    if args.include_path:
        report["states"] = path.labels()
    _emit(args, report)
    return EXIT_OK


def cmd_decompose(args) -> int:
    g = rio.read_graph(args.graph)
    z = rio.parse_vector(rio._read_text(args.vector), g)
    parts = conformal_decompose(z)
    report = {
        **rio.vector_to_json(g, z.entries),
        "components": [{"cycle": rio.cycle_to_json(c), "multiplier": int(k)} for c, k in parts],
    }
    _emit(args, report)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json", help="output format (default json)")
    common.add_argument("-o", "--output", help="write the report to this file instead of stdout")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="numerical tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--family", help='cocycle family: "default", "all", or subsets like "1;3;1,2"')

    p = argparse.ArgumentParser(prog="revmc", description="Reversibility tools for Markov chains on graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="graph structure, model matrix, cycles and bases")
    a.add_argument("graph")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("check", parents=[common], help="reversibility verdict for a transition matrix")
    c.add_argument("graph")
    c.add_argument("matrix")
    c.add_argument("--exhaustive", action="store_true", help="test every cycle instead of the spanning-tree certificate")
    c.set_defaults(func=cmd_check)

    ce = sub.add_parser("certify", parents=[common], help="spanning-tree reversibility certificate")
    ce.add_argument("graph")
    ce.add_argument("matrix")
    ce.set_defaults(func=cmd_check, exhaustive=False)

    pa = sub.add_parser("params", parents=[common], help="convert between a matrix and (s, t) parameters")
    pa.add_argument("graph")
    pa.add_argument("--direction", choices=("to", "from"), required=True,
                    help="to: matrix -> parameters; from: parameters -> matrix")
    pa.add_argument("--matrix")
    pa.add_argument("--params")
    pa.set_defaults(func=cmd_params)

    sa = sub.add_parser("sample", parents=[common], help="random reversible matrix on a graph")
    sa.add_argument("graph")
    sa.set_defaults(func=cmd_sample)

    si = sub.add_parser("simulate", parents=[common], help="simulate a chain and run the empirical pair-count test")
    si.add_argument("graph")
    si.add_argument("matrix")
    si.add_argument("--steps", type=int, default=MIN_PATH_TRANSITIONS)
    si.add_argument("--start", default="pi", help='start vertex label, or "pi" for the invariant distribution')
    si.add_argument("--threshold", type=float, default=EMPIRICAL_THRESHOLD)
    si.add_argument("--min-transitions", type=int, default=MIN_PATH_TRANSITIONS)
    si.add_argument("--path-out", help="write the visited states to this file")
    si.add_argument("--include-path", action="store_true", help="embed the visited states in the report")
    si.set_defaults(func=cmd_simulate)

    d = sub.add_parser("decompose", parents=[common], help="conformal cycle decomposition of an arc vector")
    d.add_argument("graph")
    d.add_argument("vector")
    d.set_defaults(func=cmd_decompose)
    return p


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, NotQReversibleError):
        return EXIT_NOT_Q_REVERSIBLE
    if isinstance(exc, FeasibilityViolatedError):
        return EXIT_INFEASIBLE
    if isinstance(exc, GraphError):
        return EXIT_GRAPH
    return EXIT_PARSE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Failure as f:
        sys.stderr.write(f"revmc: {f.payload.get('error')}\n")
        _emit(args, f.payload)
        return f.code
    except (RevMCError, ValueError, OSError) as exc:
        sys.stderr.write(f"revmc: {exc}\n")
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
