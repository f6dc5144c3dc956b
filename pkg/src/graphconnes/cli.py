"""Command-line front end.

::

    graphconnes dist GRAPH FROM TO [--tol T] [--method M] [--certificate]
    graphconnes matrix GRAPH [--jsonl]
    graphconnes norm GRAPH [--operator adjacency|laplacian|dirac]
    graphconnes gen KIND PARAM... -o OUT
    graphconnes verify GRAPH [--pair FROM TO]

Every command except ``gen`` prints one JSON report on stdout. Exit codes:
0 success, 1 usage or parse error, 2 unreachable pair, 3 solver did not
converge, 4 a verification check failed.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Any, Sequence

import numpy as np

from . import operators as ops
from .checks import operator_identity_checks
from .connes import (
    SolverConfig,
    Status,
    connes_distance,
    distance_matrix,
    structural_checks,
)
from .edgelist import EdgeListError, LabelledGraph, read_edgelist, write_edgelist
from .graph import GraphError, bfs_distances, generate, random_graph
from .spectral import adjacency_norm_bounds, spectral_norm

SCHEMA_VERSION = "1.0"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNREACHABLE = 2
EXIT_NOT_CONVERGED = 3
EXIT_CHECK_FAILED = 4

_NUMBER = {"type": ["number", "null"]}
_GRAPH_SCHEMA = {
    "type": "object",
    "required": ["nodes", "edges", "directed", "v_max"],
    "properties": {
        "nodes": {"type": "integer", "minimum": 0},
        "edges": {"type": "integer", "minimum": 0},
        "directed": {"type": "boolean"},
        "v_max": {"type": "integer", "minimum": 0},
    },
}
DISTANCE_SCHEMA = {
    "type": "object",
    "required": ["from", "to", "value", "lower_bound", "upper_bound",
                 "graph_distance", "status", "iterations", "residual"],
    "properties": {
        "from": {"type": "string"},
        "to": {"type": "string"},
        "value": _NUMBER,
        "lower_bound": _NUMBER,
        "upper_bound": _NUMBER,
        "graph_distance": {"type": ["integer", "null"], "minimum": 0},
        "status": {"enum": [s.value for s in Status]},
        "iterations": {"type": "integer", "minimum": 0},
        "residual": _NUMBER,
        "certificate": {
            "type": "object",
            "required": ["norm", "values"],
            "properties": {"norm": _NUMBER, "values": {"type": "object"}},
        },
    },
}
REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "command", "graph", "results", "timing", "diagnostics"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"type": "object", "required": ["name", "argv"]},
        "graph": _GRAPH_SCHEMA,
        "results": {},
        "timing": {"type": "object", "required": ["seconds"]},
        "diagnostics": {"type": "object"},
    },
}
MATRIX_LINE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "row", "col", "result"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "row": {"type": "integer"},
        "col": {"type": "integer"},
        "result": DISTANCE_SCHEMA,
    },
}


def _round(x: Any) -> Any:
    """Round floats to 12 significant digits; non-finite floats become null."""
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(f"{x:.12g}") if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_round(v) for v in x]
    return str(x)


def dumps(obj: Any) -> str:
    return json.dumps(_round(obj), allow_nan=False)


def distance_payload(lg: LabelledGraph, a: int, b: int, res, certificate=False) -> dict:
    hop = res.graph_distance
    out = {
        "from": lg.labels[a],
        "to": lg.labels[b],
        "value": res.value,
        "lower_bound": res.lower_bound,
        "upper_bound": res.upper_bound,
        "graph_distance": hop if isinstance(hop, int) else None,
        "status": res.status.value,
        "iterations": res.iterations,
        "residual": res.residual,
    }
    if certificate and res.certificate is not None:
        out["certificate"] = {
            "norm": res.certificate.norm,
            "values": dict(zip(lg.labels, res.certificate.f.tolist())),
        }
    return out


def _report(name, argv, lg, results, start, diagnostics=None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": {"name": name, "argv": list(argv)},
        "graph": lg.graph.summary(),
        "results": results,
        "timing": {"seconds": time.perf_counter() - start},
        "diagnostics": diagnostics or {},
    }


def _config(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, method=args.method, seed=args.seed,
                        max_iterations=args.max_iterations)


def _status_code(statuses) -> int:
    statuses = set(statuses)
    if Status.BOUND_ONLY in statuses:
        return EXIT_NOT_CONVERGED
    if Status.UNREACHABLE in statuses:
        return EXIT_UNREACHABLE
    return EXIT_OK


def cmd_dist(args, argv, out) -> int:
    start = time.perf_counter()
    lg = read_edgelist(args.graph)
    a, b = lg.node(args.source), lg.node(args.target)
    cfg = _config(args)
    res = connes_distance(lg.graph, a, b, cfg)
    payload = distance_payload(lg, a, b, res, args.certificate)
    diag = {"method": cfg.method, "tol": cfg.tol, "seed": cfg.seed,
            "dual_bound": res.dual_bound, "strict_upper": res.strict_upper}
    print(dumps(_report("dist", argv, lg, payload, start, diag)), file=out)
    return _status_code([res.status])


def cmd_matrix(args, argv, out) -> int:
    start = time.perf_counter()
    lg = read_edgelist(args.graph)
    cfg = _config(args)
    table = distance_matrix(lg.graph, cfg)
    statuses = [r.status for row in table for r in row]
    if args.jsonl:
        for i, row in enumerate(table):
            for k, res in enumerate(row):
                line = {"schema_version": SCHEMA_VERSION, "row": i, "col": k,
                        "result": distance_payload(lg, i, k, res, args.certificate)}
                print(dumps(line), file=out)
    else:
        results = {
            "labels": list(lg.labels),
            "values": [[r.value for r in row] for row in table],
            "pairs": [distance_payload(lg, i, k, r, args.certificate)
                      for i, row in enumerate(table) for k, r in enumerate(row)],
        }
        diag = {"method": cfg.method, "tol": cfg.tol, "seed": cfg.seed}
        print(dumps(_report("matrix", argv, lg, results, start, diag)), file=out)
    # an unreachable pair is expected in a matrix over a disconnected graph
    return EXIT_NOT_CONVERGED if Status.BOUND_ONLY in statuses else EXIT_OK


def _norm_operator(g, name):
    if name == "adjacency":
        if g.directed:
            a_in, a_out = ops.adjacency(g)
            return ops.GraphOperator("A_in + A_out", "H0", "H0", (a_in.matrix + a_out.matrix).tocsr())
        return ops.adjacency(g)
    if name == "laplacian":
        lap = ops.laplacian(g)
        return ops.GraphOperator("-Delta", "H0", "H0", -lap.matrix)
    return ops.dirac(g)


def cmd_norm(args, argv, out) -> int:
    start = time.perf_counter()
    lg = read_edgelist(args.graph)
    est = spectral_norm(_norm_operator(lg.graph, args.operator), args.tol, seed=args.seed)
    results = {
        "operator": args.operator,
        "value": est.value,
        "iterations": est.iterations,
        "residual": est.residual,
        "lower_bound": est.lower_bound,
        "upper_bound": est.upper_bound,
    }
    if args.operator == "adjacency" and not lg.graph.directed:
        avg, vmax = adjacency_norm_bounds(lg.graph)
        results["average_degree"] = avg
        results["max_degree"] = vmax
    print(dumps(_report("norm", argv, lg, results, start, {"seed": args.seed})), file=out)
    return EXIT_OK


def cmd_gen(args, argv, out) -> int:
    if args.kind == "random":
        if len(args.params) != 2:
            raise GraphError("random needs two parameters: n p")
        g = random_graph(int(args.params[0]), float(args.params[1]),
                         seed=args.seed, directed=args.directed)
    else:
        try:
            params = [int(p) for p in args.params]
        except ValueError:
            raise GraphError(f"{args.kind} takes integer parameters") from None
        try:
            g = generate(args.kind, *params)
        except TypeError:
            raise GraphError(f"wrong number of parameters for {args.kind}") from None
    write_edgelist(args.output, g)
    print(dumps({"schema_version": SCHEMA_VERSION, "written": args.output,
                 "graph": g.summary()}), file=out)
    return EXIT_OK


def _default_pair(lg: LabelledGraph) -> tuple[int, int]:
    g = lg.graph
    if g.node_count < 2:
        return 0, 0
    hops = bfs_distances(g, 0, undirected=True)
    return 0, int(np.argmax(hops))


def cmd_verify(args, argv, out) -> int:
    start = time.perf_counter()
    lg = read_edgelist(args.graph)
    g = lg.graph
    identities = operator_identity_checks(g, seed=args.seed)
    results = {"identities": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                              for c in identities]}
    passed = all(c.passed for c in identities)
    if g.node_count:
        a, b = (lg.node(args.pair[0]), lg.node(args.pair[1])) if args.pair else _default_pair(lg)
        cfg = _config(args)
        res = connes_distance(g, a, b, cfg)
        results["distance"] = distance_payload(lg, a, b, res)
        if res.status is not Status.UNREACHABLE and a != b:
            report = structural_checks(g, a, b, res, cfg=cfg)
            results["structural"] = [
                {"name": c.name, "applicable": c.applicable, "passed": c.passed,
                 "detail": c.detail} for c in report.checks
            ]
            passed = passed and report.passed
    results["passed"] = passed
    print(dumps(_report("verify", argv, lg, results, start, {"seed": args.seed})), file=out)
    for c in identities:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}", file=sys.stderr)
    for c in results.get("structural", []):
        tag = "SKIP" if not c["applicable"] else ("PASS" if c["passed"] else "FAIL")
        print(f"{tag}  {c['name']}  {c['detail']}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--method", choices=["barrier", "projected_ascent"], default="barrier",
                   help="projected_ascent is a slow fallback, meant for small graphs")
    p.add_argument("--max-iterations", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=42)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphconnes", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="Connes distance between two nodes")
    p.add_argument("graph")
    p.add_argument("source", metavar="FROM")
    p.add_argument("target", metavar="TO")
    p.add_argument("--certificate", action="store_true",
                   help="include the optimal admissible function")
    _solver_flags(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("matrix", help="all-pairs Connes distances")
    p.add_argument("graph")
    p.add_argument("--jsonl", action="store_true", help="one JSON line per ordered pair")
    p.add_argument("--certificate", action="store_true")
    _solver_flags(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("norm", help="spectral norm of a graph operator")
    p.add_argument("graph")
    p.add_argument("--operator", choices=["adjacency", "laplacian", "dirac"],
                   default="adjacency")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("gen", help="write a generated graph as an edge list")
    p.add_argument("kind", help="path, cycle, directed_path, directed_lattice_2d, "
                                "binary_tree or random")
    p.add_argument("params", nargs="*")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--directed", action="store_true", help="random graphs only")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="operator identities and structural checks")
    p.add_argument("graph")
    p.add_argument("--pair", nargs=2, metavar=("FROM", "TO"))
    _solver_flags(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args, argv, out)
    except (GraphError, ValueError, OSError) as exc:
        # EdgeListError messages already carry the line number
        kind = "parse error" if isinstance(exc, EdgeListError) else "error"
        print(f"graphconnes: {kind}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
