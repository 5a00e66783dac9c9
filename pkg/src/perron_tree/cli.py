"""Command line: ``perron-tree {analyze,bottleneck,verify,gen}``.

Exit codes: 0 success, 1 input or usage error, 2 a verification check failed.
All vertex references in output use the external labels of the input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .errors import PerronTreeError, TreeError
from .spectral import (
    Kind,
    bottleneck_formula,
    bottleneck_oracle,
    lambda1,
    perron_branches_at,
)
from .tolerances import Tolerances
from .tree import Tree, branches_at, parse_edge_list, random_tree
from .verify import ensemble_crosscheck, run_checks

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _load(args) -> tuple[Tree, dict[str, Any]]:
    if args.gen is not None:
        n, seed = args.gen
        return random_tree(n, seed), {"generator": {"n": n, "seed": seed}}
    if args.input is None:
        raise UsageError("give an edge-list file or --gen N SEED")
    path = Path(args.input)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None
    try:
        return parse_edge_list(text), {"path": str(path)}
    except TreeError as exc:
        where = f"{path}:{exc.line}" if exc.line else str(path)
        raise UsageError(f"{where}: {exc.kind}: {exc}") from None


def _label_map(t: Tree, values) -> dict[str, float]:
    return {str(t.labels[v]): float(values[v]) for v in range(t.n)}


def _branch_rows(t: Tree, v: int, tol) -> dict[str, Any]:
    pb = perron_branches_at(t, v, tol)
    return {
        "vertex": t.labels[v],
        "branches": [
            {"anchor": t.labels[b.anchor], "rho": pb.rho[idx], "perron": idx in pb.perron}
            for idx, b in enumerate(pb.branch_set.branches)
        ],
    }


def analyze_document(t: Tree, source: dict[str, Any], tol: Tolerances,
                     timing: bool = False) -> tuple[dict[str, Any], bool]:
    """Report document for one tree and whether every check passed."""
    start = time.perf_counter()
    report = lambda1(t, tol)
    verdicts = run_checks(t, report, tol)
    elapsed = (time.perf_counter() - start) * 1e3
    cls = report.classification
    g_scale = max(1.0, float(np.max(np.abs(report.g))))
    certificates = {
        "oracle": abs(report.lambda1 - report.oracle_lambda1) <= 1e-8,
        "residual": report.residual_inf <= 1e-8 * g_scale,
        "orthogonality": report.orth_residual <= 1e-8,
    }
    ok = all(v.passed for v in verdicts.values()) and all(certificates.values())
    doc = {
        "schema_version": SCHEMA_VERSION,
        "input": source,
        "n": t.n,
        "classification": {
            "kind": cls.kind.value,
            "characteristic": [t.labels[v] for v in cls.characteristic],
            "walk_trace": [t.labels[v] for v in cls.walk_trace],
        },
        "lambda1": report.lambda1,
        "gamma": report.gamma,
        "oracle_lambda1": report.oracle_lambda1,
        "residuals": {
            "eigen_inf": report.residual_inf,
            "orthogonality": report.orth_residual,
            "oracle_abs": abs(report.lambda1 - report.oracle_lambda1),
            "fixed_point_gap": report.fixed_point_gap,
        },
        "perron_values": [_branch_rows(t, v, tol) for v in cls.characteristic],
        "g": _label_map(t, report.g),
        "f": _label_map(t, report.f),
        "checks": {name: v.passed for name, v in verdicts.items()} | certificates,
        "timing_ms": elapsed if timing else None,
    }
    return doc, ok


def _fmt(x) -> str:
    return "null" if x is None else repr(float(x))


def analyze_text(doc: dict[str, Any]) -> str:
    c = doc["classification"]
    lines = []
    if c["kind"] == Kind.TYPE1.value:
        lines.append(f"Type 1, characteristic vertex {c['characteristic'][0]}")
    else:
        a, b = c["characteristic"]
        lines.append(f"Type 2, characteristic vertices {a} and {b}")
    lines.append(f"lambda1 = {_fmt(doc['lambda1'])}")
    if doc["gamma"] is not None:
        lines.append(f"gamma = {_fmt(doc['gamma'])}")
    lines.append(f"oracle lambda1 = {_fmt(doc['oracle_lambda1'])}")
    for name, val in doc["residuals"].items():
        lines.append(f"residual {name} = {_fmt(val)}")
    lines.append("walk: " + " -> ".join(str(v) for v in c["walk_trace"]))
    for site in doc["perron_values"]:
        for b in site["branches"]:
            mark = " (Perron)" if b["perron"] else ""
            lines.append(f"at {site['vertex']}: branch via {b['anchor']} rho = {_fmt(b['rho'])}{mark}")
    lines.append("vertex g f")
    for lab in doc["g"]:
        lines.append(f"{lab} {_fmt(doc['g'][lab])} {_fmt(doc['f'][lab])}")
    for name, ok in doc["checks"].items():
        lines.append(f"check {name}: {'pass' if ok else 'FAIL'}")
    if doc["timing_ms"] is not None:
        lines.append(f"time = {doc['timing_ms']:.3f} ms")
    return "\n".join(lines) + "\n"


def dumps(doc) -> str:
    # floats use repr: shortest string that round-trips exactly
    return json.dumps(doc, indent=2) + "\n"


def cmd_analyze(args, tol) -> int:
    t, source = _load(args)
    doc, ok = analyze_document(t, source, tol, timing=args.timing)
    sys.stdout.write(dumps(doc) if args.format == "json" else analyze_text(doc))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bottleneck(args, tol) -> int:
    t, source = _load(args)
    if args.vertex is None:
        raise UsageError("--vertex is required")
    try:
        k = t.vertex(args.vertex)
    except PerronTreeError as exc:
        raise UsageError(f"UnknownVertex: {exc}") from None
    pb = perron_branches_at(t, k, tol)
    rows = []
    worst = 0.0
    for idx, b in enumerate(branches_at(t, k).branches):
        formula = bottleneck_formula(t, k, b)
        dev = float(np.max(np.abs(formula.matrix - bottleneck_oracle(t, k, b, tol).matrix)))
        worst = max(worst, dev)
        rows.append({
            "anchor": t.labels[b.anchor],
            "vertices": [t.labels[v] for v in b.vertices],
            "matrix": formula.matrix.tolist(),
            "rho": pb.rho[idx],
            "perron": idx in pb.perron,
            "oracle_deviation": dev,
        })
    doc = {"schema_version": SCHEMA_VERSION, "input": source, "root": args.vertex, "branches": rows}
    if args.format == "json":
        sys.stdout.write(dumps(doc))
    else:
        out = [f"bottleneck matrices at vertex {args.vertex}"]
        for r in rows:
            out.append(f"branch {r['vertices']} (anchor {r['anchor']})"
                       + (" Perron" if r["perron"] else ""))
            out.extend("  [" + ", ".join(_fmt(x) for x in row) + "]" for row in r["matrix"])
            out.append(f"  rho = {_fmt(r['rho'])}  oracle deviation = {r['oracle_deviation']:.3e}")
        sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK if worst <= 1e-9 else EXIT_VERIFY


def cmd_verify(args, tol) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if not 2 <= args.nmin <= args.nmax:
        raise UsageError("need 2 <= --nmin <= --nmax")
    summary = ensemble_crosscheck(args.nmin, args.nmax, args.trials, args.seed, tol,
                                  workers=args.workers)
    doc = {"schema_version": SCHEMA_VERSION} | summary.to_dict()
    if args.format == "json":
        sys.stdout.write(dumps(doc))
    else:
        out = [
            f"{summary.passed}/{summary.trials} trials passed "
            f"(n in [{summary.n_min}, {summary.n_max}], seed {summary.seed})",
            "types: " + ", ".join(f"{k}={v}" for k, v in summary.type_counts.items()),
            f"classification agreement: {summary.classification_agreements}/{summary.trials}",
            f"max |lambda1 - oracle| = {summary.max_lambda_dev:.3e}",
            f"max eigen residual = {summary.max_residual:.3e}",
            f"max orthogonality residual = {summary.max_orth_residual:.3e}",
            f"max fixed point gap = {summary.max_fixed_point_gap:.3e}",
            f"max bottleneck deviation = {summary.max_bottleneck_dev:.3e}",
            f"max Laplacian bottleneck deviation = {summary.max_laplacian_bottleneck_dev:.3e}",
        ]
        out += [f"{k}: {v}/{summary.trials}" for k, v in summary.verdict_passes.items()]
        out += [f"FAILED n={f['n']} seed={f['seed']}: {'; '.join(f['problems'])}"
                for f in summary.failures]
        sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK if summary.failed == 0 else EXIT_VERIFY


def cmd_gen(args, tol) -> int:
    try:
        t = random_tree(args.n, args.seed)
    except PerronTreeError as exc:
        raise UsageError(str(exc)) from None
    text = t.to_edge_list()
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"{args.out}: {exc.strerror or exc}") from None
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="perron-tree", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="override one numerical tolerance (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tree_input(p):
        p.add_argument("input", nargs="?", help="edge-list file")
        p.add_argument("--gen", nargs=2, type=int, metavar=("N", "SEED"),
                       help="use random_tree(N, SEED) instead of a file")

    p = sub.add_parser("analyze", parents=[common], help="classify and compute lambda1")
    tree_input(p)
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bottleneck", parents=[common], help="bottleneck matrices at a vertex")
    tree_input(p)
    p.add_argument("--vertex", type=int, help="root vertex label")
    p.set_defaults(func=cmd_bottleneck)

    p = sub.add_parser("verify", parents=[common], help="random-ensemble cross-check")
    p.add_argument("--nmin", type=int, default=2)
    p.add_argument("--nmax", type=int, default=60)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", parents=[common], help="write a random tree edge list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        tol = Tolerances.from_overrides(args.tol)
        return args.func(args, tol)
    except (UsageError, ValueError) as exc:
        print(f"perron-tree {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
