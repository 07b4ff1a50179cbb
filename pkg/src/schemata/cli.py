"""Command line: validate, prove, oracle and diff on problem files.

Exit codes: 0 sat (or success), 1 unsat, 2 usage or validation error,
3 resource limit, 4 backend unsupported.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .admissibility import validate_problem
from .basesolver import BridgeBackend, solve_base
from .core import params_of
from .export import render_tree
from .oracle import BudgetExceeded, OracleUnsupported, SatAtDepth, differential_check, extract_witness, oracle_check
from .parser import ParseError, Problem, parse_problem
from .tableau import DEFAULT_MAX_NODES, BackendUnsupported, ResourceLimit, Sat, Unsat, prove

EXIT_SAT, EXIT_UNSAT, EXIT_USAGE, EXIT_LIMIT, EXIT_BACKEND = 0, 1, 2, 3, 4
CORPUS_PREFIX = "corpus:"


class UsageError(Exception):
    pass


def corpus_names() -> list:
    root = resources.files("schemata") / "corpus"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".sch"))


def read_source(name: str) -> str:
    """Text of a problem file; ``corpus:NAME`` reads a shipped example."""
    if name.startswith(CORPUS_PREFIX):
        stem = name[len(CORPUS_PREFIX):]
        f = resources.files("schemata") / "corpus" / f"{stem}.sch"
        if not f.is_file():
            raise UsageError(f"no corpus problem {stem!r}; known: {', '.join(corpus_names())}")
        return f.read_text(encoding="utf-8")
    try:
        return Path(name).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {name}: {e.strerror}") from None


def backend_of(spec: str):
    if spec == "builtin":
        return solve_base, "builtin"
    if spec.startswith("bridge:") and spec[len("bridge:"):].strip():
        return BridgeBackend(spec[len("bridge:"):]), "bridge"
    raise UsageError(f"unknown backend {spec!r}; use builtin or bridge:CMD")


def load(name: str, backend_kind: str = "builtin") -> Problem:
    try:
        problem = parse_problem(read_source(name))
    except ParseError as e:
        raise UsageError(f"{name}:{e}") from None
    if not problem.assertions:
        raise UsageError(f"{name}: no (assert ...) form")
    report = validate_problem(problem, backend_kind)
    if not report.ok:
        raise UsageError(f"{name}: not admissible\n{report}")
    return problem


def _fmt_assignment(a: dict) -> str:
    return ", ".join(f"{p.name} = {t}" for p, t in sorted(a.items(), key=lambda kv: kv[0].key))


def cmd_validate(args) -> int:
    try:
        problem = parse_problem(read_source(args.file))
    except ParseError as e:
        raise UsageError(f"{args.file}:{e}") from None
    report = validate_problem(problem, args.backend.split(":")[0])
    print(report)
    return EXIT_SAT if report.ok else EXIT_USAGE


def cmd_prove(args) -> int:
    backend, kind = backend_of(args.backend)
    problem = load(args.file, kind)
    result = prove(
        problem.conjecture,
        problem.signature,
        problem.rules,
        problem.deltas,
        backend=backend,
        max_nodes=args.max_nodes,
        check_measure=args.check_measure,
        time_limit=args.time_limit,
    )
    v, rep = result.verdict, result.report
    if isinstance(v, Sat):
        print("sat")
        code = EXIT_SAT
    elif isinstance(v, Unsat):
        print("unsat")
        code = EXIT_UNSAT
    elif isinstance(v, ResourceLimit):
        what = "time limit" if v.reason == "time" else "node limit"
        print(f"unknown: {what} reached ({v.nodes} nodes)")
        code = EXIT_LIMIT
    else:
        assert isinstance(v, BackendUnsupported)
        print(f"unknown: backend cannot decide leaf {v.leaf}: {v.reason}")
        code = EXIT_BACKEND
    print(f"nodes: {len(result.tree)}  time: {rep.seconds:.3f}s")
    if args.check_measure:
        print(f"measure violations: {len(rep.measure_violations)}")
        for parent, child, rule in rep.measure_violations[:10]:
            print(f"  {rule} at node {parent} -> {child}")
    if rep.invariant_violations or rep.loop_violations:
        print(f"invariant violations: {len(rep.invariant_violations) + len(rep.loop_violations)}")
    if args.witness and isinstance(v, Sat):
        w = extract_witness(result, problem.signature)
        if w is not None:
            mine = params_of(problem.conjecture)
            w = {p: t for p, t in w.items() if p in mine}
        print("witness: " + (_fmt_assignment(w) if w else "none (cyclic or empty constraints)"))
    if args.dump_tree:
        Path(args.dump_tree).write_text(render_tree(result.tree, args.format), encoding="utf-8")
    return code


def _oracle(problem: Problem, depth: int):
    return oracle_check(problem.conjecture, problem.signature, problem.rules, depth, problem.deltas)


def cmd_oracle(args) -> int:
    problem = load(args.file)
    try:
        res = _oracle(problem, args.depth)
    except BudgetExceeded as e:
        print(f"unknown: {e}")
        return EXIT_LIMIT
    except OracleUnsupported as e:
        print(f"unknown: {e}")
        return EXIT_BACKEND
    print(res)
    if isinstance(res, SatAtDepth):
        print(f"depth: {res.depth}  groundings tried: {res.tried}")
        return EXIT_SAT
    print(f"groundings tried: {res.tried}")
    return EXIT_UNSAT


def cmd_diff(args) -> int:
    problem = load(args.file)
    result = prove(problem.conjecture, problem.signature, problem.rules, problem.deltas, max_nodes=args.max_nodes)
    if isinstance(result.verdict, ResourceLimit):
        print(f"unknown: node limit reached ({result.verdict.nodes} nodes)")
        return EXIT_LIMIT
    try:
        oracle_result = _oracle(problem, args.depth)
    except BudgetExceeded as e:
        print(f"unknown: {e}")
        return EXIT_LIMIT
    except OracleUnsupported as e:
        print(f"unknown: {e}")
        return EXIT_BACKEND
    report = differential_check(
        problem.conjecture, problem.signature, problem.rules, args.depth, result, problem.deltas, oracle_result
    )
    print(report)
    if report.counterexample:
        print("model: " + _fmt_assignment(report.counterexample))
    if report.witness:
        print("witness: " + _fmt_assignment(report.witness))
    return EXIT_SAT if report.consistent else EXIT_UNSAT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="schemata", description="Satisfiability of inductively defined formula schemata.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a problem file")
    v.add_argument("file")
    v.add_argument("--backend", default="builtin")
    v.set_defaults(run=cmd_validate)

    p = sub.add_parser("prove", help="run the tableau prover")
    p.add_argument("file")
    p.add_argument("--dump-tree", metavar="OUT")
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
    p.add_argument("--time-limit", type=float, metavar="SECONDS")
    p.add_argument("--check-measure", action="store_true")
    p.add_argument("--witness", action="store_true")
    p.add_argument("--backend", default="builtin", help="builtin or bridge:CMD")
    p.set_defaults(run=cmd_prove)

    o = sub.add_parser("oracle", help="search ground instances up to a depth")
    o.add_argument("file")
    o.add_argument("--depth", type=int, required=True)
    o.set_defaults(run=cmd_oracle)

    d = sub.add_parser("diff", help="compare prover and oracle")
    d.add_argument("file")
    d.add_argument("--depth", type=int, required=True)
    d.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
    d.set_defaults(run=cmd_diff)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0
    if getattr(args, "depth", 0) is not None and getattr(args, "depth", 0) < 0:
        print("error: --depth must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.run(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
