"""Command-line driver.

Exit codes: 0 success, 1 a verdict failed (rejection, failed predicate or
theorem, evaluation error), 2 usage or input error, 3 internal error.
With ``--format json`` every result is one JSON object per line; each
object has a ``kind`` field naming the subcommand that produced it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .check import check_program
from .errors import EvalError, ParseError, SubstructError, TemplateMismatch, UnsupportedType
from .evaluate import DEFAULT_FUEL, erase, link, run_decl
from .inhabitants import SearchBudget, enumerate_inhabitants
from .semantics import ALGEBRAS, fundamental_smoke
from .syntax import Mode, Program, parse_expr, parse_program, parse_type, pretty_expr, pretty_type, value_to_expr
from .theorems import TheoremKind, TheoremSpec, run_theorem

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Output:
    def __init__(self, fmt: str):
        self.json = fmt == "json"

    def record(self, rec: dict, human: str) -> None:
        print(json.dumps(rec, sort_keys=True) if self.json else human)


def _load(path: str) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_program(text)


def _decl(program: Program, name: str):
    try:
        return program.decl(name)
    except KeyError:
        raise _UsageError(f"no declaration named {name}; have {', '.join(program.names())}") from None


def cmd_check(args, out: _Output) -> int:
    program = _load(args.file)
    ok = True
    for d, (name, verdict) in zip(program.decls, check_program(program, args.mode)):
        mode = d.mode or args.mode
        first = verdict.first_failure
        ok = ok and verdict.accepted
        out.record(
            {"kind": "check", "decl": name, "mode": mode.value, "accepted": verdict.accepted,
             "rule": first.rule if first else None, "reason": str(first) if first else None},
            f"{name}: {'accepted' if verdict.accepted else 'REJECTED'} ({mode.value})"
            + ("" if verdict.accepted else f"\n  {first}"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_run(args, out: _Output) -> int:
    program = _load(args.file)
    _decl(program, args.decl)
    names = frozenset(program.names())
    apply = [parse_expr(text, names) for text in args.apply]
    try:
        value = run_decl(program, args.decl, apply, args.fuel, args.head)
    except EvalError as exc:
        out.record({"kind": "run", "decl": args.decl, "value": None, "error": str(exc)},
                   f"{args.decl}: evaluation failed: {exc}")
        return EXIT_FAIL
    shown = pretty_expr(value_to_expr(value))
    out.record({"kind": "run", "decl": args.decl, "value": shown, "error": None}, shown)
    return EXIT_OK


def cmd_predicate(args, out: _Output) -> int:
    program = _load(args.file)
    d = _decl(program, args.decl)
    mode = d.mode or args.mode
    result = fundamental_smoke(link(program, args.decl), d.type, mode, program.signature,
                               algebra=ALGEBRAS[args.algebra], generators=args.generators,
                               max_len=args.max_len, fuel=args.fuel)
    human = f"{args.decl}: {result.verdict} ({args.algebra} algebra, {result.probes} probes)"
    if result.trace:
        human += "\n" + "\n".join("  " + line for line in result.trace)
    out.record({"kind": "predicate", "decl": args.decl, "mode": mode.value, "algebra": args.algebra,
                "verdict": result.verdict, "probes": result.probes, "trace": result.trace}, human)
    return EXIT_OK if result else EXIT_FAIL


def cmd_count(args, out: _Output) -> int:
    ty = parse_type(args.type)
    budget = SearchBudget(args.depth, args.size)
    terms, truncated = enumerate_inhabitants(ty, args.mode, budget)
    lines = [str(len(terms))]
    if truncated:
        lines.append("truncated: the search budget ran out, so this is a lower bound")
    if args.list:
        lines += [pretty_expr(e) for e in terms]
    out.record({"kind": "count", "type": pretty_type(ty), "mode": args.mode.value, "count": len(terms),
                "truncated": truncated, "terms": [pretty_expr(e) for e in terms] if args.list else None},
               "\n".join(lines))
    return EXIT_OK


def cmd_theorems(args, out: _Output) -> int:
    program = _load(args.file)
    _decl(program, args.decl)
    spec = TheoremSpec(args.spec, args.mode)
    report = run_theorem(spec, program, args.decl, args.trials, args.max_len, seed=args.seed,
                         fuel=args.fuel, program_name=args.file)
    if not report.typechecked:
        status = "REJECTED at the template type"
    elif report.clean:
        status = f"holds on {report.trials} trials"
    else:
        status = f"FAILED on {len(report.failures)} of {report.trials} trials"
    lines = [f"{args.decl}: {spec.kind.value} ({spec.mode.value}) {status}"]
    lines += ["  " + note for note in report.notes]
    for f in report.failures[:5]:
        lines.append(f"  input {f.input}: got {f.actual}, expected {f.expected}")
    out.record(report.as_record(), "\n".join(lines))
    return EXIT_OK if report.clean else EXIT_FAIL


def _mode(text: str) -> Mode:
    try:
        return Mode.parse(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _kind(text: str) -> TheoremKind:
    try:
        return TheoremKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["human", "json"], default="human")
    common.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="evaluation steps before giving up")

    p = argparse.ArgumentParser(prog="substruct", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="typecheck every declaration")
    c.add_argument("file")
    c.add_argument("--mode", type=_mode, default=Mode.ORDERED)
    c.set_defaults(run=cmd_check)

    r = sub.add_parser("run", parents=[common], help="evaluate a declaration")
    r.add_argument("file")
    r.add_argument("decl")
    r.add_argument("--apply", action="append", default=[], metavar="EXPR",
                   help="argument expression; repeat for several")
    r.add_argument("--head", action="append", default=[], metavar="ATOM",
                   help="atom that may be applied, producing a symbolic application")
    r.set_defaults(run=cmd_run)

    pr = sub.add_parser("predicate", parents=[common], help="test a declaration against the logical predicate")
    pr.add_argument("file")
    pr.add_argument("decl")
    pr.add_argument("--mode", type=_mode, default=Mode.ORDERED)
    pr.add_argument("--algebra", choices=sorted(ALGEBRAS), default="free")
    pr.add_argument("--generators", type=int, default=2, help="generators per type variable")
    pr.add_argument("--max-len", type=int, default=3, help="size bound on generated arguments")
    pr.set_defaults(run=cmd_predicate)

    n = sub.add_parser("count", parents=[common], help="count normal inhabitants of a type")
    n.add_argument("--type", required=True)
    n.add_argument("--mode", type=_mode, default=Mode.ORDERED)
    n.add_argument("--list", action="store_true", help="also print the terms")
    n.add_argument("--depth", type=int, default=SearchBudget.max_depth)
    n.add_argument("--size", type=int, default=SearchBudget.max_size)
    n.set_defaults(run=cmd_count)

    t = sub.add_parser("theorems", parents=[common], help="check a free theorem on a declaration")
    t.add_argument("file")
    t.add_argument("--spec", type=_kind, required=True, help=", ".join(k.value for k in TheoremKind))
    t.add_argument("--decl", required=True)
    t.add_argument("--mode", type=_mode, default=None, help="defaults to the theorem's own discipline")
    t.add_argument("--max-len", type=int, default=6)
    t.add_argument("--trials", type=int, default=20)
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(run=cmd_theorems)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    out = _Output(args.format)
    try:
        return args.run(args, out)
    except (_UsageError, ParseError, TemplateMismatch, UnsupportedType) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SubstructError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except Exception as exc:  # pragma: no cover - reported, not expected
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
