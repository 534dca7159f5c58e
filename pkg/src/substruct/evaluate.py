"""Call-by-value big-step evaluation by substitution.

Functions evaluate before their arguments and pairs left to right.  Every
application and every match costs one unit of fuel; running out raises
`OutOfFuel`, which is how possible divergence of recursive programs is
reported.  Atoms whose names are registered as symbolic heads may be applied:
the result is an uninterpreted `SymApp` accumulating the arguments.
"""

from __future__ import annotations

import sys
from typing import Collection, Mapping

from .errors import EvalError, OutOfFuel, Stuck
from .syntax import (
    App,
    Atom,
    Closure,
    Expr,
    Fix,
    Inj,
    Lam,
    MatchPair,
    MatchSum,
    MatchUnit,
    Pair,
    Program,
    SymApp,
    TyInst,
    UnitVal,
    Value,
    Var,
    VInj,
    VPair,
    VUnit,
    free_vars,
    pretty_expr,
    value_to_expr,
)

DEFAULT_FUEL = 10**6


def erase(e: Expr) -> Expr:
    """Drop type instantiations."""
    match e:
        case TyInst(s, _):
            return erase(s)
        case Lam(x, b):
            return Lam(x, erase(b), pos=e.pos)
        case App(f, a):
            return App(erase(f), erase(a), pos=e.pos)
        case Pair(a, b):
            return Pair(erase(a), erase(b), pos=e.pos)
        case MatchPair(s, x, y, b):
            return MatchPair(erase(s), x, y, erase(b), pos=e.pos)
        case MatchUnit(s, b):
            return MatchUnit(erase(s), erase(b), pos=e.pos)
        case Inj(label, p):
            return Inj(label, erase(p), pos=e.pos)
        case MatchSum(s, branches):
            return MatchSum(erase(s), tuple((l, x, erase(b)) for l, x, b in branches), pos=e.pos)
        case Fix(f, ty, b):
            return Fix(f, ty, erase(b), pos=e.pos)
    return e


def subst_closed(sub: Mapping[str, Expr], e: Expr) -> Expr:
    """Substitute closed expressions for variables.

    Closed replacements cannot be captured, so only shadowing needs care.
    """
    if not sub:
        return e
    match e:
        case Var(x):
            return sub.get(x, e)
        case Lam(x, b):
            return Lam(x, subst_closed(_drop(sub, x), b), pos=e.pos)
        case App(f, a):
            return App(subst_closed(sub, f), subst_closed(sub, a), pos=e.pos)
        case Pair(a, b):
            return Pair(subst_closed(sub, a), subst_closed(sub, b), pos=e.pos)
        case MatchPair(s, x, y, b):
            return MatchPair(subst_closed(sub, s), x, y, subst_closed(_drop(sub, x, y), b), pos=e.pos)
        case MatchUnit(s, b):
            return MatchUnit(subst_closed(sub, s), subst_closed(sub, b), pos=e.pos)
        case Inj(label, p):
            return Inj(label, subst_closed(sub, p), pos=e.pos)
        case MatchSum(s, branches):
            return MatchSum(subst_closed(sub, s),
                            tuple((l, x, subst_closed(_drop(sub, x), b)) for l, x, b in branches), pos=e.pos)
        case TyInst(s, ty):
            return TyInst(subst_closed(sub, s), ty, pos=e.pos)
        case Fix(f, ty, b):
            return Fix(f, ty, subst_closed(_drop(sub, f), b), pos=e.pos)
    return e


def _drop(sub: Mapping[str, Expr], *names: str) -> Mapping[str, Expr]:
    if not any(n in sub for n in names):
        return sub
    return {k: v for k, v in sub.items() if k not in names}


def subst(v: Value, x: str, e: Expr) -> Expr:
    """``[v/x]e`` for a closed value `v`."""
    return subst_closed({x: value_to_expr(v)}, e)


def link(program: Program, name: str) -> Expr:
    """Closed expression for declaration `name`.

    Earlier declarations are substituted in; recursive declarations become
    `Fix` nodes.  Type instantiations are kept so the result can still be
    typechecked; `erase` it before evaluating.
    """
    closed: dict[str, Expr] = {}
    for d in program.decls:
        used = free_vars(d.body)
        body = subst_closed({n: closed[n] for n in used if n in closed}, d.body)
        if d.recursive:
            body = Fix(d.name, d.type, body, pos=d.pos)
        closed[d.name] = body
        if d.name == name:
            return body
    raise KeyError(name)


class _Machine:
    def __init__(self, fuel: int, heads: frozenset[str]):
        self.fuel = fuel
        self.heads = heads

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise OutOfFuel("evaluation ran out of fuel")

    def run(self, e: Expr) -> Value:
        while True:
            match e:
                case Lam(x, b):
                    return Closure(x, b)
                case App(f, a):
                    fv = self.run(f)
                    av = self.run(a)
                    self.tick()
                    match fv:
                        case Closure(x, b):
                            e = subst(av, x, b)
                            continue
                        case Atom(name) if name in self.heads:
                            return SymApp(name, (av,))
                        case SymApp(name, args) if name in self.heads:
                            return SymApp(name, args + (av,))
                    raise Stuck(f"cannot apply non-function {pretty_expr(value_to_expr(fv))}")
                case Pair(a, b):
                    first = self.run(a)
                    return VPair(first, self.run(b))
                case UnitVal():
                    return VUnit()
                case Inj(label, p):
                    return VInj(label, self.run(p))
                case MatchPair(s, x, y, b):
                    sv = self.run(s)
                    self.tick()
                    if not isinstance(sv, VPair):
                        raise Stuck(f"pair pattern on {pretty_expr(value_to_expr(sv))}")
                    e = subst_closed(_pair_sub(x, y, sv), b)
                    continue
                case MatchUnit(s, b):
                    sv = self.run(s)
                    self.tick()
                    if not isinstance(sv, VUnit):
                        raise Stuck(f"unit pattern on {pretty_expr(value_to_expr(sv))}")
                    e = b
                    continue
                case MatchSum(s, branches):
                    sv = self.run(s)
                    self.tick()
                    if not isinstance(sv, VInj):
                        raise Stuck(f"case analysis on {pretty_expr(value_to_expr(sv))}")
                    for label, x, b in branches:
                        if label == sv.label:
                            e = subst(sv.value, x, b)
                            break
                    else:
                        raise Stuck(f"no branch for label {sv.label}")
                    continue
                case Fix(f, _, b):
                    self.tick()
                    e = subst_closed({f: e}, b)
                    continue
                case Atom() | SymApp():
                    return e
                case Var(x):
                    raise Stuck(f"free variable {x}")
                case TyInst():
                    raise Stuck("type instantiation reached the evaluator; erase it first")
            raise Stuck(f"not an expression: {e!r}")


def _pair_sub(x: str, y: str, v: VPair) -> dict[str, Expr]:
    return {y: value_to_expr(v.snd), x: value_to_expr(v.fst)}


def evaluate(e: Expr, fuel: int = DEFAULT_FUEL, heads: Collection[str] = ()) -> Value:
    """Evaluate a closed, erased expression to a value."""
    machine = _Machine(fuel, frozenset(heads))
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 50_000))
    try:
        return machine.run(e)
    except RecursionError:
        raise EvalError("evaluation nested too deeply") from None
    finally:
        sys.setrecursionlimit(limit)


def run_decl(program: Program, name: str, args=(), fuel: int = DEFAULT_FUEL,
             heads: Collection[str] = ()) -> Value:
    """Evaluate declaration `name` applied to argument values."""
    e = erase(link(program, name))
    for a in args:
        e = App(e, a if isinstance(a, Expr) else value_to_expr(a))
    return evaluate(e, fuel, heads)
