"""Bidirectional substructural typechecker.

Introduction forms are checked against a goal type; variables, applications,
type instantiations and ``fix`` synthesize.  Context splits follow the free
variables of the subterms: without weakening every ordered hypothesis must be
consumed by the unique premise whose subterm mentions it, so a split is
determined by filtering the context and then checking that the pieces
concatenate back in the order the rule demands.  The one real choice is where
to splice pattern variables when a match scrutinee uses no ordered
hypotheses; every position is tried.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import SubstructError
from .syntax import (
    App,
    Atom,
    Decl,
    Expr,
    Fix,
    Forall,
    Fuse,
    Inj,
    Lam,
    Lolli,
    MatchPair,
    MatchSum,
    MatchUnit,
    Mode,
    Over,
    Pair,
    Pos,
    Program,
    Signature,
    Sum,
    SymApp,
    TVar,
    Twist,
    TyInst,
    Type,
    UArrow,
    Under,
    Unit,
    UnitVal,
    Var,
    fresh_name,
    free_vars,
    pretty_expr,
    pretty_type,
    rename_free,
)
from .types import check_well_formed, head, subst_type, type_equal

TyVarCtx = frozenset
UCtx = Mapping[str, Type]
OCtx = tuple  # of (name, Type)

__all__ = ["Mode", "Diagnostic", "TypingVerdict", "check_expr", "check_program", "check_decl",
           "dependencies", "accepted_with_dependencies"]


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    pos: Optional[Pos]
    reason: str

    def __str__(self) -> str:
        where = f"{self.pos[0]}:{self.pos[1]}: " if self.pos else ""
        return f"{where}[{self.rule}] {self.reason}"


@dataclass
class TypingVerdict:
    accepted: bool
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.accepted

    @property
    def first_failure(self) -> Optional[Diagnostic]:
        return self.diagnostics[0] if self.diagnostics else None


class _Reject(Exception):
    def __init__(self, rule: str, e: Expr, reason: str):
        super().__init__(reason)
        self.diag = Diagnostic(rule, getattr(e, "pos", None), reason)


def _short(e: Expr, width: int = 40) -> str:
    text = pretty_expr(e)
    return text if len(text) <= width else text[: width - 3] + "..."


def _names(omega: OCtx) -> list[str]:
    return [n for n, _ in omega]


def _ctx(omega: OCtx) -> str:
    return "(" + ", ".join(n for n, _ in omega) + ")"


_ARROW_RULE = {Over: "->>", Under: "\\", Lolli: "-o", UArrow: "->"}


class _Checker:
    def __init__(self, sig: Signature, mode: Mode):
        self.sig = sig
        self.mode = mode
        self._fv: dict[int, tuple[Expr, frozenset]] = {}

    def fv(self, e: Expr) -> frozenset:
        hit = self._fv.get(id(e))
        if hit is not None and hit[0] is e:
            return hit[1]
        out = free_vars(e)
        self._fv[id(e)] = (e, out)
        return out

    def head(self, t: Type) -> Type:
        return head(t, self.sig, self.mode)

    def split(self, omega: OCtx, e: Expr, other: Optional[Expr] = None,
              rule: str = "split", whole: Optional[Expr] = None) -> tuple[OCtx, OCtx]:
        used = self.fv(e)
        if other is not None:
            twice = [n for n in _names(omega) if n in used and n in self.fv(other)]
            if twice:
                raise _Reject(rule, whole, f"ordered hypothesis {twice[0]} used twice (no contraction)")
        mine = tuple(h for h in omega if h[0] in used)
        rest = tuple(h for h in omega if h[0] not in used)
        return mine, rest

    def require_order(self, rule: str, e: Expr, omega: OCtx, *pieces: OCtx):
        if self.mode is Mode.ORDERED and omega != sum(pieces, ()):
            shown = " ".join(_ctx(p) for p in pieces)
            raise _Reject(rule, e, f"context {_ctx(omega)} cannot be split as {shown} (no exchange)")

    def freshen(self, binder: str, body: Expr, gamma: UCtx, omega: OCtx, extra=()) -> tuple[str, Expr]:
        taken = set(gamma) | set(_names(omega)) | set(extra)
        if binder not in taken:
            return binder, body
        new = fresh_name(binder, taken | self.fv(body))
        return new, rename_free(body, binder, new)

    def bind(self, gamma: UCtx, omega: OCtx, hyps: list[tuple[str, Type]], left: OCtx, right: OCtx):
        """Splice pattern hypotheses between `left` and `right`."""
        if self.mode is Mode.UNRESTRICTED:
            g = dict(gamma)
            g.update(hyps)
            return g, left + right
        return gamma, left + tuple(hyps) + right

    # checking ---------------------------------------------------------------
    def check(self, delta, gamma: UCtx, omega: OCtx, e: Expr, goal: Type) -> None:
        g = self.head(goal)
        if isinstance(g, Forall) and not isinstance(e, Fix):
            a = g.var
            body = g.body
            if a in delta:
                a2 = fresh_name(a, set(delta))
                body = subst_type({a: TVar(a2)}, body)
                a = a2
            return self.check(delta | {a}, gamma, omega, e, body)
        match e:
            case Lam(x, body):
                return self.check_lam(delta, gamma, omega, e, g)
            case Pair(a, b):
                return self.check_pair(delta, gamma, omega, e, g)
            case UnitVal():
                if not isinstance(g, Unit):
                    raise _Reject("1I", e, f"() cannot have type {pretty_type(goal)}")
                if omega:
                    raise _Reject("1I", e, f"() leaves hypotheses {_ctx(omega)} unused (no weakening)")
                return None
            case Inj(label, payload):
                if not isinstance(g, Sum):
                    raise _Reject("+I", e, f"injection {label}(...) cannot have type {pretty_type(goal)}")
                branches = g.branches
                if label not in branches:
                    raise _Reject("+I", e, f"label {label} not in {pretty_type(g)}")
                return self.check(delta, gamma, omega, payload, branches[label])
            case MatchPair() | MatchUnit() | MatchSum():
                return self.check_match(delta, gamma, omega, e, goal)
        found = self.synth(delta, gamma, omega, e)
        if not type_equal(found, goal, self.sig, self.mode):
            raise _Reject("conv", e, f"{_short(e)} has type {pretty_type(found)}, expected {pretty_type(goal)}")
        return None

    def check_lam(self, delta, gamma, omega, e: Lam, g: Type):
        x, body = self.freshen(e.binder, e.body, gamma, omega)
        rule = _ARROW_RULE.get(type(g), "lam") + "I"
        match g:
            case Over(a, b):
                return self.check(delta, gamma, omega + ((x, a),), body, b)
            case Under(a, b):
                return self.check(delta, gamma, ((x, a),) + omega, body, b)
            case Lolli(a, b):
                if self.mode is Mode.ORDERED:
                    raise _Reject(rule, e, "the linear arrow -o is not available in ordered mode")
                return self.check(delta, gamma, omega + ((x, a),), body, b)
            case UArrow(a, b):
                return self.check(delta, {**gamma, x: a}, omega, body, b)
        raise _Reject("lamI", e, f"lambda cannot have non-function type {pretty_type(g)}")

    def check_pair(self, delta, gamma, omega, e: Pair, g: Type):
        if not isinstance(g, (Fuse, Twist)):
            raise _Reject("*I", e, f"pair cannot have type {pretty_type(g)}")
        rule = "*I" if isinstance(g, Fuse) else "%I"
        o1, o2 = self.split(omega, e.fst, e.snd, rule, e)
        if isinstance(g, Fuse):
            self.require_order(rule, e, omega, o1, o2)
        else:
            self.require_order(rule, e, omega, o2, o1)
        self.check(delta, gamma, o1, e.fst, g.left)
        self.check(delta, gamma, o2, e.snd, g.right)

    def check_match(self, delta, gamma, omega, e: Expr, goal: Type):
        rule = {MatchPair: "*E", MatchUnit: "1E", MatchSum: "+E"}[type(e)]
        o_s, rest = self.split(omega, e.scrutinee)
        if self.mode is Mode.ORDERED:
            if o_s:
                names = _names(omega)
                start = names.index(o_s[0][0])
                if omega[start:start + len(o_s)] != o_s:
                    raise _Reject(rule, e, f"scrutinee uses {_ctx(o_s)}, which is not contiguous in "
                                           f"{_ctx(omega)}")
                placements = [(omega[:start], omega[start + len(o_s):])]
            else:
                placements = [(omega[:i], omega[i:]) for i in range(len(omega) + 1)]
        else:
            placements = [(rest, ())]
        scrut_ty = self.synth(delta, gamma, o_s, e.scrutinee)
        h = self.head(scrut_ty)
        first: Optional[_Reject] = None
        for left, right in placements:
            try:
                return self.match_body(delta, gamma, e, h, scrut_ty, left, right, goal)
            except _Reject as r:
                first = first or r
        raise first

    def match_body(self, delta, gamma, e, h: Type, scrut_ty: Type, left: OCtx, right: OCtx, goal: Type):
        both = left + right
        match e:
            case MatchPair(_, x, y, body):
                if not isinstance(h, (Fuse, Twist)):
                    raise _Reject("*E", e, f"pair pattern on scrutinee of type {pretty_type(scrut_ty)}")
                x, body = self.freshen(x, body, gamma, both, extra=(y,))
                y, body = self.freshen(y, body, gamma, both, extra=(x,))
                if isinstance(h, Fuse):
                    hyps = [(x, h.left), (y, h.right)]
                else:
                    hyps = [(y, h.right), (x, h.left)]
                g2, o2 = self.bind(gamma, both, hyps, left, right)
                return self.check(delta, g2, o2, body, goal)
            case MatchUnit(_, body):
                if not isinstance(h, Unit):
                    raise _Reject("1E", e, f"unit pattern on scrutinee of type {pretty_type(scrut_ty)}")
                return self.check(delta, gamma, both, body, goal)
            case MatchSum(_, branches):
                if not isinstance(h, Sum):
                    raise _Reject("+E", e, f"case analysis on scrutinee of type {pretty_type(scrut_ty)}")
                alts = h.branches
                labels = [b[0] for b in branches]
                if set(labels) != set(alts):
                    raise _Reject("+E", e, f"branches {sorted(labels)} do not match labels {sorted(alts)}")
                for label, x, body in branches:
                    x, body = self.freshen(x, body, gamma, both)
                    g2, o2 = self.bind(gamma, both, [(x, alts[label])], left, right)
                    self.check(delta, g2, o2, body, goal)
                return None
        raise AssertionError(e)

    # synthesis --------------------------------------------------------------
    def synth(self, delta, gamma: UCtx, omega: OCtx, e: Expr) -> Type:
        match e:
            case Var(x):
                names = _names(omega)
                if x in names:
                    if len(omega) != 1:
                        raise _Reject("hyp", e, f"variable {x} used with extra hypotheses "
                                                f"{_ctx(tuple(h for h in omega if h[0] != x))} (no weakening)")
                    return omega[0][1]
                if x in gamma:
                    if omega:
                        raise _Reject("hyp", e, f"hypotheses {_ctx(omega)} left unused at {x} (no weakening)")
                    return gamma[x]
                raise _Reject("hyp", e, f"unbound variable {x}")
            case App(f, a):
                o_f, o_a = self.split(omega, f, a, "app", e)
                ft = self.synth(delta, gamma, o_f, f)
                h = self.head(ft)
                match h:
                    case Over(arg, res):
                        self.require_order("->>E", e, omega, o_f, o_a)
                    case Under(arg, res):
                        self.require_order("\\E", e, omega, o_a, o_f)
                    case Lolli(arg, res):
                        if self.mode is Mode.ORDERED:
                            raise _Reject("-oE", e, "the linear arrow -o is not available in ordered mode")
                    case UArrow(arg, res):
                        if o_a:
                            raise _Reject("->E", e, f"argument of unrestricted function uses ordered "
                                                    f"hypotheses {_ctx(o_a)}")
                    case Forall():
                        raise _Reject("allE", e, f"{_short(f)} is polymorphic; instantiate it with [A]")
                    case _:
                        raise _Reject("app", e, f"{_short(f)} of type {pretty_type(ft)} is not a function")
                self.check(delta, gamma, o_a, a, arg)
                return res
            case TyInst(s, ty):
                try:
                    check_well_formed(ty, self.sig, frozenset(delta))
                except SubstructError as exc:
                    raise _Reject("allE", e, str(exc)) from None
                st = self.synth(delta, gamma, omega, s)
                h = self.head(st)
                if not isinstance(h, Forall):
                    raise _Reject("allE", e, f"{_short(s)} of type {pretty_type(st)} is not polymorphic")
                return subst_type({h.var: ty}, h.body)
            case Fix(f, ty, body):
                if omega:
                    raise _Reject("fix", e, f"recursive definition cannot capture ordered hypotheses "
                                            f"{_ctx(omega)}")
                f2, body = self.freshen(f, body, gamma, omega)
                # annotations inside the body refer to the quantifiers of ty itself
                inner = set(delta)
                t = ty
                while isinstance(t, Forall):
                    inner.discard(t.var)
                    t = t.body
                self.check(frozenset(inner), {**gamma, f2: ty}, (), body, ty)
                return ty
            case Atom() | SymApp():
                raise _Reject("hyp", e, f"symbolic value {_short(e)} has no type")
        raise _Reject("synth", e, f"cannot synthesize a type for {_short(e)}; it must be checked "
                                  f"against a known type")


def check_expr(delta, gamma: UCtx, omega: OCtx, e: Expr, ty: Type, mode: Mode,
               sig: Signature) -> TypingVerdict:
    """Decide ``delta | gamma ; omega |- e : ty`` in the given discipline."""
    gamma = dict(gamma)
    omega = tuple(omega)
    if mode is Mode.UNRESTRICTED:
        gamma.update(omega)
        omega = ()
    checker = _Checker(sig, mode)
    try:
        checker.check(frozenset(delta), gamma, omega, e, ty)
    except _Reject as r:
        return TypingVerdict(False, [r.diag])
    except RecursionError:
        return TypingVerdict(False, [Diagnostic("internal", getattr(e, "pos", None),
                                                "expression nesting too deep")])
    return TypingVerdict(True)


def check_decl(program: Program, decl: Decl, mode: Mode) -> TypingVerdict:
    """Check `decl` in `mode`; callers decide whether a pragma takes precedence."""
    gamma: dict[str, Type] = {}
    for d in program.decls:
        if d.name == decl.name:
            break
        gamma[d.name] = d.type
    if decl.recursive:
        gamma[decl.name] = decl.type
    return check_expr(frozenset(), gamma, (), decl.body, decl.type, mode, program.signature)


def check_program(program: Program, mode: Mode = Mode.ORDERED) -> list[tuple[str, TypingVerdict]]:
    """Check each declaration against its declared type.

    Earlier declarations are available unrestrictedly at their declared
    types; a ``rec def`` also sees itself.  A ``@mode`` pragma overrides
    `mode` for its declaration.
    """
    return [(d.name, check_decl(program, d, d.mode or mode)) for d in program.decls]


def dependencies(program: Program, name: str) -> list[str]:
    """Declarations `name` refers to, transitively, including itself."""
    names = set(program.names())
    out: list[str] = []
    todo = [name]
    while todo:
        n = todo.pop()
        if n in out:
            continue
        out.append(n)
        todo.extend(sorted((free_vars(program.decl(n).body) & names) - set(out)))
    return out


def accepted_with_dependencies(program: Program, name: str, mode: Mode,
                               override: bool = False) -> TypingVerdict:
    """Check `name` and everything it uses; the first rejection wins.

    With `override`, `name` itself is checked in `mode` even if it carries a
    ``@mode`` pragma.
    """
    for n in dependencies(program, name):
        d = program.decl(n)
        v = check_decl(program, d, mode if override and n == name else d.mode or mode)
        if not v.accepted:
            if n != name:
                v = TypingVerdict(False, [Diagnostic("dependency", d.pos, f"uses {n}, which is rejected: "
                                                     f"{v.first_failure}")] + v.diagnostics)
            return v
    return TypingVerdict(True)
