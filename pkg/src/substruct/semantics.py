"""Resource algebras and the algebra-indexed logical predicate.

``m ||- v in [A]`` is decided by structural recursion for positive types
(unit, fuse, twist, sums, definitions, variables) by searching the ways `m`
splits in the algebra.  Membership at function types quantifies over all
arguments and is only approximated, by applying the function to a finite set
of probe arguments already known to be in the argument predicate.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Optional, Sequence, Union

from .check import check_expr
from .errors import CoverageMismatch, EvalError, ProbeFailure, UnsupportedType
from .evaluate import DEFAULT_FUEL, erase, evaluate
from .syntax import (
    App,
    Atom,
    Expr,
    Forall,
    Fuse,
    Lolli,
    Mode,
    Named,
    Over,
    Signature,
    Sum,
    SymApp,
    TVar,
    Twist,
    Type,
    UArrow,
    Under,
    Unit,
    Value,
    VInj,
    VPair,
    VUnit,
    pretty_expr,
    pretty_type,
    value_to_expr,
)
from .types import unfold, whnf

Element = Hashable
Relation = frozenset  # of (Element, Value)
Interpretation = Mapping[str, Relation]


# ---------------------------------------------------------------------------
# Algebras


class ResourceAlgebra:
    name = "abstract"
    commutative = False
    unit: Element = ()

    def op(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def eq(self, a: Element, b: Element) -> bool:
        return a == b

    def splits(self, m: Element) -> Iterator[tuple[Element, Element]]:
        """Every (m1, m2) with m1 . m2 = m, each exactly once."""
        raise NotImplementedError

    def generator(self, name: str) -> Element:
        raise NotImplementedError

    def compose(self, elems: Iterable[Element]) -> Element:
        out = self.unit
        for e in elems:
            out = self.op(out, e)
        return out

    def size(self, m: Element) -> int:
        return len(m)

    def show(self, m: Element) -> str:
        return "ε" if self.eq(m, self.unit) else "·".join(m)

    def __repr__(self) -> str:
        return f"<{self.name} algebra>"


class FreeMonoid(ResourceAlgebra):
    """Words over generators; splitting a word of length n gives its n+1 cuts."""

    name = "free"

    def op(self, a, b):
        return tuple(a) + tuple(b)

    def splits(self, m):
        for i in range(len(m) + 1):
            yield m[:i], m[i:]

    def generator(self, name):
        return (name,)


class FreeCommMonoid(ResourceAlgebra):
    """Finite multisets of generators, kept as sorted tuples."""

    name = "comm"
    commutative = True

    def op(self, a, b):
        return tuple(sorted(tuple(a) + tuple(b)))

    def splits(self, m):
        counts = sorted(Counter(m).items())
        ranges = [range(c + 1) for _, c in counts]
        for picks in itertools.product(*ranges):
            left = tuple(g for (g, _), k in zip(counts, picks) for _ in range(k))
            right = tuple(g for (g, c), k in zip(counts, picks) for _ in range(c - k))
            yield left, right

    def generator(self, name):
        return (name,)

    def show(self, m):
        return "ε" if not m else "+".join(m)


class TrivialMonoid(ResourceAlgebra):
    """One element; every resource is the unit."""

    name = "trivial"
    commutative = True

    def op(self, a, b):
        return ()

    def splits(self, m):
        yield (), ()

    def generator(self, name):
        return ()

    def size(self, m):
        return 0


ALGEBRAS: dict[str, ResourceAlgebra] = {
    "free": FreeMonoid(),
    "comm": FreeCommMonoid(),
    "trivial": TrivialMonoid(),
}


def algebra_for_mode(mode: Mode) -> ResourceAlgebra:
    return {Mode.ORDERED: ALGEBRAS["free"], Mode.LINEAR: ALGEBRAS["comm"],
            Mode.UNRESTRICTED: ALGEBRAS["trivial"]}[mode]


# ---------------------------------------------------------------------------
# Predicate on values


def _is_arrow(t: Type) -> bool:
    return isinstance(t, (Over, Under, Lolli, UArrow))


class _Predicate:
    def __init__(self, S: Interpretation, sig: Signature, alg: ResourceAlgebra):
        self.S = S
        self.sig = sig
        self.alg = alg
        self.memo: dict = {}

    def holds(self, m, v, t: Type) -> bool:
        key = (m, v, t)
        if key in self.memo:
            return self.memo[key]
        out = self._holds(m, v, t)
        self.memo[key] = out
        return out

    def _holds(self, m, v, t: Type) -> bool:
        alg = self.alg
        match t:
            case Unit():
                return alg.eq(m, alg.unit) and isinstance(v, VUnit)
            case TVar(a):
                if a not in self.S:
                    raise UnsupportedType(f"type variable {a} has no interpretation")
                return (m, v) in self.S[a]
            case Fuse(left, right):
                if not isinstance(v, VPair):
                    return False
                return any(self.holds(m1, v.fst, left) and self.holds(m2, v.snd, right)
                           for m1, m2 in alg.splits(m))
            case Twist(left, right):
                if not isinstance(v, VPair):
                    return False
                # m = m2 . m1 with m1 for the first component
                return any(self.holds(m1, v.fst, left) and self.holds(m2, v.snd, right)
                           for m2, m1 in alg.splits(m))
            case Sum(alts):
                if not isinstance(v, VInj):
                    return False
                branches = dict(alts)
                return v.label in branches and self.holds(m, v.value, branches[v.label])
            case Named():
                return self.holds(m, v, whnf(t, self.sig))
        raise UnsupportedType(f"membership at {pretty_type(t)} is not decidable; probe it instead")

    def explain(self, m, v, t: Type) -> list[str]:
        """Human-readable account of why membership fails at the top level."""
        alg = self.alg
        show = f"{alg.show(m)} ||- {pretty_expr(value_to_expr(v))} in [{pretty_type(t)}]"
        if self.holds(m, v, t):
            return [f"holds: {show}"]
        lines = [f"fails: {show}"]
        t = whnf(t, self.sig)
        if isinstance(t, (Fuse, Twist)) and isinstance(v, VPair):
            for p, q in alg.splits(m):
                m1, m2 = (p, q) if isinstance(t, Fuse) else (q, p)
                ok1 = self.holds(m1, v.fst, t.left)
                ok2 = self.holds(m2, v.snd, t.right)
                lines.append(f"  split {alg.show(m1)} | {alg.show(m2)}: first {'ok' if ok1 else 'fails'}, "
                             f"second {'ok' if ok2 else 'fails'}")
        elif isinstance(t, Sum) and isinstance(v, VInj) and v.label in t.branches:
            lines += ["  " + s for s in self.explain(m, v.value, t.branches[v.label])]
        return lines


def predicate_value(m, v: Value, A: Type, S: Interpretation, sig: Signature, alg: ResourceAlgebra) -> bool:
    """Decide ``m ||- v in [A]`` for a positive type `A`."""
    return _Predicate(S, sig, alg).holds(m, v, A)


def explain_value(m, v: Value, A: Type, S: Interpretation, sig: Signature, alg: ResourceAlgebra) -> list[str]:
    return _Predicate(S, sig, alg).explain(m, v, A)


def make_relation_from_type(A: Type, universe: Iterable[tuple[Element, Value]], S: Interpretation,
                            sig: Signature, alg: ResourceAlgebra) -> Relation:
    """``{(k, w) | k ||- w in [A]}`` restricted to a finite universe of candidates."""
    pred = _Predicate(S, sig, alg)
    return frozenset((k, w) for k, w in universe if pred.holds(k, w, A))


# ---------------------------------------------------------------------------
# Functions, by probing

Probes = Union[Sequence[tuple[Element, Value]], Callable[[Type], Sequence[tuple[Element, Value]]]]


@dataclass
class ProbeTrace:
    lines: list[str] = field(default_factory=list)


def probe_function(m, f: Value, A: Type, S: Interpretation, sig: Signature, alg: ResourceAlgebra,
                   probes: Probes, *, heads=(), fuel: int = DEFAULT_FUEL,
                   trace: Optional[list[str]] = None) -> bool:
    """Check ``m ||- f in [A]`` for an arrow type on finitely many arguments.

    For each probe ``(k, w)`` the application ``f w`` is evaluated and its
    result checked at the result type with resource ``m.k`` (over, linear),
    ``k.m`` (under), or ``m`` when the arrow is unrestricted, in which case
    only probes carrying the unit element are used.  Result types that are
    again arrows are probed recursively.
    """
    pred = _Predicate(S, sig, alg)
    return _probe(pred, m, f, A, probes, frozenset(heads), fuel, trace, [])


def _probes_for(probes: Probes, t: Type):
    return probes(t) if callable(probes) else probes


def _probe(pred: _Predicate, m, f, A: Type, probes, heads, fuel, trace, applied) -> bool:
    alg = pred.alg
    t = whnf(A, pred.sig)
    if isinstance(t, Forall):
        raise UnsupportedType("quantifiers below an arrow are not supported")
    if not _is_arrow(t):
        ok = pred.holds(m, f, t)
        if not ok and trace is not None and not trace:
            args = " ".join(pretty_expr(value_to_expr(w)) for w in applied)
            trace.append(f"applied to {args or '(no arguments)'}:")
            trace.extend("  " + line for line in pred.explain(m, f, t))
        return ok
    for k, w in _probes_for(probes, t.arg):
        if isinstance(t, UArrow):
            if not alg.eq(k, alg.unit):
                continue
            m2 = m
        elif isinstance(t, Under):
            m2 = alg.op(k, m)
        else:
            m2 = alg.op(m, k)
        try:
            r = evaluate(App(value_to_expr(f), value_to_expr(w)), fuel, heads)
        except EvalError as exc:
            raise ProbeFailure(f"applying {pretty_expr(value_to_expr(f))[:60]} failed: {exc}") from exc
        if not _probe(pred, m2, r, t.result, probes, heads, fuel, trace, applied + [w]):
            return False
    return True


# ---------------------------------------------------------------------------
# Closing environments


@dataclass(frozen=True)
class ClosingEnv:
    """Values for the unrestricted (resource ε) and ordered context parts."""

    unrestricted: Mapping[str, Value] = field(default_factory=dict)
    ordered: tuple[tuple[str, Element, Value], ...] = ()

    def total(self, alg: ResourceAlgebra):
        return alg.compose(elem for _, elem, _ in self.ordered)

    def substitution(self) -> dict[str, Expr]:
        out = {x: value_to_expr(v) for x, v in self.unrestricted.items()}
        out.update({x: value_to_expr(v) for x, _, v in self.ordered})
        return out


def predicate_env(env: ClosingEnv, gamma: Mapping[str, Type], omega: Sequence[tuple[str, Type]],
                  S: Interpretation, sig: Signature, alg: ResourceAlgebra, m=None) -> bool:
    """``eps ||- theta in [gamma]`` and ``m ||- eta in [omega]``.

    Ordered bindings carry their own resources, which compose left to right
    to the total; when `m` is given it must equal that total.
    """
    if set(env.unrestricted) != set(gamma):
        raise CoverageMismatch(f"unrestricted bindings {sorted(env.unrestricted)} vs context {sorted(gamma)}")
    if [x for x, _, _ in env.ordered] != [x for x, _ in omega]:
        raise CoverageMismatch(f"ordered bindings {[x for x, _, _ in env.ordered]} vs context "
                               f"{[x for x, _ in omega]}")
    pred = _Predicate(S, sig, alg)
    for x, v in env.unrestricted.items():
        if not pred.holds(alg.unit, v, gamma[x]):
            return False
    for (x, elem, v), (_, ty) in zip(env.ordered, omega):
        if not pred.holds(elem, v, ty):
            return False
    return m is None or alg.eq(alg.op(alg.unit, m), env.total(alg))


# ---------------------------------------------------------------------------
# Fundamental theorem, instance by instance


@dataclass
class SmokeResult:
    verdict: str  # "pass", "fail" or "vacuous"
    probes: int = 0
    trace: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.verdict == "pass"


def _arrow_chain(t: Type, sig: Signature) -> tuple[list[Type], Type]:
    """Peel arrows: returns the arrow nodes (with kinds) and the final result."""
    arrows = []
    t = whnf(t, sig)
    while _is_arrow(t):
        arrows.append(t)
        t = whnf(t.result, sig)
    return arrows, t


def _positive_tyvars(t: Type, sig: Signature, seen=None) -> set[str]:
    seen = set() if seen is None else seen
    match t:
        case TVar(a):
            return {a}
        case Fuse(a, b) | Twist(a, b):
            return _positive_tyvars(a, sig, seen) | _positive_tyvars(b, sig, seen)
        case Sum(alts):
            out = set()
            for _, a in alts:
                out |= _positive_tyvars(a, sig, seen)
            return out
        case Named():
            if t in seen:
                return set()
            seen.add(t)
            return _positive_tyvars(whnf(t, sig), sig, seen)
    return set()


class CanonicalWorld:
    """Finite relations for the quantifiers of a type, in the style of the
    free-theorem arguments: fresh generators paired with fresh atoms, unit
    resourced atoms for variables that unrestricted arguments need, and one
    symbolic head per function-typed argument whose images extend the
    relation of the head's result variable.
    """

    def __init__(self, A: Type, sig: Signature, alg: ResourceAlgebra, generators: int = 2,
                 max_len: int = 3, max_candidates: int = 64):
        self.sig = sig
        self.alg = alg
        self.max_len = max_len
        self.max_candidates = max_candidates
        tyvars = []
        body = A
        while True:
            body = whnf(body, sig)
            if not isinstance(body, Forall):
                break
            tyvars.append(body.var)
            body = body.body
        self.tyvars = tyvars
        self.body = body
        self.arrows, self.result = _arrow_chain(body, sig)
        if isinstance(self.result, Forall):
            raise UnsupportedType("quantifiers below an arrow are not supported")

        S: dict[str, set] = {a: set() for a in tyvars}
        for a in tyvars:
            for i in range(1, generators + 1):
                S[a].add((alg.generator(f"{a}{i}"), Atom(f"{a}{i}")))
        for arr in self.arrows:
            arg = whnf(arr.arg, sig)
            if isinstance(arr, UArrow) and not _is_arrow(arg):
                for a in _positive_tyvars(arg, sig):
                    if a in S:
                        S[a].add((alg.unit, Atom(f"{a}0")))
        self.S = S

        self.head_for: dict[Type, list] = {}
        self.heads: list[tuple[str, Element, Type]] = []
        for j, arr in enumerate(self.arrows, start=1):
            arg = whnf(arr.arg, sig)
            if not _is_arrow(arg) or arr.arg in self.head_for:
                continue
            h_arrows, h_result = _arrow_chain(arg, sig)
            if not isinstance(h_result, TVar) or h_result.name not in S:
                raise UnsupportedType(f"function argument {pretty_type(arg)} must return a quantified variable")
            for inner in h_arrows:
                if _is_arrow(whnf(inner.arg, sig)):
                    raise UnsupportedType(f"function argument {pretty_type(arg)} is of order above two")
            name = f"h{j}"
            elem = alg.unit if isinstance(arr, UArrow) else alg.generator(name)
            self.heads.append((name, elem, arg))
            self.head_for[arr.arg] = [(elem, Atom(name))]
        self._close_heads()
        self.relations = {a: frozenset(rel) for a, rel in self.S.items()}

    def _close_heads(self):
        alg = self.alg
        for _ in range(self.max_len):
            grew = False
            for name, elem, ty in self.heads:
                h_arrows, h_result = _arrow_chain(ty, self.sig)
                images = set()
                for combo in itertools.product(*(self.candidates(a.arg) for a in h_arrows)):
                    m = elem
                    ok = True
                    for arr, (k, _) in zip(h_arrows, combo):
                        if isinstance(arr, UArrow):
                            ok = ok and alg.eq(k, alg.unit)
                        elif isinstance(arr, Under):
                            m = alg.op(k, m)
                        else:
                            m = alg.op(m, k)
                    if ok and alg.size(m) <= self.max_len:
                        images.add((m, SymApp(name, tuple(w for _, w in combo))))
                rel = self.S[h_result.name]
                before = len(rel)
                rel |= images
                grew = grew or len(rel) > before
            if not grew:
                break

    def candidates(self, t: Type, depth: Optional[int] = None) -> list[tuple[Element, Value]]:
        """Pairs (k, w) with k ||- w in [t], enumerated up to the size bounds."""
        if t in self.head_for:
            return self.head_for[t]
        depth = self.max_len + 1 if depth is None else depth
        out = self._cands(t, depth)
        out.sort(key=lambda kv: (self.alg.size(kv[0]), len(pretty_expr(value_to_expr(kv[1])))))
        return out[: self.max_candidates]

    def _cands(self, t: Type, depth: int) -> list:
        alg = self.alg
        match t:
            case TVar(a):
                return sorted(self.S.get(a, ()), key=repr)
            case Unit():
                return [(alg.unit, VUnit())]
            case Fuse(a, b) | Twist(a, b):
                out = []
                for m1, v1 in self._cands(a, depth):
                    for m2, v2 in self._cands(b, depth):
                        if _weight(v1) + _weight(v2) <= self.max_len:
                            m = alg.op(m1, m2) if isinstance(t, Fuse) else alg.op(m2, m1)
                            out.append((m, VPair(v1, v2)))
                return out
            case Sum(alts):
                return [(m, VInj(label, v)) for label, a in alts for m, v in self._cands(a, depth)]
            case Named(name, args):
                if depth <= 0:
                    return []
                return self._cands(unfold(name, args, self.sig), depth - 1)
        raise UnsupportedType(f"cannot generate arguments of type {pretty_type(t)}")


def _weight(v: Value) -> int:
    """Number of atoms and symbolic applications inside a value."""
    match v:
        case Atom() | SymApp():
            return 1
        case VPair(a, b):
            return _weight(a) + _weight(b)
        case VInj(_, a):
            return _weight(a)
    return 0


def fundamental_smoke(e: Expr, A: Type, mode: Mode, sig: Signature, *, algebra: Optional[ResourceAlgebra] = None,
                      generators: int = 2, max_len: int = 3, fuel: int = DEFAULT_FUEL) -> SmokeResult:
    """Check ``eps ||- e in [[A]]`` for a closed term typed at `A` in `mode`.

    Quantifiers are interpreted by a `CanonicalWorld`; function types are
    probed on every generated argument.  A term that does not typecheck
    yields the verdict "vacuous".
    """
    verdict = check_expr(frozenset(), {}, (), e, A, mode, sig)
    if not verdict.accepted:
        return SmokeResult("vacuous", 0, [str(d) for d in verdict.diagnostics])
    alg = algebra or algebra_for_mode(mode)
    world = CanonicalWorld(A, sig, alg, generators=generators, max_len=max_len)
    heads = [name for name, _, _ in world.heads]
    value = evaluate(erase(e), fuel, heads)
    trace: list[str] = []
    pred = _Predicate(world.relations, sig, alg)
    counter = _CountingProbes(world)
    ok = _probe(pred, alg.unit, value, world.body, counter, frozenset(heads), fuel, trace, [])
    return SmokeResult("pass" if ok else "fail", counter.calls, trace)


class _CountingProbes:
    def __init__(self, world: CanonicalWorld):
        self.world = world
        self.calls = 0

    def __call__(self, t: Type):
        cands = self.world.candidates(t)
        self.calls += len(cands)
        return cands
