"""Type substitution, unfolding of definitions and equirecursive equality."""

from __future__ import annotations

from typing import Mapping, Optional

from .errors import ArityMismatch, IllFormedType, SignatureError, UnknownTypeName
from .syntax import (
    ARROWS,
    PRODUCTS,
    Forall,
    Fuse,
    Lolli,
    Mode,
    Named,
    Over,
    Signature,
    Sum,
    TVar,
    Twist,
    Type,
    UArrow,
    Under,
    Unit,
    fresh_name,
)

TypeSubst = Mapping[str, Type]


def free_type_vars(t: Type) -> frozenset[str]:
    match t:
        case TVar(a):
            return frozenset((a,))
        case Forall(a, body):
            return free_type_vars(body) - {a}
        case Sum(alts):
            out = frozenset()
            for _, a in alts:
                out |= free_type_vars(a)
            return out
        case Named(_, args):
            out = frozenset()
            for a in args:
                out |= free_type_vars(a)
            return out
        case Unit():
            return frozenset()
    a, b = _children(t)
    return free_type_vars(a) | free_type_vars(b)


def _children(t: Type) -> tuple[Type, Type]:
    if isinstance(t, PRODUCTS):
        return t.left, t.right
    return t.arg, t.result


def _rebuild(t: Type, a: Type, b: Type) -> Type:
    return type(t)(a, b)


def subst_type(theta: TypeSubst, t: Type) -> Type:
    """Capture-avoiding simultaneous substitution."""
    if not theta:
        return t
    match t:
        case TVar(a):
            return theta.get(a, t)
        case Unit():
            return t
        case Sum(alts):
            return Sum(tuple((label, subst_type(theta, a)) for label, a in alts))
        case Named(name, args):
            return Named(name, tuple(subst_type(theta, a) for a in args))
        case Forall(a, body):
            inner = {k: v for k, v in theta.items() if k != a}
            if not inner:
                return t
            incoming = frozenset().union(*(free_type_vars(v) for v in inner.values()))
            if a in incoming:
                a2 = fresh_name(a, incoming | free_type_vars(body) | set(inner))
                body = subst_type({a: TVar(a2)}, body)
                a = a2
            return Forall(a, subst_type(inner, body))
    x, y = _children(t)
    return _rebuild(t, subst_type(theta, x), subst_type(theta, y))


def unfold(name: str, args, sig: Signature) -> Type:
    """Body of definition `name` instantiated at `args`.

    `args` is either a positional sequence or a mapping from parameter names.
    """
    d = sig.get(name)
    if d is None:
        raise UnknownTypeName(f"unknown type name {name}")
    if isinstance(args, Mapping):
        if set(args) != set(d.params):
            raise ArityMismatch(f"{name} expects parameters {list(d.params)}, got {sorted(args)}")
        theta = dict(args)
    else:
        args = tuple(args)
        if len(args) != len(d.params):
            raise ArityMismatch(f"{name} expects {len(d.params)} argument(s), got {len(args)}")
        theta = dict(zip(d.params, args))
    return subst_type(theta, d.body)


def whnf(t: Type, sig: Signature) -> Type:
    """Unfold named types at the root until a structural constructor appears."""
    seen = set()
    while isinstance(t, Named):
        if t in seen:
            raise SignatureError("non-contractive", f"{t} unfolds to itself")
        seen.add(t)
        t = unfold(t.name, t.args, sig)
    return t


def collapse(t: Type, mode: Mode) -> Type:
    """Identify connectives at the root that coincide in `mode`.

    Linear: over/under become the linear arrow and twist becomes fuse.
    Unrestricted: every arrow becomes the unrestricted arrow.
    """
    if mode is Mode.ORDERED:
        return t
    if isinstance(t, Twist):
        return Fuse(t.left, t.right)
    if mode is Mode.LINEAR and isinstance(t, (Over, Under)):
        return Lolli(t.arg, t.result)
    if mode is Mode.UNRESTRICTED and isinstance(t, (Over, Under, Lolli)):
        return UArrow(t.arg, t.result)
    return t


def head(t: Type, sig: Signature, mode: Mode = Mode.ORDERED) -> Type:
    return collapse(whnf(t, sig), mode)


def type_equal(a: Type, b: Type, sig: Signature, mode: Mode = Mode.ORDERED,
               max_pairs: int = 100_000) -> bool:
    """Equality up to alpha-renaming and silent unfolding of definitions.

    A coinductive bisimulation: a pair of types already under comparison is
    assumed equal. Only pairs with a named type on either side are recorded,
    which suffices because every cycle passes through a definition.
    """
    assumed: set[tuple[Type, Type]] = set()
    counter = [0]

    def go(x: Type, y: Type) -> bool:
        if x == y:
            return True
        if isinstance(x, Named) or isinstance(y, Named):
            if (x, y) in assumed:
                return True
            counter[0] += 1
            if counter[0] > max_pairs:
                raise RecursionError("type equality did not converge; definitions are not regular")
            assumed.add((x, y))
            x2 = whnf(x, sig) if isinstance(x, Named) else x
            y2 = whnf(y, sig) if isinstance(y, Named) else y
            return go(x2, y2)
        x, y = collapse(x, mode), collapse(y, mode)
        if type(x) is not type(y):
            return False
        match x:
            case TVar(n):
                return n == y.name
            case Unit():
                return True
            case Sum(alts):
                bx, by = dict(alts), y.branches
                return set(bx) == set(by) and all(go(bx[k], by[k]) for k in bx)
            case Forall(v, body):
                fresh = TVar(fresh_name("t", free_type_vars(x) | free_type_vars(y) | {v, y.var}))
                return go(subst_type({v: fresh}, body), subst_type({y.var: fresh}, y.body))
        x1, x2 = _children(x)
        y1, y2 = _children(y)
        return go(x1, y1) and go(x2, y2)

    return go(a, b)


def is_contractive(sig: Signature) -> bool:
    return all(not isinstance(d.body, Named) for d in sig.defs)


def is_purely_positive(t: Type, sig: Signature) -> bool:
    """Built from fuse, twist, unit, sums, variables and positive definitions.

    Type variables count as positive: definition parameters range over
    positive types, and instances must supply positive arguments.
    """
    checked: dict[str, bool] = {}

    def defn_ok(name: str) -> bool:
        if name in checked:
            return checked[name]
        d = sig.get(name)
        if d is None:
            return False
        checked[name] = True  # coinductive assumption for recursive references
        checked[name] = go(d.body)
        return checked[name]

    def go(x: Type) -> bool:
        match x:
            case TVar() | Unit():
                return True
            case Fuse(a, b) | Twist(a, b):
                return go(a) and go(b)
            case Sum(alts):
                return all(go(a) for _, a in alts)
            case Named(name, args):
                return all(go(a) for a in args) and defn_ok(name)
        return False

    return go(t)


def check_well_formed(t: Type, sig: Signature, delta: frozenset[str], pos=None) -> None:
    """Raise unless every variable is bound and every instance has the right arity."""
    line, col = pos or (None, None)

    def go(x: Type, bound: frozenset[str]):
        match x:
            case TVar(a):
                if a not in bound:
                    raise IllFormedType(f"unbound type variable {a}", line, col)
            case Unit():
                pass
            case Forall(a, body):
                go(body, bound | {a})
            case Sum(alts):
                for _, a in alts:
                    go(a, bound)
            case Named(name, args):
                d = sig.get(name)
                if d is None:
                    raise UnknownTypeName(f"unknown type name {name}", line, col)
                if len(args) != len(d.params):
                    raise ArityMismatch(f"{name} expects {len(d.params)} argument(s), got {len(args)}",
                                        line, col)
                for a in args:
                    go(a, bound)
            case _:
                a, b = _children(x)
                go(a, bound)
                go(b, bound)

    go(t, delta)


def validate_signature(sig: Signature) -> None:
    """Every definition must be closed, contractive and purely positive."""
    for d in sig.defs:
        line, col = d.pos or (None, None)
        if isinstance(d.body, Named):
            raise SignatureError("non-contractive", f"definition of {d.name} is another type name", line, col)
        check_well_formed(d.body, sig, frozenset(d.params), d.pos)
    for d in sig.defs:
        line, col = d.pos or (None, None)
        if not is_purely_positive(d.body, sig):
            raise SignatureError("not-positive", f"definition of {d.name} is not purely positive", line, col)
