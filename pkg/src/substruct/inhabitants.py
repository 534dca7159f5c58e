"""Enumerate the closed normal inhabitants of small types.

Search is focused: arrows are introduced eagerly, hypotheses of positive
type are taken apart eagerly, and what remains is either a positive goal
built from the context (right focus) or an application spine on a function
hypothesis (left focus).  In ordered mode an application spine grows a
contiguous block of the context: `->>` arguments come from its right,
`\\` arguments from its left.  Linear mode lets arguments take any subset,
and unrestricted mode gives every subgoal the whole context.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import EvalError, UnsupportedType
from .evaluate import evaluate
from .syntax import (
    App,
    Atom,
    Expr,
    Forall,
    Fuse,
    Inj,
    Lam,
    Lolli,
    MatchPair,
    MatchSum,
    MatchUnit,
    Mode,
    Named,
    Over,
    Pair,
    Sum,
    TVar,
    Twist,
    Type,
    UArrow,
    Under,
    Unit,
    UnitVal,
    Var,
    alpha_key,
    pretty_expr,
    subexprs,
    subst_expr,
)
from .types import collapse

Hyp = tuple[str, Type]
Ctx = tuple[Hyp, ...]


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 8
    max_size: int = 20

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_size <= 0:
            raise ValueError("search budget must be positive")


def _positive(t: Type) -> bool:
    return isinstance(t, (Fuse, Twist, Unit, Sum))


def _arrow(t: Type) -> bool:
    return isinstance(t, (Over, Under, Lolli, UArrow))


class _Search:
    def __init__(self, mode: Mode, budget: SearchBudget):
        self.mode = mode
        self.budget = budget
        self.truncated = False

    def head(self, t: Type) -> Type:
        if isinstance(t, Named):
            raise UnsupportedType("cannot enumerate inhabitants of recursive types")
        if isinstance(t, Forall):
            raise UnsupportedType("quantifiers are only allowed as a prefix")
        return collapse(t, self.mode)

    # goal-directed phase ---------------------------------------------------
    def goal(self, gamma: Ctx, omega: Ctx, goal: Type, depth: int, n: int) -> list[Expr]:
        if depth > self.budget.max_depth:
            self.truncated = True
            return []
        g = self.head(goal)
        if isinstance(g, Lolli) and self.mode is Mode.ORDERED:
            return []  # the linear arrow has no ordered introduction
        if _arrow(g):
            x = f"x{n}"
            if isinstance(g, UArrow):
                gamma = gamma + ((x, g.arg),)
            elif isinstance(g, Under):
                omega = ((x, g.arg),) + omega
            else:
                omega = omega + ((x, g.arg),)
            return [Lam(x, b) for b in self.goal(gamma, omega, g.result, depth + 1, n + 1)]
        return self.invert(gamma, omega, g, depth, n)

    def invert(self, gamma: Ctx, omega: Ctx, g: Type, depth: int, n: int) -> list[Expr]:
        """Take apart the first positive hypothesis, if there is one."""
        unrestricted = self.mode is Mode.UNRESTRICTED
        ctx = gamma if unrestricted else omega
        for i, (x, t) in enumerate(ctx):
            t = self.head(t)
            if not _positive(t):
                continue

            def rebuild(parts: Ctx) -> tuple[Ctx, Ctx]:
                new = ctx[:i] + parts + ctx[i + 1:]
                return (new, omega) if unrestricted else (gamma, new)

            match t:
                case Unit():
                    return [MatchUnit(Var(x), b) for b in self.invert(*rebuild(()), g, depth, n)]
                case Fuse(a, b) | Twist(a, b):
                    y, z = f"x{n}", f"x{n + 1}"
                    parts = ((y, a), (z, b)) if isinstance(t, Fuse) else ((z, b), (y, a))
                    return [MatchPair(Var(x), y, z, body)
                            for body in self.invert(*rebuild(parts), g, depth, n + 2)]
                case Sum(alts):
                    y = f"x{n}"
                    per_branch = [[(label, y, body) for body in self.invert(*rebuild(((y, a),)), g, depth, n + 1)]
                                  for label, a in alts]
                    return [MatchSum(Var(x), tuple(choice)) for choice in itertools.product(*per_branch)]
        return self.focus(gamma, omega, g, depth, n)

    # focusing phase -------------------------------------------------------
    def focus(self, gamma: Ctx, omega: Ctx, g: Type, depth: int, n: int) -> list[Expr]:
        out: list[Expr] = []
        if _positive(g):
            out += self.right(gamma, omega, g, depth, n)
        if isinstance(g, TVar):
            out += [Var(x) for x, t in gamma if not omega and self.head(t) == g]
            if len(omega) == 1 and self.head(omega[0][1]) == g:
                out.append(Var(omega[0][0]))
        for x, t in gamma:
            if self.reaches(t, g):
                if self.mode is Mode.ORDERED:
                    for k in range(len(omega) + 1):
                        out += self.spine(gamma, omega, Var(x), t, (k, k), g, depth + 1, n)
                else:
                    out += self.spine(gamma, omega, Var(x), t, frozenset(), g, depth + 1, n)
        for i, (x, t) in enumerate(omega):
            if self.reaches(t, g):
                block = (i, i + 1) if self.mode is Mode.ORDERED else frozenset((i,))
                out += self.spine(gamma, omega, Var(x), t, block, g, depth + 1, n)
        return out

    def reaches(self, t: Type, g: Type) -> bool:
        """Whether applying a hypothesis of type `t` could be useful for goal `g`."""
        t = self.head(t)
        if not _arrow(t):
            return False
        while _arrow(t):
            t = self.head(t.result)
        return _positive(t) or t == g

    def right(self, gamma: Ctx, omega: Ctx, g: Type, depth: int, n: int) -> list[Expr]:
        match g:
            case Unit():
                return [UnitVal()] if not omega else []
            case Sum(alts):
                return [Inj(label, e) for label, a in alts for e in self.goal(gamma, omega, a, depth + 1, n)]
            case Fuse(a, b) | Twist(a, b):
                out = []
                for left, right in self.splits(omega):
                    if isinstance(g, Twist):
                        left, right = right, left
                    for ea in self.goal(gamma, left, a, depth + 1, n):
                        for eb in self.goal(gamma, right, b, depth + 1, n):
                            out.append(Pair(ea, eb))
                return out
        return []

    def splits(self, omega: Ctx) -> Iterator[tuple[Ctx, Ctx]]:
        if self.mode is Mode.ORDERED:
            for i in range(len(omega) + 1):
                yield omega[:i], omega[i:]
        elif self.mode is Mode.LINEAR:
            idx = range(len(omega))
            for r in range(len(omega) + 1):
                for chosen in itertools.combinations(idx, r):
                    yield (tuple(omega[i] for i in chosen),
                           tuple(omega[i] for i in idx if i not in chosen))
        else:
            yield omega, omega

    def spine(self, gamma: Ctx, omega: Ctx, e: Expr, t: Type, block, g: Type, depth: int, n: int) -> list[Expr]:
        """Apply `e` to arguments until its type is the goal or positive.

        `block` is the part of `omega` consumed so far: an index range in
        ordered mode, an index set in linear mode.
        """
        if depth > self.budget.max_depth:
            self.truncated = True
            return []
        t = self.head(t)
        ordered = self.mode is Mode.ORDERED
        out: list[Expr] = []
        if isinstance(t, Lolli) and ordered:
            return out
        if _arrow(t):
            for arg_ctx, new_block in self.arg_contexts(omega, t, block):
                for a in self.goal(gamma, arg_ctx, t.arg, depth + 1, n):
                    out += self.spine(gamma, omega, App(e, a), t.result, new_block, g, depth + 1, n)
            return out
        rest = self.remaining(omega, block)
        if isinstance(t, TVar):
            if t == g and rest == ((), ()):
                out.append(e)
            return out
        if _positive(t):
            # bind the result as a hypothesis where the block was, then continue
            r = f"x{n}"
            if self.mode is Mode.UNRESTRICTED:
                new_gamma, new_omega = gamma + ((r, t),), omega
            elif ordered:
                new_gamma, new_omega = gamma, rest[0] + ((r, t),) + rest[1]
            else:
                new_gamma, new_omega = gamma, rest[0] + ((r, t),)
            for body in self.invert(new_gamma, new_omega, g, depth, n + 1):
                out.append(subst_expr({r: e}, body))
        return out

    def arg_contexts(self, omega: Ctx, t: Type, block):
        if isinstance(t, UArrow) or self.mode is Mode.UNRESTRICTED:
            yield (), block
        elif self.mode is Mode.ORDERED:
            lo, hi = block
            if isinstance(t, Under):
                for j in range(lo, -1, -1):
                    yield omega[j:lo], (j, hi)
            else:
                for j in range(hi, len(omega) + 1):
                    yield omega[hi:j], (lo, j)
        else:
            free = [i for i in range(len(omega)) if i not in block]
            for r in range(len(free) + 1):
                for chosen in itertools.combinations(free, r):
                    yield tuple(omega[i] for i in chosen), block | set(chosen)

    def remaining(self, omega: Ctx, block) -> tuple[Ctx, Ctx]:
        if self.mode is Mode.UNRESTRICTED:
            return (), ()
        if self.mode is Mode.ORDERED:
            lo, hi = block
            return omega[:lo], omega[hi:]
        return tuple(h for i, h in enumerate(omega) if i not in block), ()


def _size(e: Expr) -> int:
    return sum(1 for _ in subexprs(e))


def _strip_quantifiers(t: Type) -> Type:
    while isinstance(t, Forall):
        t = t.body
    return t


def enumerate_inhabitants(A: Type, mode: Mode, budget: SearchBudget = SearchBudget(),
                          ) -> tuple[list[Expr], bool]:
    """Closed long normal inhabitants of `A`, and whether the search was cut short.

    Leading quantifiers are dropped; their variables act as opaque base
    types.  Terms larger than the budget's size bound are discarded, which
    also marks the result as truncated.  The list is free of alpha-equivalent
    duplicates and sorted by printed form.
    """
    search = _Search(mode, budget)
    found = search.goal((), (), _strip_quantifiers(A), 0, 1)
    seen = {}
    truncated = search.truncated
    for e in found:
        if _size(e) > budget.max_size:
            truncated = True
            continue
        seen.setdefault(alpha_key(e), e)
    return sorted(seen.values(), key=pretty_expr), truncated


def count_inhabitants(A: Type, mode: Mode, budget: SearchBudget = SearchBudget()) -> tuple[int, bool]:
    terms, truncated = enumerate_inhabitants(A, mode, budget)
    return len(terms), truncated


def probe_outputs(terms: list[Expr], A: Type, mode: Mode) -> Optional[list]:
    """Results of applying each term to fresh atoms, one per argument.

    Returns None unless every argument of `A` is a type variable, the only
    case in which fresh atoms are valid arguments.
    """
    t = collapse(_strip_quantifiers(A), mode)
    n = 0
    while _arrow(t):
        if not isinstance(t.arg, TVar):
            return None
        n += 1
        t = collapse(t.result, mode)
    outputs = []
    for e in terms:
        expr = e
        for i in range(1, n + 1):
            expr = App(expr, Atom(f"p{i}"))
        try:
            outputs.append(evaluate(expr, 10_000))
        except EvalError:
            outputs.append(None)
    return outputs
