"""Hypothesis strategies for types and expressions."""

from hypothesis import strategies as st

from substruct.syntax import (
    App, Atom, Fix, Forall, Fuse, Inj, Lam, Lolli, MatchPair, MatchSum, MatchUnit, Over, Pair,
    Sum, TVar, Twist, UArrow, Under, Unit, UnitVal, Var,
)

TYVARS = ["a", "b", "c"]
LABELS = ["nil", "cons", "left", "right"]
VARS = ["x", "y", "z", "f", "g"]


def types(max_leaves: int = 8, arrows=(Over, Under, Lolli, UArrow)):
    leaves = st.one_of(st.sampled_from(TYVARS).map(TVar), st.just(Unit()))

    def extend(children):
        binary = st.sampled_from([Fuse, Twist, *arrows])
        sums = st.lists(st.tuples(st.sampled_from(LABELS), children), min_size=1, max_size=3,
                        unique_by=lambda p: p[0]).map(lambda alts: Sum(tuple(alts)))
        return st.one_of(st.builds(lambda k, a, b: k(a, b), binary, children, children), sums)

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def closed_types(max_leaves: int = 8):
    return types(max_leaves).map(lambda t: _close(t))


def _close(t):
    from substruct.types import free_type_vars
    for v in sorted(free_type_vars(t), reverse=True):
        t = Forall(v, t)
    return t


@st.composite
def exprs(draw, scope=(), depth=4, allow_fix=True):
    """Well-scoped expressions over `scope`; closed when `scope` is empty."""
    choices = ["atom", "unit"] + (["var"] * 3 if scope else [])
    if depth > 0:
        choices += ["lam", "lam", "app", "app", "pair", "inj", "mpair", "munit", "msum"]
        if allow_fix:
            choices.append("fix")
    kind = draw(st.sampled_from(choices))
    sub = lambda sc=scope: exprs(sc, depth - 1, allow_fix)
    fresh = lambda: draw(st.sampled_from(VARS))
    match kind:
        case "atom":
            return Atom(draw(st.sampled_from(["p", "q", "r"])))
        case "unit":
            return UnitVal()
        case "var":
            return Var(draw(st.sampled_from(list(scope))))
        case "lam":
            x = fresh()
            return Lam(x, draw(sub(scope + (x,))))
        case "app":
            return App(draw(sub()), draw(sub()))
        case "pair":
            return Pair(draw(sub()), draw(sub()))
        case "inj":
            return Inj(draw(st.sampled_from(LABELS)), draw(sub()))
        case "mpair":
            x, y = draw(st.lists(st.sampled_from(VARS), min_size=2, max_size=2, unique=True))
            return MatchPair(draw(sub()), x, y, draw(sub(scope + (x, y))))
        case "munit":
            return MatchUnit(draw(sub()), draw(sub()))
        case "msum":
            labels = draw(st.lists(st.sampled_from(LABELS), min_size=1, max_size=3, unique=True))
            branches = []
            for label in labels:
                x = fresh()
                branches.append((label, x, draw(sub(scope + (x,)))))
            return MatchSum(draw(sub()), tuple(branches))
        case "fix":
            f, x = draw(st.lists(st.sampled_from(VARS), min_size=2, max_size=2, unique=True))
            return Fix(f, Unit(), Lam(x, draw(sub(scope + (f, x)))))
    raise AssertionError(kind)
