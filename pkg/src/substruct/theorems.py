"""Free theorems, checked by running programs on fresh atoms.

A polymorphic program cannot inspect the atoms it is given, so its behaviour
on a list or tree of distinct atoms determines its behaviour everywhere.
Each theorem kind fixes a type template and an extensional prediction for
every program of that type; `run_theorem` typechecks a declaration at the
template and compares its outputs with the prediction.
"""

from __future__ import annotations

import enum
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .check import accepted_with_dependencies
from .errors import EvalError, MalformedTree, TemplateMismatch
from .evaluate import DEFAULT_FUEL, erase, evaluate, link
from .syntax import (
    App,
    Atom,
    Forall,
    Fuse,
    Lolli,
    Mode,
    Named,
    Over,
    Program,
    Signature,
    Sum,
    SymApp,
    TVar,
    Twist,
    Type,
    TypeDef,
    UArrow,
    Under,
    Value,
    VInj,
    VPair,
    VUnit,
    parse_program,
    pretty_expr,
    pretty_type,
    value_to_expr,
)
from .types import type_equal


class TheoremKind(enum.Enum):
    LIST_IDENTITY = "ListIdentity"
    LIST_REVERSAL = "ListReversal"
    LINEAR_PERMUTATION = "LinearPermutation"
    TREE_INORDER = "TreeInorder"
    TREE_PREORDER = "TreePreorder"
    TREE_POSTORDER = "TreePostorder"
    FOLD_UNIQUENESS = "FoldUniqueness"
    PAIR_ORDER = "PairOrder"

    @classmethod
    def parse(cls, text: str) -> "TheoremKind":
        for k in cls:
            if k.value.lower() == text.lower():
                return k
        raise ValueError(f"unknown theorem kind {text!r}; expected one of {', '.join(k.value for k in cls)}")


# Reference datatypes.  Names carry a prefix so they never clash with the
# definitions of the program being tested.
_PREFIX = "tpl_"
_REFERENCE_TYPES = """
type llist[a] = +{nil : 1, cons : a * llist a}
type rlist[a] = +{nil : 1, cons : a % rlist a}
type lxrtree[a] = +{leaf : 1, node : lxrtree a * a * lxrtree a}
type xlrtree[a] = +{leaf : 1, node : (xlrtree a % a) * xlrtree a}
type lrxtree[a] = +{leaf : 1, node : lrxtree a * (a % lrxtree a)}
"""


def _prefixed(t: Type) -> Type:
    match t:
        case Named(name, args):
            return Named(_PREFIX + name, tuple(_prefixed(a) for a in args))
        case Sum(alts):
            return Sum(tuple((label, _prefixed(a)) for label, a in alts))
        case Forall(v, body):
            return Forall(v, _prefixed(body))
        case Fuse(x, y) | Twist(x, y):
            return type(t)(_prefixed(x), _prefixed(y))
        case Over(x, y) | Under(x, y) | Lolli(x, y) | UArrow(x, y):
            return type(t)(_prefixed(x), _prefixed(y))
    return t


PRELUDE = Signature(tuple(TypeDef(_PREFIX + d.name, d.params, _prefixed(d.body), None)
                          for d in parse_program(_REFERENCE_TYPES).signature.defs))

_a, _b = TVar("a"), TVar("b")


def _ref(name: str, *args: Type) -> Named:
    return Named(_PREFIX + name, args)


def _endo(arrow, src: Type, dst: Type) -> Type:
    return Forall("a", arrow(src, dst))


TEMPLATES: dict[TheoremKind, tuple[Type, ...]] = {
    TheoremKind.LIST_IDENTITY: tuple(_endo(arr, _ref(l, _a), _ref(l, _a))
                                     for l in ("llist", "rlist") for arr in (Over, Under)),
    TheoremKind.LIST_REVERSAL: tuple(_endo(arr, _ref(src, _a), _ref(dst, _a))
                                     for src, dst in (("llist", "rlist"), ("rlist", "llist"))
                                     for arr in (Over, Under)),
    TheoremKind.LINEAR_PERMUTATION: (_endo(Lolli, _ref("llist", _a), _ref("llist", _a)),),
    TheoremKind.TREE_INORDER: tuple(_endo(arr, _ref("lxrtree", _a), _ref("llist", _a)) for arr in (Over, Under)),
    TheoremKind.TREE_PREORDER: tuple(_endo(arr, _ref("xlrtree", _a), _ref("llist", _a)) for arr in (Over, Under)),
    TheoremKind.TREE_POSTORDER: tuple(_endo(arr, _ref("lrxtree", _a), _ref("llist", _a)) for arr in (Over, Under)),
    TheoremKind.FOLD_UNIQUENESS: (Forall("a", Forall("b", UArrow(Over(Fuse(_a, _b), _b),
                                                                  UArrow(_b, Over(_ref("llist", _a), _b))))),),
    TheoremKind.PAIR_ORDER: (Forall("a", Over(_a, Over(_a, Fuse(_a, _a)))),),
}

DEFAULT_MODES = {k: Mode.ORDERED for k in TheoremKind} | {TheoremKind.LINEAR_PERMUTATION: Mode.LINEAR}


@dataclass(frozen=True)
class TheoremSpec:
    kind: TheoremKind
    mode: Optional[Mode] = None
    templates: tuple[Type, ...] = ()

    def __post_init__(self):
        if self.mode is None:
            object.__setattr__(self, "mode", DEFAULT_MODES[self.kind])
        if not self.templates:
            object.__setattr__(self, "templates", TEMPLATES[self.kind])

    def matching_template(self, ty: Type, sig: Signature) -> Optional[Type]:
        """The first template equal to `ty` in this theorem's mode, if any."""
        both = sig.extend(PRELUDE)
        for t in self.templates:
            if type_equal(ty, t, both, self.mode):
                return t
        return None


@dataclass
class Failure:
    input: str
    actual: str
    expected: str


@dataclass
class TheoremReport:
    program: str
    decl: str
    kind: TheoremKind
    mode: Mode
    typechecked: bool
    trials: int = 0
    failures: list[Failure] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return self.typechecked and not self.failures

    def as_record(self) -> dict:
        return {
            "kind": "theorem", "program": self.program, "decl": self.decl, "theorem": self.kind.value,
            "mode": self.mode.value, "typechecked": self.typechecked, "trials": self.trials,
            "clean": self.clean, "notes": list(self.notes),
            "failures": [vars(f) for f in self.failures],
        }


# ---------------------------------------------------------------------------
# Values of lists and trees


def make_atoms(n: int, prefix: str = "v") -> list[tuple[str, Atom]]:
    """`n` distinct generators ``a1..an`` paired with distinct atoms."""
    return [(f"a{i}", Atom(f"{prefix}{i}")) for i in range(1, n + 1)]


def list_value(items) -> Value:
    out: Value = VInj("nil", VUnit())
    for x in reversed(list(items)):
        out = VInj("cons", VPair(x, out))
    return out


def list_items(v: Value) -> list[Value]:
    """Elements of a cons/nil list value; raises `MalformedTree` otherwise."""
    out = []
    while True:
        match v:
            case VInj("nil", VUnit()):
                return out
            case VInj("cons", VPair(x, rest)):
                out.append(x)
                v = rest
            case _:
                raise MalformedTree(f"not a list: {_show(v)}")


class TreeOrder(enum.Enum):
    IN = "in"
    PRE = "pre"
    POST = "post"


_LAYOUT = {TreeOrder.IN: "lxr", TreeOrder.PRE: "xlr", TreeOrder.POST: "lrx"}


def random_shape(n: int, rng: random.Random):
    """A binary tree shape with `n` nodes, as nested ``(left, right)`` tuples or None."""
    if n == 0:
        return None
    k = rng.randrange(n)
    return (random_shape(k, rng), random_shape(n - 1 - k, rng))


def tree_value(shape, atoms, layout: str) -> Value:
    """Fill a shape with atoms in inorder position and encode it for `layout`."""
    it = iter(atoms)

    def go(s):
        if s is None:
            return VInj("leaf", VUnit())
        left = go(s[0])
        x = next(it)
        right = go(s[1])
        if layout == "xlr":
            return VInj("node", VPair(VPair(left, x), right))
        return VInj("node", VPair(left, VPair(x, right)))

    return go(shape)


def independent_traversal(tree: Value, order: TreeOrder) -> list[Value]:
    """Traverse a leaf/node tree value.

    Nodes are ``node((left, (x, right)))`` or ``node(((left, x), right))``;
    the two shapes are told apart by whether the first component is a pair.
    """
    out: list[Value] = []

    def go(t: Value):
        match t:
            case VInj("leaf", VUnit()):
                return
            case VInj("node", VPair(VPair(left, x), right)):
                pass
            case VInj("node", VPair(left, VPair(x, right))):
                pass
            case _:
                raise MalformedTree(f"not a tree: {_show(t)}")
        if order is TreeOrder.PRE:
            out.append(x)
        go(left)
        if order is TreeOrder.IN:
            out.append(x)
        go(right)
        if order is TreeOrder.POST:
            out.append(x)

    go(tree)
    return out


def expected_fold(items, g: str = "g", base: Value = Atom("b")) -> Value:
    out = base
    for x in reversed(list(items)):
        out = SymApp(g, (VPair(x, out),))
    return out


def _show(v: Value) -> str:
    return pretty_expr(value_to_expr(v))


def _show_items(items) -> str:
    return "[" + ", ".join(_show(x) for x in items) + "]"


# ---------------------------------------------------------------------------
# Running


_TREE_ORDERS = {TheoremKind.TREE_INORDER: TreeOrder.IN, TheoremKind.TREE_PREORDER: TreeOrder.PRE,
                TheoremKind.TREE_POSTORDER: TreeOrder.POST}

_PAIR_NAMES = {("v", "v"): "first_first", ("v", "w"): "first_second",
               ("w", "v"): "second_first", ("w", "w"): "second_second"}


def run_theorem(spec: TheoremSpec, program: Program, decl_name: str, trials: int = 20, max_len: int = 6,
                *, seed: int = 0, fuel: int = DEFAULT_FUEL, program_name: str = "") -> TheoremReport:
    """Typecheck `decl_name` in the theorem's mode and test its prediction.

    Trial ``i`` uses size ``i`` while ``i <= max_len`` and a random size up to
    `max_len` afterwards, so every size is covered when ``trials > max_len``.
    Lists have that many elements and trees that many nodes.
    """
    decl = program.decl(decl_name)
    if spec.matching_template(decl.type, program.signature) is None:
        raise TemplateMismatch(f"{decl_name} : {pretty_type(decl.type)} does not match the "
                               f"{spec.kind.value} template {pretty_type(spec.templates[0])}")
    report = TheoremReport(program_name, decl_name, spec.kind, spec.mode, typechecked=False)
    verdict = accepted_with_dependencies(program, decl_name, spec.mode, override=True)
    if not verdict.accepted:
        report.notes.append(f"rejected: {verdict.first_failure}")
        return report
    report.typechecked = True
    fn = erase(link(program, decl_name))
    rng = random.Random(seed)
    realized: set[str] = set()
    for i in range(trials):
        size = i if i <= max_len else rng.randint(0, max_len)
        report.trials += 1
        _trial(spec, fn, size, rng, fuel, report, realized)
    if spec.kind is TheoremKind.PAIR_ORDER and realized:
        report.notes.append("realizes " + ", ".join(sorted(realized)))
    return report


def _apply(fn, args, fuel, heads=()) -> Value:
    e = fn
    for a in args:
        e = App(e, value_to_expr(a))
    return evaluate(e, fuel, heads)


def _trial(spec: TheoremSpec, fn, size: int, rng: random.Random, fuel: int, report: TheoremReport,
           realized: set[str]) -> None:
    kind = spec.kind
    atoms = [a for _, a in make_atoms(size)]
    heads: tuple[str, ...] = ()
    if kind in _TREE_ORDERS:
        order = _TREE_ORDERS[kind]
        tree = tree_value(random_shape(size, rng), atoms, _LAYOUT[order])
        args, shown = [tree], _show(tree)
        expected = f"{order.value}order traversal {_show_items(independent_traversal(tree, order))}"
    elif kind is TheoremKind.FOLD_UNIQUENESS:
        args, shown = [Atom("g"), Atom("b"), list_value(atoms)], f"#g #b {_show_items(atoms)}"
        heads = ("g",)
        expected = _show(expected_fold(atoms))
    elif kind is TheoremKind.PAIR_ORDER:
        args, shown = [Atom("v"), Atom("w")], "#v #w"
        expected = {Mode.ORDERED: "(#v, #w)", Mode.LINEAR: "(#v, #w) or (#w, #v)",
                    Mode.UNRESTRICTED: "a pair of #v and #w"}[spec.mode]
    else:
        args, shown = [list_value(atoms)], _show_items(atoms)
        expected = {TheoremKind.LIST_IDENTITY: f"the same list {_show_items(atoms)}",
                    TheoremKind.LIST_REVERSAL: f"the reverse {_show_items(atoms[::-1])}",
                    TheoremKind.LINEAR_PERMUTATION: f"a permutation of {_show_items(atoms)}"}[kind]
    try:
        out = _apply(fn, args, fuel, heads)
    except EvalError as exc:
        report.failures.append(Failure(shown, f"error: {exc}", expected))
        return
    try:
        ok = _holds(spec, out, atoms, args, realized)
    except MalformedTree as exc:
        report.failures.append(Failure(shown, f"{_show(out)} ({exc})", expected))
        return
    if not ok:
        report.failures.append(Failure(shown, _show(out), expected))


def _holds(spec: TheoremSpec, out: Value, atoms, args, realized: set[str]) -> bool:
    kind = spec.kind
    if kind is TheoremKind.LIST_IDENTITY:
        return list_items(out) == atoms
    if kind is TheoremKind.LIST_REVERSAL:
        return list_items(out) == atoms[::-1]
    if kind is TheoremKind.LINEAR_PERMUTATION:
        return Counter(list_items(out)) == Counter(atoms)
    if kind in _TREE_ORDERS:
        return list_items(out) == independent_traversal(args[0], _TREE_ORDERS[kind])
    if kind is TheoremKind.FOLD_UNIQUENESS:
        return out == expected_fold(atoms)
    # pair order
    if not (isinstance(out, VPair) and isinstance(out.fst, Atom) and isinstance(out.snd, Atom)):
        return False
    key = (out.fst.name, out.snd.name)
    if key not in _PAIR_NAMES:
        return False
    realized.add(_PAIR_NAMES[key])
    allowed = {Mode.ORDERED: {("v", "w")}, Mode.LINEAR: {("v", "w"), ("w", "v")},
               Mode.UNRESTRICTED: set(_PAIR_NAMES)}[spec.mode]
    return key in allowed
