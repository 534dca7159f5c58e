import random

import pytest

from conftest import load
from substruct.errors import MalformedTree, TemplateMismatch
from substruct.evaluate import erase, evaluate, link
from substruct.syntax import App, Atom, Mode, VInj, VUnit, value_to_expr
from substruct.theorems import (
    TheoremKind, TheoremSpec, TreeOrder, expected_fold, independent_traversal, list_items, list_value,
    make_atoms, random_shape, run_theorem, tree_value,
)

K = TheoremKind


def test_make_atoms():
    assert make_atoms(0) == []
    two = make_atoms(2)
    assert [g for g, _ in two] == ["a1", "a2"] and two[0][1] != two[1][1]
    six = make_atoms(6)
    assert len({g for g, _ in six}) == len({a for _, a in six}) == 6


LEAF = VInj("leaf", VUnit())
a, b, c = Atom("a"), Atom("b"), Atom("c")


def node(left, x, right):
    from substruct.syntax import VPair
    return VInj("node", VPair(left, VPair(x, right)))


def test_independent_traversal():
    for order in TreeOrder:
        assert independent_traversal(LEAF, order) == []
        assert independent_traversal(node(LEAF, a, LEAF), order) == [a]
    t = node(node(LEAF, a, LEAF), b, node(LEAF, c, LEAF))
    assert independent_traversal(t, TreeOrder.IN) == [a, b, c]
    assert independent_traversal(t, TreeOrder.PRE) == [b, a, c]
    assert independent_traversal(t, TreeOrder.POST) == [a, c, b]
    with pytest.raises(MalformedTree):
        independent_traversal(a, TreeOrder.IN)


def test_tree_layouts_agree_on_traversals():
    rng = random.Random(3)
    for n in range(8):
        shape = random_shape(n, rng)
        atoms = [x for _, x in make_atoms(n)]
        lxr = tree_value(shape, atoms, "lxr")
        xlr = tree_value(shape, atoms, "xlr")
        assert independent_traversal(lxr, TreeOrder.IN) == atoms
        for order in TreeOrder:
            assert independent_traversal(lxr, order) == independent_traversal(xlr, order)


CLEAN = [
    ("lists.ord", "id_list", K.LIST_IDENTITY, None),
    ("lists.ord", "copy_list", K.LIST_IDENTITY, None),
    ("lists.ord", "copy_rlist", K.LIST_IDENTITY, None),
    ("lists.ord", "rev", K.LIST_REVERSAL, None),
    ("lists.ord", "rev_back", K.LIST_REVERSAL, None),
    ("lists.ord", "fold", K.FOLD_UNIQUENESS, None),
    ("trees.ord", "inord", K.TREE_INORDER, None),
    ("trees.ord", "preord", K.TREE_PREORDER, None),
    ("trees.ord", "postord", K.TREE_POSTORDER, None),
    ("basics.ord", "pair", K.PAIR_ORDER, Mode.ORDERED),
    ("linear.ord", "lpair", K.PAIR_ORDER, Mode.LINEAR),
    ("linear.ord", "lswap", K.PAIR_ORDER, Mode.LINEAR),
    ("linear.ord", "lid", K.LINEAR_PERMUTATION, None),
    ("linear.ord", "rot", K.LINEAR_PERMUTATION, None),
    ("linear.ord", "lrev", K.LINEAR_PERMUTATION, None),
    ("linear.ord", "swap_pairs", K.LINEAR_PERMUTATION, None),
]


@pytest.mark.parametrize("path,decl,kind,mode", CLEAN, ids=[f"{k.value}-{d}" for _, d, k, _ in CLEAN])
def test_theorem_holds(path, decl, kind, mode):
    max_len = 7 if kind in (K.TREE_INORDER, K.TREE_PREORDER, K.TREE_POSTORDER) else 6
    report = run_theorem(TheoremSpec(kind, mode), load(path), decl, trials=20, max_len=max_len)
    assert report.typechecked and report.trials == 20
    assert report.clean, report.failures[:3]


def test_unrestricted_pair_order_names_the_function():
    program = load("unrestricted.ord")
    for name in ["first_first", "first_second", "second_first", "second_second"]:
        report = run_theorem(TheoremSpec(K.PAIR_ORDER, Mode.UNRESTRICTED), program, name)
        assert report.clean
        assert report.notes == [f"realizes {name}"]


NEGATIVE = [
    ("negative/reverse_bad.ord", "reverse", K.LIST_IDENTITY, None),
    ("negative/swap_bad.ord", "swap", K.PAIR_ORDER, Mode.ORDERED),
    ("negative/dup_bad.ord", "dup_head", K.LINEAR_PERMUTATION, None),
]


@pytest.mark.parametrize("path,decl,kind,mode", NEGATIVE, ids=[d for _, d, _, _ in NEGATIVE])
def test_negative_controls_fail_to_typecheck_at_the_template(path, decl, kind, mode):
    report = run_theorem(TheoremSpec(kind, mode), load(path), decl)
    assert not report.typechecked and report.trials == 0
    assert not report.clean


def test_linear_swap_is_rejected_when_checked_as_ordered():
    from substruct.check import check_decl
    program = load("linear.ord")
    assert not check_decl(program, program.decl("lswap"), Mode.ORDERED).accepted


def test_wrong_template_is_an_error():
    with pytest.raises(TemplateMismatch):
        run_theorem(TheoremSpec(K.LIST_IDENTITY), load("lists.ord"), "rev")


def test_fold_commutes_with_renaming_atoms():
    program = load("lists.ord")
    fold = erase(link(program, "fold"))
    for n in range(5):
        for prefix in ("v", "u", "zz"):
            atoms = [x for _, x in make_atoms(n, prefix)]
            e = App(App(App(fold, Atom("g")), Atom("b")), value_to_expr(list_value(atoms)))
            assert evaluate(e, heads=["g"]) == expected_fold(atoms)


def test_report_lists_failures():
    """A program that typechecks at a weaker discipline still gets its outputs compared."""
    program = load("linear.ord")
    report = run_theorem(TheoremSpec(K.LINEAR_PERMUTATION), program, "lrev", trials=8, max_len=3)
    assert report.clean
    assert list_items(list_value([a, b])) == [a, b]
