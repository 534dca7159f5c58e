import pytest

from conftest import load
from substruct.errors import OutOfFuel, Stuck
from substruct.evaluate import erase, evaluate, link, run_decl
from substruct.syntax import Atom, Closure, SymApp, VInj, VPair, VUnit, parse_expr
from substruct.theorems import list_items, list_value


def ev(text, fuel=1000, heads=()):
    return evaluate(erase(parse_expr(text)), fuel, heads)


def test_values():
    assert ev("(#a, ())") == VPair(Atom("a"), VUnit())
    assert ev("cons(#a)") == VInj("cons", Atom("a"))
    assert isinstance(ev("\\x. x"), Closure)


def test_beta_and_matches():
    assert ev("(\\x. \\y. (y, x)) #a #b") == VPair(Atom("b"), Atom("a"))
    assert ev("match (#a, #b) ((x, y) => y)") == Atom("b")
    assert ev("match l(#a) {l(x) => (x, x), r(y) => y}") == VPair(Atom("a"), Atom("a"))
    assert ev("match () (() => #z)") == Atom("z")


def test_fuel_counts_applications_and_matches():
    assert ev("(\\x. x) #a", fuel=1) == Atom("a")
    with pytest.raises(OutOfFuel):
        ev("(\\x. x) ((\\y. y) #a)", fuel=1)
    with pytest.raises(OutOfFuel):
        ev("(\\x. x x) (\\x. x x)", fuel=500)


def test_stuck_terms():
    with pytest.raises(Stuck):
        ev("#a #b")
    with pytest.raises(Stuck):
        ev("match #a ((x, y) => x)")
    with pytest.raises(Stuck):
        ev("match l(()) {r(x) => x}")


def test_symbolic_heads_accumulate_arguments():
    assert ev("#g #a #b", heads=("g",)) == SymApp("g", (Atom("a"), Atom("b")))


def test_recursive_declarations():
    p = load("lists.ord")
    xs = list_value([Atom("a1"), Atom("a2"), Atom("a3")])
    assert list_items(run_decl(p, "append", [xs, xs])) == [Atom(f"a{i}") for i in (1, 2, 3, 1, 2, 3)]
    assert list_items(run_decl(p, "rev", [xs])) == [Atom("a3"), Atom("a2"), Atom("a1")]
    assert run_decl(p, "map", [Atom("f"), list_value([Atom("a")])], heads=["f"]) == \
        list_value([SymApp("f", (Atom("a"),))])


def test_linking_closes_declarations():
    from substruct.syntax import free_vars
    p = load("trees.ord")
    for name in p.names():
        assert not free_vars(link(p, name))
