import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from declarative_oracle import oracle_check
from strategies import exprs, types
from substruct.check import accepted_with_dependencies, check_expr, check_program
from substruct.inhabitants import enumerate_inhabitants
from substruct.syntax import Mode, Over, Signature, TVar, Under, parse_expr, parse_program, parse_type

EMPTY = Signature(())

# The example judgments: (context, term, type, accepted in ordered mode).
JUDGMENTS = [
    ("identity at under", [], "\\x. x", "a \\ a", True),
    ("identity at over", [], "\\x. x", "a ->> a", True),
    ("no weakening", [], "\\x. \\y. x", "a ->> b ->> a", False),
    ("no contraction", [], "\\x. (x, x)", "a ->> a * a", False),
    ("pair construction", [], "\\x. \\y. (x, y)", "a ->> b ->> a * b", True),
    ("no exchange", [], "\\x. \\y. (x, y)", "a \\ (b \\ a * b)", False),
    ("associativity", [("f", "b ->> (a \\ c)")], "\\x. \\y. (f y) x", "a \\ (b ->> c)", True),
    ("associativity converse", [("g", "a \\ (b ->> c)")], "\\y. \\x. (g x) y", "b ->> (a \\ c)", True),
    ("currying", [("g", "a * b ->> c")], "\\x. \\y. g (x, y)", "a ->> b ->> c", True),
    ("uncurrying", [("f", "a ->> b ->> c")], "\\p. match p ((x, y) => f x y)", "a * b ->> c", True),
]


def judge(omega, term, type_text, mode=Mode.ORDERED):
    omega = tuple((x, parse_type(t)) for x, t in omega)
    e = parse_expr(term, frozenset(x for x, _ in omega))
    return check_expr(frozenset("abc"), {}, omega, e, parse_type(type_text), mode, EMPTY)


@pytest.mark.parametrize("name,omega,term,ty,expected", JUDGMENTS, ids=[j[0] for j in JUDGMENTS])
def test_example_judgments(name, omega, term, ty, expected):
    assert judge(omega, term, ty).accepted is expected


def test_pairs_reassociate():
    assert judge([], "\\p. match p ((xy, z) => match xy ((x, y) => (x, (y, z))))", "(a * b) * c ->> a * (b * c)").accepted


def test_rejections_name_the_missing_structural_rule():
    assert "no weakening" in str(judge([("x", "a"), ("y", "b")], "x", "a").first_failure)
    assert "no contraction" in str(judge([("x", "a")], "(x, x)", "a * a").first_failure)
    assert "no exchange" in str(judge([("x", "a"), ("y", "b")], "(y, x)", "b * a").first_failure)


def test_modes_add_structural_rules():
    assert judge([("x", "a"), ("y", "b")], "(y, x)", "b * a", Mode.LINEAR).accepted
    assert not judge([("x", "a")], "(x, x)", "a * a", Mode.LINEAR).accepted
    assert judge([("x", "a")], "(x, x)", "a * a", Mode.UNRESTRICTED).accepted
    assert judge([("x", "a"), ("y", "b")], "x", "a", Mode.UNRESTRICTED).accepted
    assert judge([], "\\x. \\y. x", "a -> b -> a", Mode.UNRESTRICTED).accepted
    assert judge([], "\\x. \\y. (y, x)", "a -o a -o a * a", Mode.LINEAR).accepted


def test_under_takes_its_argument_from_the_left():
    assert judge([("x", "a"), ("f", "a \\ b")], "f x", "b").accepted
    assert not judge([("f", "a \\ b"), ("x", "a")], "f x", "b").accepted
    assert judge([("f", "a ->> b"), ("x", "a")], "f x", "b").accepted


def test_twist_reverses_context_order():
    assert judge([("y", "b"), ("x", "a")], "(x, y)", "a % b").accepted
    assert not judge([("x", "a"), ("y", "b")], "(x, y)", "a % b").accepted


def test_unrestricted_arguments_use_no_ordered_resources():
    assert not judge([("f", "a -> b"), ("x", "a")], "f x", "b").accepted


def test_corpus_typechecks(corpus):
    for name, program in corpus.items():
        for decl, verdict in check_program(program):
            assert verdict.accepted, (name, decl, verdict.first_failure)


@pytest.mark.parametrize("path,decl", [("negative/reverse_bad.ord", "reverse"), ("negative/swap_bad.ord", "swap"),
                                       ("negative/dup_bad.ord", "dup_head"), ("negative/drop_bad.ord", "const")])
def test_negative_controls_are_rejected(path, decl):
    from conftest import load
    program = load(path)
    assert not accepted_with_dependencies(program, decl, Mode.ORDERED).accepted


def test_polymorphic_instantiation():
    p = parse_program("def id : all a. a ->> a = \\x. x\n"
                      "def use : all b. b ->> b = \\y. id [b] y\n"
                      "def bad : all b. b ->> b = \\y. id y")
    verdicts = dict(check_program(p))
    assert verdicts["use"].accepted
    assert not verdicts["bad"].accepted


# Agreement with a brute-force declarative checker -------------------------

CONTEXTS = [(), (("x", TVar("a")),), (("x", TVar("a")), ("y", TVar("b"))),
            (("x", TVar("a")), ("y", TVar("a")), ("z", TVar("b")))]


@settings(max_examples=400, deadline=None)
@given(st.sampled_from(CONTEXTS), st.data(), types(max_leaves=5, arrows=()), st.sampled_from([Mode.ORDERED, Mode.LINEAR]))
def test_checker_agrees_with_exhaustive_splitting(omega, data, ty, mode):
    e = data.draw(exprs(tuple(x for x, _ in omega), depth=3, allow_fix=False))
    fast = check_expr(frozenset("abc"), {}, omega, e, ty, mode, EMPTY).accepted
    assert fast == oracle_check((), omega, e, ty, mode)


@pytest.mark.parametrize("mode", [Mode.ORDERED, Mode.LINEAR])
def test_checker_agrees_with_exhaustive_splitting_on_permuted_contexts(mode):
    """Inhabitants of one type, re-checked with their context permuted."""
    ty = parse_type("a ->> b ->> (a * b) * 1")
    terms, _ = enumerate_inhabitants(ty, Mode.LINEAR)
    for e in terms:
        body = e.body.body
        for order in itertools.permutations([(e.binder, TVar("a")), (e.body.binder, TVar("b"))]):
            goal = parse_type("(a * b) * 1")
            fast = check_expr(frozenset("ab"), {}, order, body, goal, mode, EMPTY).accepted
            assert fast == oracle_check((), order, body, goal, mode)


@settings(max_examples=150, deadline=None)
@given(types(max_leaves=5, arrows=(Over, Under)))
def test_checker_agrees_with_exhaustive_splitting_on_enumerated_terms(ty):
    """Terms found with more structural rules, re-checked with fewer."""
    from substruct.inhabitants import SearchBudget
    budget = SearchBudget(6, 14)
    for source in (Mode.LINEAR, Mode.UNRESTRICTED):
        terms, _ = enumerate_inhabitants(ty, source, budget)
        for e in terms[:20]:
            for mode in (Mode.ORDERED, Mode.LINEAR):
                fast = check_expr(frozenset("abc"), {}, (), e, ty, mode, EMPTY).accepted
                assert fast == oracle_check((), (), e, ty, mode), (e, ty, mode)
