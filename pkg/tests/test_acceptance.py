"""Acceptance suite: one test per criterion, each with a wall-clock budget.

Every test prints a single PASS/FAIL line, visible even when pytest
captures output.
"""

import random
import time
from contextlib import contextmanager

import pytest

import test_check
import test_differential
import test_semantics
from conftest import load
from substruct.evaluate import link
from substruct.inhabitants import count_inhabitants
from substruct.semantics import ALGEBRAS, fundamental_smoke
from substruct.syntax import Mode, parse_type
from substruct.theorems import TheoremKind as K, TheoremSpec, run_theorem

TABLE = [
    ("a ->> a", (1, 1, 1)),
    ("a ->> a ->> a", (0, 0, 2)),
    ("a ->> a ->> a * a", (1, 2, 4)),
    ("a ->> (a \\ a * a)", (1, 2, 4)),
    ("a ->> b ->> b * a", (0, 1, 1)),
    ("a ->> b ->> a * b", (1, 1, 1)),
]


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number, title, budget):
        start = time.perf_counter()
        detail = {}
        failure = None
        try:
            yield detail
        except AssertionError as exc:
            failure = exc
        elapsed = time.perf_counter() - start
        passed = failure is None and elapsed < budget
        note = f" ({detail['note']})" if "note" in detail else ""
        with capsys.disabled():
            print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}{note}"
                  f" in {elapsed:.2f}s (budget {budget}s)")
        if failure is not None:
            raise failure
        assert elapsed < budget, f"criterion {number} took {elapsed:.2f}s, budget {budget}s"
    return run


def theorem_clean(kind, program, decl, mode=None, max_len=6):
    report = run_theorem(TheoremSpec(kind, mode), program, decl, trials=20, max_len=max_len)
    assert report.typechecked and report.clean, (decl, report.failures[:3])
    return report


def test_1_example_judgments(criterion):
    with criterion(1, "example judgments accept/reject in ordered mode", 1) as d:
        for name, omega, term, ty, expected in test_check.JUDGMENTS:
            assert test_check.judge(omega, term, ty).accepted is expected, name
        d["note"] = f"{len(test_check.JUDGMENTS)} judgments"


def test_2_counting_table(criterion):
    with criterion(2, "inhabitant counting table", 10) as d:
        for text, counts in TABLE:
            got = tuple(count_inhabitants(parse_type(text), m) for m in Mode)
            assert got == tuple((c, False) for c in counts), (text, got)
        d["note"] = f"{len(TABLE)} rows x 3 modes"


def test_3_smoke_suite(criterion, corpus):
    with criterion(3, "corpus passes the fundamental-theorem smoke test", 30) as d:
        n = 0
        for file, program in corpus.items():
            for decl in program.decls:
                r = fundamental_smoke(link(program, decl.name), decl.type, decl.mode or Mode.ORDERED,
                                      program.signature)
                assert r.verdict == "pass", (file, decl.name, r.trace)
                n += 1
        assert n >= 12
        d["note"] = f"{n} declarations"


def test_4_list_theorems(criterion):
    with criterion(4, "list identity and reversal theorems, reversal rejected at identity", 30) as d:
        lists = load("lists.ord")
        for name in ("id_list", "copy_list", "copy_rlist"):
            theorem_clean(K.LIST_IDENTITY, lists, name)
        for name in ("rev", "rev_back"):
            theorem_clean(K.LIST_REVERSAL, lists, name)
        bad = run_theorem(TheoremSpec(K.LIST_IDENTITY), load("negative/reverse_bad.ord"), "reverse")
        assert not bad.typechecked
        d["note"] = "3 identities, 2 reversals, 1 rejection"


def test_5_fold(criterion):
    with criterion(5, "fold yields right-nested symbolic applications", 10) as d:
        report = theorem_clean(K.FOLD_UNIQUENESS, load("lists.ord"), "fold", max_len=6)
        assert report.trials == 20
        d["note"] = "20 trials, n <= 6"


def test_6_tree_traversals(criterion):
    with criterion(6, "tree traversals match independent oracles", 10) as d:
        trees = load("trees.ord")
        for kind, name in [(K.TREE_INORDER, "inord"), (K.TREE_PREORDER, "preord"), (K.TREE_POSTORDER, "postord")]:
            assert theorem_clean(kind, trees, name, max_len=7).trials == 20
        d["note"] = "3 orders x 20 shapes, up to 7 nodes"


def test_7_linear_theorems(criterion):
    with criterion(7, "linear pair order and permutation; ordered rejects swap", 10) as d:
        linear = load("linear.ord")
        for name in ("lpair", "lswap"):
            theorem_clean(K.PAIR_ORDER, linear, name, Mode.LINEAR)
        spec = TheoremSpec(K.LINEAR_PERMUTATION)
        endos = [x.name for x in linear.decls if spec.matching_template(x.type, linear.signature)]
        assert len(endos) >= 4
        for name in endos:
            theorem_clean(K.LINEAR_PERMUTATION, linear, name)
        swap = run_theorem(TheoremSpec(K.PAIR_ORDER, Mode.ORDERED), load("negative/swap_bad.ord"), "swap")
        assert not swap.typechecked
        d["note"] = f"permutation checked on {', '.join(endos)}"


def test_8_semantics_suite(criterion):
    with criterion(8, "predicate clause examples and monoid laws", 10) as d:
        for example in (
            test_semantics.test_unit_needs_the_empty_resource,
            test_semantics.test_fuse_and_twist_read_the_word_in_opposite_directions,
            test_semantics.test_lists_of_either_direction,
            test_semantics.test_commutative_pair,
            test_semantics.test_functions_are_not_decided_by_structure,
        ):
            example()
        rng = random.Random(0)
        for name, alg in ALGEBRAS.items():
            for _ in range(1000):
                x, y, z = (alg.compose(alg.generator(rng.choice("abc")) for _ in range(rng.randint(0, 4)))
                           for _ in range(3))
                assert alg.eq(alg.op(alg.op(x, y), z), alg.op(x, alg.op(y, z)))
                assert alg.eq(alg.op(alg.unit, x), x) and alg.eq(alg.op(x, alg.unit), x)
                if alg.commutative:
                    assert alg.eq(alg.op(x, y), alg.op(y, x))
        d["note"] = f"5 examples, 1000 triples x {len(ALGEBRAS)} algebras"


def test_9_differential(criterion, corpus):
    with criterion(9, "substitution evaluator agrees with the reference interpreter", 30) as d:
        test_differential.test_corpus_programs(corpus)
        test_differential.test_generated_terms()
        d["note"] = "corpus plus 500 generated terms"
