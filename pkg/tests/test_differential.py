"""The substitution evaluator against the environment-based reference."""

import random

from hypothesis import given, settings

from reference_interp import reference_eval
from strategies import exprs
from substruct.errors import EvalError, OutOfFuel, Stuck
from substruct.evaluate import erase, evaluate, link
from substruct.syntax import (
    App, Atom, Forall, Fuse, Lolli, Named, Over, Sum, TVar, Twist, UArrow, Under, Unit, VInj, VPair, VUnit,
    alpha_equal, value_to_expr,
)
from substruct.theorems import list_value, make_atoms, random_shape, tree_value


def outcome(run):
    try:
        return ("value", run())
    except OutOfFuel:
        return ("fuel", None)
    except Stuck:
        return ("stuck", None)
    except EvalError:
        return ("error", None)


def agree(e, fuel, heads=()):
    mine = outcome(lambda: evaluate(e, fuel, heads))
    ref = outcome(lambda: reference_eval(e, fuel, heads))
    assert mine[0] == ref[0], (mine, ref)
    if mine[0] == "value":
        assert alpha_equal(mine[1], ref[1]), (mine[1], ref[1])
    return mine


def sample(t, program, rng):
    """A small value of type `t`; function arguments become the head atom `f`."""
    atoms = [x for _, x in make_atoms(3)]
    match t:
        case TVar():
            return rng.choice(atoms)
        case Unit():
            return VUnit()
        case Fuse(a, b) | Twist(a, b):
            return VPair(sample(a, program, rng), sample(b, program, rng))
        case Sum(alts):
            label, a = rng.choice(alts)
            return VInj(label, sample(a, program, rng))
        case Named(name, _) if "tree" in name:
            layout = "xlr" if name.startswith("x") else "lxr"
            return tree_value(random_shape(3, rng), atoms, layout)
        case Named():
            return list_value(atoms[: rng.randint(0, 3)])
    return Atom("f")


def sample_arguments(decl, program, rng):
    t = decl.type
    while isinstance(t, Forall):
        t = t.body
    args = []
    while isinstance(t, (Over, Under, Lolli, UArrow)):
        args.append(sample(t.arg, program, rng))
        t = t.result
    return args


def test_corpus_programs(corpus):
    rng = random.Random(0)
    outcomes = []
    for program in corpus.values():
        for d in program.decls:
            e = erase(link(program, d.name))
            agree(e, 10_000)
            for _ in range(3):
                applied = e
                for a in sample_arguments(d, program, rng):
                    applied = App(applied, value_to_expr(a))
                for fuel in (3, 40, 100_000):
                    kind, _ = agree(applied, fuel, heads=("f",))
                outcomes.append(kind)
    assert len(outcomes) >= 90
    assert outcomes.count("value") == len(outcomes)


@settings(max_examples=500, deadline=None)
@given(exprs(depth=5))
def test_generated_terms(e):
    for fuel in (2, 10, 200):
        agree(e, fuel, heads=("p",))
