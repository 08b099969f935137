import itertools

import pytest
from hypothesis import given, settings

from smartpark.formula import Always, And, Atom, Eventually, Next, Not, atoms, parse
from smartpark.oracle import OracleGuardError, holds_on_lasso, oracle_decide

from conftest import formulas

p, q = Atom("p"), Atom("q")


def test_trivial_verdicts():
    assert oracle_decide(And(p, Not(p)), 6, 4) == "Unsat"
    assert oracle_decide(Eventually(p), 6, 4) == "Sat"
    assert oracle_decide(parse("G ~g3 & g3"), 6, 4) == "Unsat"


def test_needs_long_prefix():
    # p must first hold at position 3
    f = And(Not(p), And(Next(Not(p)), And(Next(Next(Not(p))), Next(Next(Next(p))))))
    assert oracle_decide(f, 3, 1) == "Sat"
    assert oracle_decide(f, 2, 1) == "Unsat"


def test_needs_long_period():
    # p, ~p alternating needs a period of two
    f = Always(And(Eventually(p), Eventually(Not(p))))
    assert oracle_decide(f, 1, 2) == "Sat"
    assert oracle_decide(f, 1, 1) == "Unsat"


@pytest.mark.parametrize(
    "text, prefix, loop, expected",
    [
        ("F p", [set(), set()], [{"p"}], True),
        ("F p", [{"p"}], [set()], True),
        ("G F p", [{"p"}], [set()], False),
        ("G F p", [], [set(), {"p"}], True),
        ("F G p", [set()], [{"p"}], True),
        ("G p", [{"p"}], [{"p"}, set()], False),
        ("p -> F q", [{"p"}], [set(), {"q"}], True),
        ("G (p -> F q)", [], [{"p"}, set()], False),
    ],
)
def test_holds_on_lasso(text, prefix, loop, expected):
    assert holds_on_lasso(parse(text), prefix, loop) is expected


def _enumerate(f, max_prefix, max_period):
    names = sorted(atoms(f))
    letters = [set(c) for k in range(len(names) + 1) for c in itertools.combinations(names, k)]
    for u in range(max_prefix + 1):
        for v in range(1, max_period + 1):
            for word in itertools.product(letters, repeat=u + v):
                if holds_on_lasso(f, list(word[:u]), list(word[u:])):
                    return "Sat"
    return "Unsat"


@settings(max_examples=300, deadline=None)
@given(formulas(max_size=6, names=("a", "b"), with_next=True))
def test_vectorised_search_matches_enumeration(f):
    assert oracle_decide(f, 2, 2) == _enumerate(f, 2, 2)


def test_guard():
    f = parse("a & b & c & d & e")
    with pytest.raises(OracleGuardError):
        oracle_decide(f)
    with pytest.raises(OracleGuardError):
        oracle_decide(p, 0, 1)
