import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besynth import ltlf
from besynth.errors import ParseError, UndeclaredAtomError
from besynth.ltlf import (FALSE, TRUE, Always, And, Atom, Eventually, FluentSet, Implies, Next,
                          Not, Or, Until, WeakNext, desugar, evaluate, parse, size)

from helpers import all_traces, formulas, random_formula

p, q, r = Atom("p"), Atom("q"), Atom("r")
CORE = (type(TRUE), type(FALSE), Atom, Not, And, Next, Until)


def test_parse_eventually():
    assert parse("F(p)", ["p"]) is Eventually(p)


def test_parse_until_with_parenthesized_conjunction():
    assert parse("p U (q & X p)", ["p", "q"]) is Until(p, And(q, Next(p)))


def test_undeclared_atom_names_token():
    with pytest.raises(UndeclaredAtomError) as info:
        parse("F(r)", ["p", "q"])
    assert info.value.token == "r"
    assert info.value.position == 2


@pytest.mark.parametrize("text", ["", "p &", "(p", "p q", "X", "p U", "& p", "p -> -> q", "#"])
def test_syntax_errors_carry_position(text):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.position >= 0


@pytest.mark.parametrize("text, expected", [
    ("!p & q", And(Not(p), q)),
    ("p & q | r", Or(And(p, q), r)),
    ("p | q -> r", Implies(Or(p, q), r)),
    ("p -> q -> r", Implies(p, Implies(q, r))),
    ("p U q U r", Until(p, Until(q, r))),
    ("p U q & r", And(Until(p, q), r)),
    ("X p U q", Until(Next(p), q)),
    ("WX !p", WeakNext(Not(p))),
    ("G F p", Always(Eventually(p))),
    ("true U false", Until(TRUE, FALSE)),
    ("WXp", Atom("WXp")),
])
def test_precedence(text, expected):
    assert parse(text) is expected


def test_printer_is_fully_parenthesized():
    assert str(parse("p & q | r")) == "((p & q) | r)"
    assert str(parse("!(p U q)")) == "!(p U q)"


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_round_trip(f):
    assert parse(str(f), ["p", "q", "r"]) is f


def test_hash_consing_identity():
    assert And(p, q) is And(Atom("p"), Atom("q"))
    assert And(p, q) != And(q, p)


def test_desugar_examples():
    assert desugar(Eventually(p)) is Until(TRUE, p)
    assert desugar(WeakNext(p)) is Not(Next(Not(p)))
    assert desugar(p) is p


def _uses_core_only(f):
    return all(isinstance(g, CORE) for g in ltlf.subformulas(f))


def test_desugar_soundness_exhaustive():
    rng = random.Random(11)
    traces = list(all_traces(["p", "q", "r"], 4))
    for _ in range(40):
        f = random_formula(rng, ["p", "q", "r"])
        g = desugar(f)
        assert _uses_core_only(g)
        for t in traces:
            assert evaluate(f, t) == evaluate(g, t), (f, t)


@pytest.mark.parametrize("f, trace, expected", [
    (p, [{"p"}], True),
    (Next(p), [{"p"}], False),
    (Until(p, q), [{"p"}, {"p"}, {"q"}], True),
    (Until(p, q), [{"p"}, set(), {"q"}], False),
    (WeakNext(FALSE), [{"p"}], True),
    (Next(TRUE), [set()], False),
    (Always(p), [{"p"}, {"p"}], True),
    (Eventually(q), [{"p"}, {"p"}], False),
])
def test_evaluate_examples(f, trace, expected):
    assert evaluate(f, trace, 0) is expected


@settings(max_examples=200, deadline=None)
@given(formulas(), st.lists(st.frozensets(st.sampled_from("pqr")), min_size=1, max_size=5))
def test_weak_next_holds_at_last_instant(f, trace):
    assert evaluate(WeakNext(f), trace, len(trace) - 1)
    assert not evaluate(Next(f), trace, len(trace) - 1)


@settings(max_examples=200, deadline=None)
@given(formulas(), st.lists(st.frozensets(st.sampled_from("pqr")), min_size=2, max_size=5),
       st.data())
def test_evaluate_ignores_earlier_instants(f, trace, data):
    i = data.draw(st.integers(0, len(trace) - 1))
    mangled = [frozenset({"p", "q", "r"}) - s for s in trace[:i]] + trace[i:]
    assert evaluate(f, trace, i) == evaluate(f, mangled, i)


def test_evaluate_rejects_bad_instants():
    with pytest.raises(IndexError):
        evaluate(p, [{"p"}], 1)
    with pytest.raises(ValueError):
        evaluate(p, [], 0)


@pytest.mark.parametrize("f, n", [(p, 1), (Until(p, p), 2), (And(p, Not(p)), 3)])
def test_size(f, n):
    assert size(f) == n


def test_fluent_set():
    fs = FluentSet(["p", "q"])
    assert fs.index("q") == 1
    assert fs.names_of(fs.mask(["q"])) == {"q"}
    assert len(list(fs.assignments())) == 4
    with pytest.raises(ValueError):
        FluentSet(["p", "p"])
    with pytest.raises(ValueError):
        FluentSet(["bad name"])
