import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from instances import instances
from relpac.fragments import (Example, FragmentCounter, format_example, parse_example, q_exact, q_monte_carlo,
                              restrict)
from relpac.harness import CHAIN_RULE, RARE_RULE, gen_rare_chain, gen_rare_clique
from relpac.logic import Atom, ParseError, Theory, evaluate, evaluate_theory, parse_theory

SMOKERS = parse_example("domain: alice bob eve\nfr(alice,bob).\nsm(alice).\nsm(eve).")
ALL_SMOKE = parse_theory("forall X: sm(X)")
SOME_FRIENDS = parse_theory("exists X, Y: fr(X,Y)")


def brute_q(example, k, theory):
    subsets = list(itertools.combinations(example.constants, k))
    good = sum(evaluate_theory(restrict(example, s), theory) for s in subsets)
    return Fraction(good, len(subsets))


@pytest.mark.parametrize("method", ["types", "enumerate"])
def test_smokers_values(method):
    assert q_exact(SMOKERS, 1, ALL_SMOKE, method=method).value == Fraction(2, 3)
    assert q_exact(SMOKERS, 2, ALL_SMOKE, method=method).value == Fraction(1, 3)
    est = q_exact(SMOKERS, 2, SOME_FRIENDS)
    assert est.value == Fraction(1, 3)
    assert (est.numerator, est.denominator, est.mode) == (1, 3, "exact")


def test_restrict():
    frag = restrict(SMOKERS, {"alice", "eve"})
    assert frag.atoms == {Atom("sm", ("alice",)), Atom("sm", ("eve",))}
    assert frag.subset == {"alice", "eve"} and frag.parent == SMOKERS.digest
    assert restrict(SMOKERS, SMOKERS.domain) == SMOKERS
    assert len(restrict(gen_rare_chain(5), {"c2", "c4"}).atoms) == 0
    with pytest.raises(ValueError):
        restrict(SMOKERS, {"zed"})


def test_rare_clique_values():
    rule = parse_theory(RARE_RULE)
    clique = gen_rare_clique(100)
    expected = 1 - Fraction(99, 4950)
    assert q_exact(clique, 2, rule, method="enumerate").value == expected
    assert q_exact(clique, 2, rule, method="types").value == expected
    assert brute_q(clique, 2, rule) == expected


def test_paper_scale_closed_form():
    q = q_exact(gen_rare_clique(10**6), 2, parse_theory(RARE_RULE))
    # 1 - 999999 / (0.5 * 10**6 * 999999)
    assert q.value == 1 - Fraction(999999, 10**6 * 999999 // 2)
    assert q.value == Fraction("0.999998")
    assert q.denominator == math.comb(10**6, 2)


def test_rare_chain_value():
    assert q_exact(gen_rare_chain(100), 2, parse_theory(CHAIN_RULE)).value == 1 - Fraction(1, 4950)


def test_errors():
    with pytest.raises(ValueError, match="exceeds"):
        q_exact(SMOKERS, 4, ALL_SMOKE)
    with pytest.raises(ValueError, match="constant-free"):
        q_exact(SMOKERS, 1, parse_theory("forall X: fr(alice,X)"))
    with pytest.raises(ValueError, match="budget"):
        q_exact(gen_rare_chain(200), 2, parse_theory(CHAIN_RULE), budget=1000)
    with pytest.raises(ValueError):
        q_monte_carlo(SMOKERS, 1, ALL_SMOKE, 0, 1)


def test_monte_carlo_examples():
    est = q_monte_carlo(SMOKERS, 2, ALL_SMOKE, 30000, 12)
    assert abs(est.value - 1 / 3) <= 0.02
    assert est.trials == 30000 and est.mode == "monte-carlo"
    assert q_monte_carlo(SMOKERS, 1, parse_theory("forall X: sm(X) | !sm(X)"), 500, 3).value == 1
    assert q_monte_carlo(SMOKERS, 3, ALL_SMOKE, 50, 3).value == 0
    assert q_monte_carlo(SMOKERS, 2, ALL_SMOKE, 1000, 4) == q_monte_carlo(SMOKERS, 2, ALL_SMOKE, 1000, 4)


def test_monte_carlo_hoeffding_coverage():
    example = gen_rare_chain(30)
    theory = parse_theory(CHAIN_RULE + "\nexists X: !rare(X)")
    exact = float(q_exact(example, 3, theory).value)
    trials = 2000
    radius = math.sqrt(math.log(2 / 0.01) / (2 * trials))
    hits = sum(abs(q_monte_carlo(example, 3, theory, trials, seed).value - exact) <= radius for seed in range(200))
    assert hits >= 198


@given(instances(max_arity=1), st.integers(0, 5))
def test_types_agree_with_enumeration(inst, k):
    if k > len(inst.example.domain):
        return
    a = q_exact(inst.example, k, inst.theory, method="types").value
    b = q_exact(inst.example, k, inst.theory, method="enumerate").value
    assert a == b == brute_q(inst.example, k, inst.theory)


@given(instances(), st.integers(0, 5))
def test_q_matches_definition(inst, k):
    if k > len(inst.example.domain):
        return
    q = q_exact(inst.example, k, inst.theory).value
    assert 0 <= q <= 1
    assert q == brute_q(inst.example, k, inst.theory)
    for f in inst.theory:
        assert q <= q_exact(inst.example, k, Theory((f,))).value


@given(instances())
def test_full_domain_is_truth_value(inst):
    n = len(inst.example.domain)
    assert q_exact(inst.example, n, inst.theory).value == int(evaluate_theory(inst.example, inst.theory))


@given(instances(), st.data())
def test_sub_domain_counts(inst, data):
    consts = inst.example.constants
    sub = data.draw(st.lists(st.sampled_from(consts), unique=True, min_size=1))
    k = data.draw(st.integers(0, len(sub)))
    counter = FragmentCounter(inst.example, inst.theory, k)
    assert counter.q(sub) == q_exact(restrict(inst.example, sub), k, inst.theory).value


def test_example_parsing():
    assert parse_example("domain: alice bob eve\nfr(alice,bob).\nsm(alice).\nsm(eve).") == SMOKERS
    one = parse_example("domain: a")
    assert len(one.domain) == 1 and not one.atoms
    chain = gen_rare_chain(5)
    assert parse_example(format_example(chain)) == chain
    assert format_example(chain).splitlines()[:3] == ["domain: c1 c2 c3 c4 c5", "e(c1,c2).", "e(c2,c3)."]


@pytest.mark.parametrize("text, message", [
    ("domain: a\np(b).", "undeclared"),
    ("domain: a\np(a).\np(a,a).", "arity"),
    ("domain: a\ndomain: b", "duplicate"),
    ("p(a).", "domain"),
    ("domain: a\np(a)", "end with"),
    ("domain: a\np(X).", "not ground"),
])
def test_example_parse_errors(text, message):
    with pytest.raises(ParseError, match=message):
        parse_example(text)


@given(instances())
def test_example_round_trip(inst):
    assert parse_example(format_example(inst.example)) == inst.example


def test_declared_predicates_survive_round_trip():
    ex = Example(frozenset({"a"}), frozenset(), frozenset(parse_theory("forall X: sm(X)").vocabulary))
    text = format_example(ex)
    assert "predicates: sm/1" in text
    assert parse_example(text) == ex
