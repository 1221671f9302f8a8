import pytest
from hypothesis import given
from hypothesis import strategies as st

from instances import CONSTANTS, _formula, instances
from relpac.fragments import Example, parse_example, restrict
from relpac.harness import gen_rare_chain
from relpac.logic import (EXISTS, FORALL, And, Atom, Formula, Implies, Literal, Not, ParseError, Predicate,
                          Theory, evaluate, format_formula, format_theory, parse_formula, parse_theory)

SMOKERS = parse_example("domain: alice bob eve\nfr(alice,bob).\nsm(alice).\nsm(eve).")


@st.composite
def formulas(draw, vocab=(Predicate("p", 1), Predicate("q", 2))):
    return _formula(lambda lo, hi: draw(st.integers(lo, hi)), vocab)


def test_parse_smokers_rule():
    theory = parse_theory("forall X, Y: sm(X) & fr(X,Y) -> sm(Y)")
    (f,) = theory.formulas
    assert f.prefix == ((FORALL, "X"), (FORALL, "Y"))
    assert f.matrix == Implies(And((Atom("sm", ("X",)), Atom("fr", ("X", "Y")))), Atom("sm", ("Y",)))
    assert theory.vocabulary == {Predicate("sm", 1), Predicate("fr", 2)}


def test_parse_empty_and_comments():
    assert len(parse_theory("")) == 0
    assert len(parse_theory("# nothing here\n\n   \n")) == 0


def test_parse_existential():
    f = parse_formula("exists X, Y: fr(X,Y)")
    assert f.prefix == ((EXISTS, "X"), (EXISTS, "Y"))
    assert f.constant_free


def test_precedence():
    f = parse_formula("forall X: p(X) | q(X) & !r(X) -> s(X) <-> t(X)")
    assert format_formula(f) == "forall X: p(X) | q(X) & !r(X) -> s(X) <-> t(X)"
    assert type(f.matrix).__name__ == "Iff"
    assert type(f.matrix.lhs).__name__ == "Implies"
    # implication associates to the right
    g = parse_formula("forall X: p(X) -> q(X) -> r(X)")
    assert isinstance(g.matrix.rhs, Implies)


@pytest.mark.parametrize("text, line, column", [
    ("forall X: p(X) &", 1, 17),
    ("forall X p(X)", 1, 10),
    ("forall X: p(X) $ q(X)", 1, 16),
    ("p(X)", 1, 1),
])
def test_syntax_errors_report_position(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_theory(text)
    assert info.value.line == line
    assert info.value.column == column


def test_error_on_later_line():
    with pytest.raises(ParseError) as info:
        parse_theory("forall X: p(X)\n\nforall X: p(X,Y)")
    assert info.value.line == 3


def test_unbound_and_double_binding():
    with pytest.raises(ParseError, match="unbound"):
        parse_formula("forall X: p(X) -> q(Y)")
    with pytest.raises(ParseError, match="twice"):
        parse_formula("forall X, X: p(X)")
    with pytest.raises(ValueError, match="unbound"):
        Formula((), Atom("p", ("X",)))


def test_constant_free_requirement():
    assert not parse_theory("forall X: fr(alice,X) -> !sm(X)").constant_free
    with pytest.raises(ParseError, match="constant-free"):
        parse_theory("forall X: fr(alice,X) -> !sm(X)", require_constant_free=True)


def test_arity_clash_rejected():
    with pytest.raises(ParseError, match="arities"):
        parse_theory("forall X: p(X)\nforall X: p(X,X)")


def test_duplicates_removed_in_order():
    t = parse_theory("forall X: p(X)\nexists X: q(X)\nforall X: p(X)")
    assert [format_formula(f) for f in t] == ["forall X: p(X)", "exists X: q(X)"]


def test_literal_parse():
    lit = Literal.parse("!sm(bob)")
    assert not lit.positive and lit.atom == Atom("sm", ("bob",))
    assert str(-lit) == "sm(bob)"
    with pytest.raises(ValueError):
        Literal.parse("sm(X)")


def test_evaluate_examples():
    assert not evaluate(SMOKERS, parse_formula("forall X: sm(X)"))
    assert evaluate(SMOKERS, parse_formula("exists X, Y: fr(X,Y)"))
    assert evaluate(restrict(SMOKERS, {"alice", "eve"}), parse_formula("forall X: sm(X)"))
    chain = restrict(gen_rare_chain(5), {"c1", "c2"})
    assert not evaluate(chain, parse_formula("forall X, Y: rare(X) & e(X,Y) -> rare(Y)"))


def test_empty_domain():
    empty = Example(frozenset(), frozenset())
    assert evaluate(empty, parse_formula("forall X: p(X)"))
    assert not evaluate(empty, parse_formula("exists X: p(X)"))


def test_constant_outside_domain_rejected():
    with pytest.raises(ValueError, match="outside"):
        evaluate(SMOKERS, parse_formula("forall X: fr(zed,X)"))
    with pytest.raises(ValueError, match="outside"):
        evaluate(SMOKERS, Literal.parse("sm(zed)"))


@given(formulas())
def test_round_trip(f):
    assert parse_formula(format_formula(f)) == f


@given(st.lists(formulas(), max_size=4))
def test_theory_round_trip(fs):
    t = Theory(tuple(fs))
    assert parse_theory(format_theory(t)) == t


@given(instances(), formulas())
def test_double_negation(inst, f):
    twice = Formula(f.prefix, Not(Not(f.matrix)))
    assert evaluate(inst.example, twice) == evaluate(inst.example, f)
    assert evaluate(inst.example, f.negate()) != evaluate(inst.example, f)


@given(instances(), formulas())
def test_quantifier_expansion(inst, f):
    if not f.prefix:
        return
    (quant, var), rest = f.prefix[0], f.prefix[1:]
    parts = []
    for c in inst.example.constants:
        env = {var: c}
        matrix = _substitute(f.matrix, env)
        parts.append(evaluate(inst.example, Formula(rest, matrix)))
    expected = all(parts) if quant == FORALL else any(parts)
    assert evaluate(inst.example, f) == expected


def _substitute(m, env):
    if isinstance(m, Atom):
        return m.substitute(env)
    if isinstance(m, Not):
        return Not(_substitute(m.arg, env))
    if hasattr(m, "args"):
        return type(m)(tuple(_substitute(a, env) for a in m.args))
    return type(m)(_substitute(m.lhs, env), _substitute(m.rhs, env))


@given(instances(), st.sampled_from(CONSTANTS), st.booleans())
def test_closed_world(inst, c, positive):
    if c not in inst.example.domain:
        return
    atom = Atom("p", (c,) * inst.vocab[0].arity) if inst.vocab[0].name == "p" else None
    if atom is None:
        return
    assert evaluate(inst.example, Literal(atom, positive)) == ((atom in inst.example.atoms) == positive)
