"""Worked examples with known answers, run by ``relpac selftest``."""

from __future__ import annotations

from fractions import Fraction

from . import bounds, harness
from .fragments import parse_example, q_exact
from .logic import Literal, Predicate, format_theory, parse_theory
from .masking import Masker, apply_mask, parse_masked
from .reasoner import false_entailed, k_entails, vote_count, voting_entailed_literals, voting_threshold

SMOKERS_EXAMPLE = """\
domain: alice bob eve
fr(alice,bob).
sm(alice).
sm(eve).
"""

FRIENDS_EXAMPLE = """\
domain: alice bob eve
predicates: sm/1
fr(alice,bob).
sm(alice).
"""

FRIENDS_MASK = """\
domain: alice bob eve
fr(alice,bob)
sm(alice)
"""

VOTING_MASK = """\
domain: alice bob eve
fr(alice,bob)
fr(eve,bob)
sm(eve)
"""

VOTING_MASK_AUGMENTED = VOTING_MASK + "sm(alice)\n"


def _row(name, expected, got) -> dict:
    return {"name": name, "expected": str(expected), "got": str(got), "ok": expected == got}


def run_checks() -> list[dict]:
    rows = []
    smokers = parse_example(SMOKERS_EXAMPLE)
    all_smoke = parse_theory("forall X: sm(X)")
    some_friends = parse_theory("exists X, Y: fr(X,Y)")
    rows.append(_row("Q k=1 all smoke", Fraction(2, 3), q_exact(smokers, 1, all_smoke).value))
    rows.append(_row("Q k=2 all smoke", Fraction(1, 3), q_exact(smokers, 2, all_smoke).value))
    rows.append(_row("Q k=2 some friendship", Fraction(1, 3), q_exact(smokers, 2, some_friends).value))

    rule = parse_theory(harness.SMOKERS_RULE)
    bob = Literal.parse("sm(bob)")
    friends_mask = parse_masked(FRIENDS_MASK)
    rows.append(_row("sm(bob) 2-entailed", True, bool(k_entails(friends_mask, rule, 2, bob))))
    rows.append(_row("sm(bob) not 1-entailed", False, bool(k_entails(friends_mask, rule, 1, bob))))

    augmented = parse_masked(VOTING_MASK_AUGMENTED)
    sm = Predicate("sm", 1)
    res = voting_entailed_literals(augmented, rule, 2, Fraction(2, 3), sm)
    rows.append(_row("voting threshold", Fraction(2), res.threshold))
    rows.append(_row("votes for sm(bob), augmented mask", 2, vote_count(augmented, rule, 2, bob)))
    rows.append(_row("sm(bob) voting-entailed", True, bob in res.literals))
    rows.append(_row("votes for sm(bob), stated mask", 1, vote_count(parse_masked(VOTING_MASK), rule, 2, bob)))

    rare = parse_theory(harness.RARE_RULE)
    big = harness.gen_rare_clique(10**6)
    rows.append(_row("rare clique 10^6 Q", Fraction(999998, 10**6), q_exact(big, 2, rare).value))
    clique = harness.gen_rare_clique(100)
    q = q_exact(clique, 2, rare, method="enumerate").value
    rows.append(_row("rare clique 100 Q", 1 - Fraction(99, 4950), q))
    masked = apply_mask(Masker("positive-only"), clique)
    rare_p = Predicate("rare", 1)
    rows.append(_row("rare clique 100 |F|", 99, len(false_entailed(clique, masked, rare, 2, rare_p))))
    rows.append(_row("rare clique 100 worst-case bound", 400.0,
                     round(bounds.worst_case_k(float(q), 100, 2, 1), 9)))
    rows.append(_row("rare clique 100 voting threshold", Fraction(5), voting_threshold(100, 2, 1, Fraction(1, 20))))

    chain = harness.gen_rare_chain(100)
    chain_rule = parse_theory(harness.CHAIN_RULE)
    rows.append(_row("rare chain 100 Q", 1 - Fraction(1, 4950), q_exact(chain, 2, chain_rule).value))
    chain_mask = apply_mask(Masker("positive-only"), chain)
    errs = false_entailed(chain, chain_mask, chain_rule, 2, rare_p)
    rows.append(_row("rare chain 100 false literals", "rare(c2)", " ".join(map(str, sorted(errs)))))

    friends = parse_example(FRIENDS_EXAMPLE)
    theory, _ = harness.eliminate_constants(parse_theory("forall X: fr(alice,X) -> !sm(X)"), friends)
    rows.append(_row("constant elimination", "forall X: fr__1_alice(X) -> !sm(X)", format_theory(theory).strip()))
    return rows
