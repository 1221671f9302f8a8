"""Print the worked examples: fragment probabilities, k-entailment, voting, rare clique and chain."""

from fractions import Fraction

from relpac.bounds import worst_case_k
from relpac.fragments import parse_example, q_exact
from relpac.harness import CHAIN_RULE, RARE_RULE, SMOKERS_RULE, gen_rare_chain, gen_rare_clique
from relpac.logic import Literal, Predicate, parse_theory
from relpac.masking import Masker, apply_mask, parse_masked
from relpac.reasoner import false_entailed, k_entails, vote_count, voting_entailed_literals
from relpac.selftest import FRIENDS_MASK, SMOKERS_EXAMPLE, VOTING_MASK, VOTING_MASK_AUGMENTED


def main():
    ex = parse_example(SMOKERS_EXAMPLE)
    for k, text in ((1, "forall X: sm(X)"), (2, "forall X: sm(X)"), (2, "exists X, Y: fr(X,Y)")):
        print(f"Q[k={k}]({text}) = {q_exact(ex, k, parse_theory(text)).value}")

    rule = parse_theory(SMOKERS_RULE)
    bob = Literal.parse("sm(bob)")
    friends = parse_masked(FRIENDS_MASK)
    for k in (1, 2):
        w = k_entails(friends, rule, k, bob)
        print(f"sm(bob) {k}-entailed: {bool(w)}" + (f" via {{{', '.join(w.witness)}}}" if w else ""))

    print(f"votes for sm(bob), stated mask: {vote_count(parse_masked(VOTING_MASK), rule, 2, bob)}")
    res = voting_entailed_literals(parse_masked(VOTING_MASK_AUGMENTED), rule, 2, Fraction(2, 3),
                                   Predicate("sm", 1), positive_only=True)
    print(f"augmented mask: threshold {res.threshold}, accepted "
          + ", ".join(f"{l} ({res.votes[l]})" for l in sorted(res.literals)))

    rare, rare_p = parse_theory(RARE_RULE), Predicate("rare", 1)
    print(f"rare clique, 10^6 constants: Q = {float(q_exact(gen_rare_clique(10**6), 2, rare).value)}")
    clique = gen_rare_clique(100)
    q = q_exact(clique, 2, rare).value
    errs = false_entailed(clique, apply_mask(Masker("positive-only"), clique), rare, 2, rare_p)
    print(f"rare clique, 100 constants: Q = {q}, |F| = {len(errs)}, worst-case bound "
          f"{worst_case_k(float(q), 100, 2, 1):.6g}")
    chain = gen_rare_chain(100)
    errs = false_entailed(chain, apply_mask(Masker("positive-only"), chain), parse_theory(CHAIN_RULE), 2, rare_p)
    print(f"rare chain, 100 constants: |F| = {len(errs)} ({', '.join(map(str, sorted(errs)))})")


if __name__ == "__main__":
    main()
