"""Random small instances and a brute-force entailment oracle for the tests.

The oracle enumerates every truth assignment to the ground atoms over a
candidate constant set and evaluates formulas on all of them at once with
numpy.  It shares only the AST classes with the package.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from relpac.fragments import Example
from relpac.logic import EXISTS, FORALL, And, Atom, Formula, Iff, Implies, Literal, Not, Or, Predicate, Theory
from relpac.masking import MaskedExample

CONSTANTS = ("a", "b", "c", "d", "e")
VARIABLES = ("X", "Y", "Z")


@dataclass
class Instance:
    example: Example
    masked: MaskedExample
    theory: Theory
    vocab: tuple[Predicate, ...]
    target: Predicate
    k: int


def build_instance(pick, max_domain: int = 5, max_arity: int = 2, max_k: int = 2) -> Instance:
    """``pick(lo, hi)`` returns an int in [lo, hi]; drives every random choice."""
    size = pick(1, max_domain)
    domain = CONSTANTS[:size]
    npred = pick(1, 2)
    vocab = tuple(Predicate(name, pick(1, max_arity)) for name in ("p", "q")[:npred])
    atoms = set()
    density = pick(1, 4)
    for p in vocab:
        for args in itertools.product(domain, repeat=p.arity):
            if pick(1, 6) <= density:
                atoms.add(Atom(p.name, args))
    example = Example(frozenset(domain), frozenset(atoms), frozenset(vocab))
    keep = pick(0, 4)
    lits = []
    for p in vocab:
        for args in itertools.product(domain, repeat=p.arity):
            if pick(1, 4) <= keep:
                atom = Atom(p.name, args)
                lits.append(Literal(atom, atom in atoms))
    masked = MaskedExample(frozenset(domain), frozenset(lits))
    formulas = [_formula(pick, vocab) for _ in range(pick(0, 2))]
    theory = Theory(tuple(formulas))
    target = vocab[pick(0, len(vocab) - 1)]
    k = pick(max(1, target.arity), max(max_k, target.arity))
    return Instance(example, masked, theory, vocab, target, k)


def _formula(pick, vocab) -> Formula:
    nvars = pick(1, 2)
    names = VARIABLES[:nvars]
    prefix = tuple((FORALL if pick(0, 2) else EXISTS, v) for v in names)
    matrix = _matrix(pick, vocab, names, depth=pick(0, 2))
    used = {v for a in _atoms(matrix) for v in a.args}
    prefix = tuple(q for q in prefix if q[1] in used)
    return Formula(prefix, matrix)


def _matrix(pick, vocab, names, depth):
    if depth == 0 or pick(0, 3) == 0:
        p = vocab[pick(0, len(vocab) - 1)]
        atom = Atom(p.name, tuple(names[pick(0, len(names) - 1)] for _ in range(p.arity)))
        return Not(atom) if pick(0, 2) == 0 else atom
    kind = pick(0, 4)
    lhs = _matrix(pick, vocab, names, depth - 1)
    rhs = _matrix(pick, vocab, names, depth - 1)
    if kind == 0:
        return And((lhs, rhs))
    if kind == 1:
        return Or((lhs, rhs))
    if kind in (2, 3):
        return Implies(lhs, rhs)
    return Iff(lhs, rhs)


def _atoms(m):
    if isinstance(m, Atom):
        yield m
    elif isinstance(m, Not):
        yield from _atoms(m.arg)
    elif isinstance(m, (And, Or)):
        for a in m.args:
            yield from _atoms(a)
    else:
        yield from _atoms(m.lhs)
        yield from _atoms(m.rhs)


def random_instance(seed: int, **kw) -> Instance:
    rng = random.Random(seed)
    return build_instance(rng.randint, **kw)


@st.composite
def instances(draw, max_domain: int = 5, max_arity: int = 2, max_k: int = 2):
    return build_instance(lambda lo, hi: draw(st.integers(lo, hi)), max_domain, max_arity, max_k)


# ---------------------------------------------------------------------------
# oracle


def _eval(m, env, col, grid):
    if isinstance(m, Atom):
        return grid[:, col[Atom(m.pred, tuple(env.get(a, a) for a in m.args))]]
    if isinstance(m, Not):
        return ~_eval(m.arg, env, col, grid)
    if isinstance(m, And):
        out = _eval(m.args[0], env, col, grid)
        for a in m.args[1:]:
            out = out & _eval(a, env, col, grid)
        return out
    if isinstance(m, Or):
        out = _eval(m.args[0], env, col, grid)
        for a in m.args[1:]:
            out = out | _eval(a, env, col, grid)
        return out
    if isinstance(m, Implies):
        return ~_eval(m.lhs, env, col, grid) | _eval(m.rhs, env, col, grid)
    return _eval(m.lhs, env, col, grid) == _eval(m.rhs, env, col, grid)


def _eval_formula(prefix, matrix, universe, env, col, grid):
    if not prefix:
        return _eval(matrix, env, col, grid)
    quant, var = prefix[0]
    out = np.full(grid.shape[0], quant == FORALL)
    for c in universe:
        sub = _eval_formula(prefix[1:], matrix, universe, {**env, var: c}, col, grid)
        out = out & sub if quant == FORALL else out | sub
    return out


def models(theory: Theory, masked: MaskedExample, universe, vocab):
    """Column index of every ground atom over ``universe`` and the satisfying assignments."""
    universe = tuple(sorted(universe))
    atoms = [Atom(p.name, args) for p in sorted(vocab) for args in itertools.product(universe, repeat=p.arity)]
    col = {a: i for i, a in enumerate(atoms)}
    n = len(atoms)
    grid = ((np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
    ok = np.ones(2 ** n, dtype=bool)
    for lit in masked.literals:
        if set(lit.args) <= set(universe):
            ok &= grid[:, col[lit.atom]] == lit.positive
    for f in theory.formulas:
        ok &= _eval_formula(f.prefix, f.matrix, universe, {}, col, grid)
    return col, grid[ok]


def oracle_entailed(theory, masked, universe, vocab) -> set[Literal]:
    """Literals over ``universe`` true in every model, if there is a model."""
    col, sat = models(theory, masked, universe, vocab)
    if len(sat) == 0:
        return set()
    out = set()
    for atom, i in col.items():
        column = sat[:, i]
        if column.all():
            out.add(Literal(atom, True))
        elif not column.any():
            out.add(Literal(atom, False))
    return out


def _all_vocab(inst: Instance):
    return set(inst.vocab) | set(inst.theory.vocabulary)


def oracle_k_entailed(inst: Instance, masked=None, k=None) -> dict[Literal, bool]:
    """k-entailment of every target literal over the masked domain."""
    masked = inst.masked if masked is None else masked
    k = inst.k if k is None else k
    vocab = _all_vocab(inst)
    domain = sorted(masked.domain)
    found: set[Literal] = set()
    for size in range(0, min(k, len(domain)) + 1):
        for cs in itertools.combinations(domain, size):
            found |= oracle_entailed(inst.theory, masked, cs, vocab)
    out = {}
    for args in itertools.product(domain, repeat=inst.target.arity):
        for sign in (True, False):
            lit = Literal(Atom(inst.target.name, args), sign)
            if len(set(args)) <= k:
                out[lit] = lit in found
    return out


def oracle_votes(inst: Instance, masked=None, k=None) -> dict[Literal, int]:
    from relpac.masking import mask_restrict

    masked = inst.masked if masked is None else masked
    k = inst.k if k is None else k
    votes: dict[Literal, int] = {}
    for s in itertools.combinations(sorted(masked.domain), k):
        for lit, ok in oracle_k_entailed(inst, mask_restrict(masked, s), k).items():
            if ok:
                votes[lit] = votes.get(lit, 0) + 1
    return votes


def oracle_voting(inst: Instance, gamma: Fraction) -> set[Literal]:
    n = len(inst.masked.domain)
    threshold = max(Fraction(1), gamma * n ** (inst.k - inst.target.arity))
    return {l for l, v in oracle_votes(inst).items() if v >= threshold}
