"""k-entailment and voting entailment over masked examples.

For a candidate constant set C' the theory is grounded over C' only
(domain closure) together with the masked literals mentioning nothing
outside C'.  Because theories are constant-free, the result depends only
on |C'| and on the positional pattern of the masked literals, which is
what :class:`Engine` caches.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .fragments import Example
from .logic import Atom, Literal, Predicate, Theory
from .masking import MaskedExample, mask_restrict
from .sat import CNFBuilder, solve

PosLit = tuple[str, tuple[int, ...], bool]


@dataclass
class GroundProblem:
    """CNF over ground atoms for a theory grounded over ``universe`` plus unit evidence."""

    universe: tuple[str, ...]
    clauses: list[list[int]]
    atom_vars: dict[Atom, int]


def ground(theory: Theory, universe: Sequence[str], evidence: Iterable[Literal] = ()) -> GroundProblem:
    builder = CNFBuilder()
    universe = tuple(universe)
    for f in theory.formulas:
        builder.assert_formula(f, universe)
    for lit in evidence:
        v = builder.atom(lit.atom)
        builder.clauses.append([v if lit.positive else -v])
    return GroundProblem(universe, builder.clauses, builder.atom_vars)


class Engine:
    """Cached ground reasoning for one constant-free theory."""

    def __init__(self, theory: Theory):
        if not theory.constant_free:
            raise ValueError("the reasoner needs a constant-free theory; eliminate constants first")
        self.theory = theory
        self._templates: dict[int, tuple[list[list[int]], dict[Atom, int]]] = {}
        self._closures: dict[tuple[int, frozenset], frozenset[PosLit] | None] = {}

    def _template(self, m: int):
        t = self._templates.get(m)
        if t is None:
            g = ground(self.theory, [str(i) for i in range(m)])
            t = self._templates[m] = (g.clauses, g.atom_vars)
        return t

    def closure(self, m: int, evidence: frozenset[PosLit]) -> frozenset[PosLit] | None:
        """All literals entailed over positions 0..m-1, or None if inconsistent.

        Literals on atoms the grounding never mentions are entailed only
        when they are evidence themselves.
        """
        key = (m, evidence)
        if key in self._closures:
            return self._closures[key]
        clauses, atom_vars = self._template(m)
        var_of = {a: v for a, v in atom_vars.items()}
        units = []
        for pred, pos, sign in evidence:
            v = var_of.get(Atom(pred, tuple(str(i) for i in pos)))
            if v is not None:
                units.append(v if sign else -v)
        model = solve(clauses, units)
        if model is None:
            self._closures[key] = None
            return None
        candidates = {v: model.get(v, False) for v in atom_vars.values()}
        entailed = set()
        for atom, v in sorted(atom_vars.items(), key=lambda kv: kv[1]):
            if v not in candidates:
                continue
            value = candidates[v]
            counter = solve(clauses, units + [-v if value else v])
            if counter is None:
                entailed.add((atom.pred, tuple(int(a) for a in atom.args), value))
            else:
                for w in list(candidates):
                    if counter.get(w, False) != candidates[w]:
                        del candidates[w]
            candidates.pop(v, None)
        entailed.update(evidence)
        result = frozenset(entailed)
        self._closures[key] = result
        return result


@lru_cache(maxsize=64)
def engine_for(theory: Theory) -> Engine:
    return Engine(theory)


class _Index:
    """Masked literals grouped by the sorted tuple of constants they mention."""

    def __init__(self, masked: MaskedExample):
        self.masked = masked
        self.by_key: dict[tuple[str, ...], list[Literal]] = {}
        for lit in masked.literals:
            self.by_key.setdefault(tuple(sorted(set(lit.args))), []).append(lit)
        self._memo: dict[tuple[str, ...], frozenset[Literal] | None] = {}

    def closure(self, engine: Engine, universe: tuple[str, ...]) -> frozenset[Literal] | None:
        """Entailed ground literals over a sorted universe (None if inconsistent)."""
        if universe in self._memo:
            return self._memo[universe]
        pos = {c: i for i, c in enumerate(universe)}
        evidence = []
        for r in range(len(universe) + 1):
            for sub in itertools.combinations(universe, r):
                for lit in self.by_key.get(sub, ()):
                    evidence.append((lit.pred, tuple(pos[c] for c in lit.args), lit.positive))
        ent = engine.closure(len(universe), frozenset(evidence))
        out = None if ent is None else frozenset(
            Literal(Atom(p, tuple(universe[i] for i in args)), s) for p, args, s in ent)
        self._memo[universe] = out
        return out


def _universe(masked: MaskedExample, universe: Iterable[str]) -> tuple[str, ...]:
    u = tuple(sorted(set(universe)))
    if not set(u) <= masked.domain:
        raise ValueError(f"universe not within the domain: {', '.join(sorted(set(u) - masked.domain))}")
    return u


def consistent(masked: MaskedExample, theory: Theory, universe: Iterable[str]) -> bool:
    u = _universe(masked, universe)
    restricted = mask_restrict(masked, u)
    return _Index(restricted).closure(engine_for(theory), u) is not None


def entails(masked: MaskedExample, theory: Theory, universe: Iterable[str], literal: Literal) -> bool:
    """Classical entailment of a ground literal from the theory grounded over
    ``universe`` plus the masked literals restricted to it."""
    u = _universe(masked, universe)
    if not literal.constants() <= set(u):
        raise ValueError(f"{literal} mentions constants outside the universe")
    ent = _Index(mask_restrict(masked, u)).closure(engine_for(theory), u)
    return ent is None or literal in ent


@dataclass(frozen=True)
class Witnessed:
    entailed: bool
    witness: tuple[str, ...] | None = None

    def __bool__(self):
        return self.entailed


@dataclass
class EntailmentResult:
    target: Predicate
    mode: str
    k: int
    gamma: Fraction | None = None
    witnesses: dict[Literal, tuple[str, ...]] = field(default_factory=dict)
    votes: dict[Literal, int] = field(default_factory=dict)
    threshold: Fraction | None = None

    @property
    def literals(self) -> frozenset[Literal]:
        return frozenset(self.votes if self.mode == "vote" else self.witnesses)

    def __len__(self):
        return len(self.literals)

    def __iter__(self):
        return iter(sorted(self.literals))


def _smallest(literal_arity: int) -> int:
    return 0 if literal_arity == 0 else 1


def k_entails(masked: MaskedExample, theory: Theory, k: int, literal: Literal) -> Witnessed:
    """Search C' by increasing size, lexicographically, for a consistent witness."""
    need = tuple(sorted(literal.constants()))
    if len(need) > k:
        raise ValueError(f"{literal} mentions {len(need)} constants but k={k}")
    if not set(need) <= masked.domain:
        raise ValueError(f"{literal} mentions constants outside the domain")
    engine = engine_for(theory)
    index = _Index(masked)
    others = [c for c in masked.constants if c not in need]
    for size in range(len(need), k + 1):
        for extra in itertools.combinations(others, size - len(need)):
            u = tuple(sorted(need + extra))
            ent = index.closure(engine, u)
            if ent is not None and literal in ent:
                return Witnessed(True, u)
    return Witnessed(False)


def _check_target(target: Predicate, k: int) -> None:
    if target.arity > k:
        raise ValueError(f"target arity {target.arity} exceeds k={k}")


def k_entailed_literals(masked: MaskedExample, theory: Theory, k: int, target: Predicate,
                        positive_only: bool = False) -> EntailmentResult:
    _check_target(target, k)
    engine = engine_for(theory)
    index = _Index(masked)
    result = EntailmentResult(target, "k", k)
    for size in range(_smallest(target.arity), min(k, len(masked.domain)) + 1):
        for u in itertools.combinations(masked.constants, size):
            ent = index.closure(engine, u)
            if ent is None:
                continue
            for lit in ent:
                if lit.pred == target.name and len(lit.args) == target.arity and (
                        lit.positive or not positive_only):
                    result.witnesses.setdefault(lit, u)
    return result


def _fragment_literals(index: _Index, engine: Engine, s: tuple[str, ...], target: Predicate,
                       positive_only: bool) -> set[Literal]:
    """Target literals k-entailed when the constant pool is exactly ``s``."""
    out = set()
    for size in range(_smallest(target.arity), len(s) + 1):
        for u in itertools.combinations(s, size):
            ent = index.closure(engine, u)
            if ent is None:
                continue
            out.update(l for l in ent if l.pred == target.name and len(l.args) == target.arity
                       and (l.positive or not positive_only))
    return out


def _check_vote_k(masked: MaskedExample, k: int) -> None:
    if k > len(masked.domain):
        raise ValueError(f"k={k} exceeds the domain size {len(masked.domain)}")


def vote_count(masked: MaskedExample, theory: Theory, k: int, literal: Literal) -> int:
    """Number of size-k sets S (necessarily containing const(l)) whose fragment k-entails l."""
    _check_vote_k(masked, k)
    need = tuple(sorted(literal.constants()))
    if len(need) > k:
        raise ValueError(f"{literal} mentions {len(need)} constants but k={k}")
    engine = engine_for(theory)
    index = _Index(masked)
    others = [c for c in masked.constants if c not in need]
    votes = 0
    for extra in itertools.combinations(others, k - len(need)):
        s = tuple(sorted(need + extra))
        # only sub-pools containing const(l) can entail l
        rest = [c for c in s if c not in need]
        for r in range(len(rest) + 1):
            hit = False
            for add in itertools.combinations(rest, r):
                ent = index.closure(engine, tuple(sorted(need + add)))
                if ent is not None and literal in ent:
                    hit = True
                    break
            if hit:
                votes += 1
                break
    return votes


def vote_counts(masked: MaskedExample, theory: Theory, k: int, target: Predicate,
                positive_only: bool = False) -> dict[Literal, int]:
    """Votes for every target literal with at least one vote."""
    _check_target(target, k)
    _check_vote_k(masked, k)
    engine = engine_for(theory)
    index = _Index(masked)
    counts: Counter[Literal] = Counter()
    for s in itertools.combinations(masked.constants, k):
        counts.update(_fragment_literals(index, engine, s, target, positive_only))
    return dict(counts)


def voting_threshold(domain_size: int, k: int, arity: int, gamma) -> Fraction:
    return max(Fraction(1), Fraction(gamma) * domain_size ** (k - arity))


def voting_entailed_literals(masked: MaskedExample, theory: Theory, k: int, gamma, target: Predicate,
                             positive_only: bool = False) -> EntailmentResult:
    g = Fraction(gamma)
    if not 0 <= g <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    counts = vote_counts(masked, theory, k, target, positive_only)
    threshold = voting_threshold(len(masked.domain), k, target.arity, g)
    result = EntailmentResult(target, "vote", k, gamma=g, threshold=threshold)
    result.votes = {l: c for l, c in sorted(counts.items()) if c >= threshold}
    return result


def is_true(example: Example, literal: Literal) -> bool:
    return (literal.atom in example.atoms) == literal.positive


def false_entailed(example: Example, masked: MaskedExample, theory: Theory, k: int, target: Predicate,
                   gamma=None, positive_only: bool = False) -> frozenset[Literal]:
    """Entailed target literals that are false in the complete example (the error set)."""
    if example.domain != masked.domain:
        raise ValueError("the masked example and the example have different domains")
    if gamma is None:
        res = k_entailed_literals(masked, theory, k, target, positive_only)
    else:
        res = voting_entailed_literals(masked, theory, k, gamma, target, positive_only)
    return frozenset(l for l in res.literals if not is_true(example, l))
