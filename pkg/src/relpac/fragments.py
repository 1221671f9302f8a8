"""Examples, fragments and the fragment-frequency probability Q."""

from __future__ import annotations

import hashlib
import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .logic import (
    FORALL,
    And,
    Atom,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    ParseError,
    Predicate,
    Theory,
    _strip_comment,
    check_vocabulary,
    holds,
    is_constant,
    parse_atom,
)
from .sampling import Stream

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True, eq=False)
class Example:
    """A complete closed-world description: atoms over a finite constant domain."""

    domain: frozenset[str]
    atoms: frozenset[Atom] = frozenset()
    predicates: frozenset[Predicate] = frozenset()

    def __post_init__(self):
        domain = frozenset(self.domain)
        atoms = frozenset(self.atoms)
        for c in domain:
            if not is_constant(c):
                raise ValueError(f"{c!r} is not a constant")
        preds = set(self.predicates)
        for a in atoms:
            if not a.is_ground:
                raise ValueError(f"atom {a} is not ground")
            if not set(a.args) <= domain:
                missing = sorted(set(a.args) - domain)
                raise ValueError(f"atom {a} uses undeclared constant(s) {', '.join(missing)}")
            preds.add(a.predicate)
        check_vocabulary(preds)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "predicates", frozenset(preds))

    def __eq__(self, other):
        if not isinstance(other, Example):
            return NotImplemented
        return (self.domain, self.atoms, self.predicates) == (
            other.domain, other.atoms, other.predicates)

    def __hash__(self):
        return hash((self.domain, self.atoms))

    @cached_property
    def constants(self) -> tuple[str, ...]:
        return tuple(sorted(self.domain))

    @cached_property
    def index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.constants)}

    @cached_property
    def digest(self) -> str:
        return hashlib.sha256(format_example(self).encode()).hexdigest()[:16]

    def __len__(self):
        return len(self.domain)


@dataclass(frozen=True, eq=False)
class Fragment(Example):
    """Restriction of a parent example to a subset of its constants."""

    parent: str = ""
    subset: frozenset[str] = frozenset()


def restrict(example: Example, subset: Iterable[str]) -> Fragment:
    s = frozenset(subset)
    if not s <= example.domain:
        raise ValueError(f"subset not within the domain: {', '.join(sorted(s - example.domain))}")
    atoms = frozenset(a for a in example.atoms if s.issuperset(a.args))
    return Fragment(s, atoms, example.predicates, parent=example.digest, subset=s)


# ---------------------------------------------------------------------------
# Example file format


def parse_example(text: str) -> Example:
    domain: frozenset[str] | None = None
    declared: list[Predicate] = []
    atoms: list[Atom] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("domain:"):
            if domain is not None:
                raise ParseError("duplicate domain declaration", lineno, 1)
            names = line[len("domain:"):].split()
            for name in names:
                if not is_constant(name) or not name.replace("_", "a").isalnum():
                    raise ParseError(f"invalid constant {name!r}", lineno, 1)
            domain = frozenset(names)
            continue
        if line.startswith("predicates:"):
            try:
                declared.extend(Predicate.parse(p) for p in line[len("predicates:"):].split())
            except ValueError as exc:
                raise ParseError(str(exc), lineno, 1) from exc
            continue
        if domain is None:
            raise ParseError("atoms must follow the domain: line", lineno, 1)
        if not line.endswith("."):
            raise ParseError("atom lines end with '.'", lineno, len(line))
        atom = parse_atom(line[:-1], lineno)
        if not atom.is_ground:
            raise ParseError(f"atom {atom} is not ground", lineno, 1)
        missing = sorted(set(atom.args) - domain)
        if missing:
            raise ParseError(f"atom {atom} uses undeclared constant(s) {', '.join(missing)}", lineno, 1)
        atoms.append(atom)
    if domain is None:
        raise ParseError("missing domain: line")
    preds = set(declared)
    arities = {p.name: p.arity for p in declared}
    for a in atoms:
        if arities.setdefault(a.pred, len(a.args)) != len(a.args):
            raise ParseError(f"arity mismatch for predicate {a.pred}")
    try:
        return Example(domain, frozenset(atoms), frozenset(preds))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def format_example(example: Example) -> str:
    lines = ["domain: " + " ".join(example.constants)]
    used = {a.predicate for a in example.atoms}
    bare = sorted(example.predicates - used)
    if bare:
        lines.append("predicates: " + " ".join(str(p) for p in bare))
    lines.extend(f"{a}." for a in sorted(example.atoms))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Q: fraction of size-k fragments satisfying a theory


@dataclass(frozen=True)
class ProbabilityEstimate:
    value: Fraction | float
    mode: str
    k: int
    numerator: int
    denominator: int
    trials: int | None = None
    digest: str = ""
    method: str = field(default="", compare=False)

    def __float__(self):
        return float(self.value)


def theory_digest(theory: Theory) -> str:
    return hashlib.sha256(str(theory).encode()).hexdigest()[:16]


def _require_constant_free(theory: Theory) -> None:
    if not theory.constant_free:
        raise ValueError("Q is defined for constant-free theories; eliminate constants first")


def _combinations(m: int, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    if k == 1:
        return np.arange(m, dtype=np.int64).reshape(m, 1)
    if k == 2:
        i, j = np.triu_indices(m, 1)
        return np.stack([i, j], axis=1).astype(np.int64)
    flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(m), k)),
                       dtype=np.int64, count=comb(m, k) * k)
    return flat.reshape(-1, k)


class _Tables:
    """Truth tables of the theory's predicates over an example, indexed by constant position."""

    DENSE_LIMIT = 1 << 24

    def __init__(self, example: Example, preds: Iterable[Predicate]):
        self.size = n = len(example.constants)
        idx = example.index
        self.tables: dict[str, object] = {}
        by_pred: dict[str, list[Atom]] = {}
        for a in example.atoms:
            by_pred.setdefault(a.pred, []).append(a)
        for p in preds:
            found = [a for a in by_pred.get(p.name, ()) if len(a.args) == p.arity]
            if p.arity == 0:
                self.tables[p.name] = np.bool_(bool(found))
            elif n ** p.arity <= self.DENSE_LIMIT:
                t = np.zeros((n,) * p.arity, dtype=bool)
                for a in found:
                    t[tuple(idx[c] for c in a.args)] = True
                self.tables[p.name] = t
            else:
                keys = sorted(sum(idx[c] * n ** i for i, c in enumerate(a.args)) for a in found)
                self.tables[p.name] = ("sparse", np.array(keys, dtype=np.int64))

    def lookup(self, atom: Atom, var_idx: dict[str, np.ndarray]):
        t = self.tables[atom.pred]
        if not atom.args:
            return t
        args = [var_idx[v] for v in atom.args]
        if isinstance(t, tuple):
            keys = t[1]
            code = sum(a * self.size ** i for i, a in enumerate(args))
            if len(keys) == 0:
                return np.zeros(np.shape(code), dtype=bool)
            pos = np.searchsorted(keys, code)
            pos = np.minimum(pos, len(keys) - 1)
            return keys[pos] == code
        return t[tuple(args)]


def _batch_matrix(m, tables: _Tables, var_idx):
    if isinstance(m, Atom):
        return tables.lookup(m, var_idx)
    if isinstance(m, Not):
        return ~_batch_matrix(m.arg, tables, var_idx)
    if isinstance(m, And):
        out = _batch_matrix(m.args[0], tables, var_idx)
        for a in m.args[1:]:
            out = out & _batch_matrix(a, tables, var_idx)
        return out
    if isinstance(m, Or):
        out = _batch_matrix(m.args[0], tables, var_idx)
        for a in m.args[1:]:
            out = out | _batch_matrix(a, tables, var_idx)
        return out
    if isinstance(m, Implies):
        return ~_batch_matrix(m.lhs, tables, var_idx) | _batch_matrix(m.rhs, tables, var_idx)
    assert isinstance(m, Iff)
    return _batch_matrix(m.lhs, tables, var_idx) == _batch_matrix(m.rhs, tables, var_idx)


def batch_holds(formula: Formula, rows: np.ndarray, tables: _Tables) -> np.ndarray:
    """Truth of a constant-free formula on each fragment given by a row of constant indices."""
    b, k = rows.shape
    q = len(formula.prefix)
    shape = (b,) + (k,) * q
    var_idx = {}
    for j, (_, var) in enumerate(formula.prefix):
        var_idx[var] = rows.reshape((b,) + tuple(k if i == j else 1 for i in range(q)))
    val = np.broadcast_to(_batch_matrix(formula.matrix, tables, var_idx), shape)
    for quant, _ in reversed(formula.prefix):
        val = val.all(axis=-1) if quant == FORALL else val.any(axis=-1)
    return np.asarray(val, dtype=bool).reshape(b)


class FragmentCounter:
    """Counts size-k fragments of (sub-domains of) an example that satisfy a theory.

    Unary/nullary vocabularies are counted in closed form by grouping
    constants into types; otherwise fragments are enumerated in numpy
    batches.  Either way the count is exact.
    """

    CHUNK = 1 << 20

    def __init__(self, example: Example, theory: Theory, k: int, method: str = "auto"):
        _require_constant_free(theory)
        if k < 0:
            raise ValueError("k must be non-negative")
        self.example = example
        self.theory = theory
        self.k = k
        unary = all(p.arity <= 1 for p in theory.vocabulary)
        self.method = ("types" if unary else "enumerate") if method == "auto" else method
        if self.method == "types":
            self._init_types()
        else:
            self.tables = _Tables(example, theory.vocabulary)
        self._combos: dict[int, np.ndarray] = {}

    # closed form -----------------------------------------------------------

    def _init_types(self):
        unary = sorted(p.name for p in self.theory.vocabulary if p.arity == 1)
        nullary = {p.name for p in self.theory.vocabulary if p.arity == 0}
        self.nullary_atoms = frozenset(
            a for a in self.example.atoms if not a.args and a.pred in nullary)
        types: dict[str, set[str]] = {}
        for a in self.example.atoms:
            if len(a.args) == 1 and a.pred in unary:
                types.setdefault(a.args[0], set()).add(a.pred)
        self.types = {c: frozenset(t) for c, t in types.items()}
        self._truth: dict[tuple, bool] = {}

    def _type_truth(self, multiset: tuple[frozenset, ...]) -> bool:
        hit = self._truth.get(multiset)
        if hit is None:
            names = [f"t{i}" for i in range(len(multiset))]
            atoms = set(self.nullary_atoms)
            for name, t in zip(names, multiset):
                atoms.update(Atom(p, (name,)) for p in t)
            hit = all(holds(atoms, names, f) for f in self.theory.formulas)
            self._truth[multiset] = hit
        return hit

    def _count_types(self, constants: Sequence[str]) -> int:
        counts = Counter(self.types.get(c, frozenset()) for c in constants)
        kinds = sorted(counts, key=lambda t: sorted(t))
        total = 0
        for combo in itertools.combinations_with_replacement(kinds, self.k):
            ways = 1
            for t, mult in Counter(combo).items():
                ways *= comb(counts[t], mult)
            if ways and self._type_truth(combo):
                total += ways
        return total

    # enumeration -----------------------------------------------------------

    def _rows(self, m: int) -> Iterable[np.ndarray]:
        k = self.k
        if comb(m, k) <= self.CHUNK:
            if m not in self._combos:
                self._combos = {m: _combinations(m, k)}
            yield self._combos[m]
            return
        it = itertools.combinations(range(m), k)
        while True:
            chunk = list(itertools.islice(it, self.CHUNK))
            if not chunk:
                return
            yield np.array(chunk, dtype=np.int64).reshape(-1, k)

    def satisfied(self, rows: np.ndarray) -> np.ndarray:
        """Per-row satisfaction for rows of global constant indices."""
        ok = np.ones(len(rows), dtype=bool)
        for f in self.theory.formulas:
            ok &= batch_holds(f, rows, self.tables)
        return ok

    def _count_enumerate(self, idx: np.ndarray) -> int:
        total = 0
        per_row = max(1, self.k) ** max((len(f.prefix) for f in self.theory.formulas), default=0)
        step = max(1, (1 << 22) // per_row)
        for local in self._rows(len(idx)):
            for s in range(0, len(local), step):
                total += int(self.satisfied(idx[local[s:s + step]]).sum())
        return total

    # public ------------------------------------------------------------------

    def count(self, constants: Iterable[str] | None = None) -> tuple[int, int]:
        """(satisfying size-k subsets, all size-k subsets) of ``constants`` (default: whole domain)."""
        consts = self.example.constants if constants is None else sorted(set(constants))
        if constants is not None and not self.example.domain.issuperset(consts):
            raise ValueError("constants outside the example's domain")
        m = len(consts)
        if self.k > m:
            raise ValueError(f"k={self.k} exceeds the domain size {m}")
        total = comb(m, self.k)
        if self.method == "types":
            return self._count_types(consts), total
        index = self.example.index
        idx = np.fromiter((index[c] for c in consts), dtype=np.int64, count=m)
        return self._count_enumerate(idx), total

    def q(self, constants: Iterable[str] | None = None) -> Fraction:
        sat, total = self.count(constants)
        return Fraction(sat, total)


def q_exact(example: Example, k: int, theory: Theory, budget: int | None = None,
            method: str = "auto") -> ProbabilityEstimate:
    """Exact Q: satisfying size-k subsets over C(|domain|, k)."""
    if k > len(example.domain):
        raise ValueError(f"k={k} exceeds the domain size {len(example.domain)}")
    counter = FragmentCounter(example, theory, k, method)
    total = comb(len(example.domain), k)
    if budget is not None and counter.method == "enumerate" and total > budget:
        raise ValueError(f"exact Q needs {total} fragment evaluations (budget {budget}); use Monte Carlo")
    sat, total = counter.count()
    return ProbabilityEstimate(Fraction(sat, total), "exact", k, sat, total,
                               digest=theory_digest(theory), method=counter.method)


def q_monte_carlo(example: Example, k: int, theory: Theory, trials: int, seed: int) -> ProbabilityEstimate:
    """Mean of ``trials`` indicators over uniformly drawn size-k subsets."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    n = len(example.domain)
    if k > n:
        raise ValueError(f"k={k} exceeds the domain size {n}")
    _require_constant_free(theory)
    tables = _Tables(example, theory.vocabulary)
    stream = Stream(seed)
    hits = 0
    chunk = 1 << 16
    for start in range(0, trials, chunk):
        size = min(chunk, trials - start)
        rows = stream.sample_batch(n, k, size)
        ok = np.ones(size, dtype=bool)
        for f in theory.formulas:
            ok &= batch_holds(f, rows, tables)
        hits += int(ok.sum())
    return ProbabilityEstimate(hits / trials, "monte-carlo", k, hits, trials, trials=trials,
                               digest=theory_digest(theory), method="sampling")
