"""Masking processes: truthful partial views of a complete example."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .fragments import Example
from .logic import Atom, Literal, ParseError, Predicate, _strip_comment, is_constant
from .sampling import Stream

KINDS = ("identity", "positive-only", "random-drop", "literal-list")


@dataclass(frozen=True)
class MaskedExample:
    """A consistent conjunction of signed ground literals over a known domain."""

    domain: frozenset[str]
    literals: frozenset[Literal] = frozenset()

    def __post_init__(self):
        domain = frozenset(self.domain)
        lits = frozenset(self.literals)
        seen: dict[Atom, bool] = {}
        for lit in lits:
            if not lit.atom.is_ground:
                raise ValueError(f"{lit} is not ground")
            if not set(lit.args) <= domain:
                raise ValueError(f"{lit} uses constants outside the domain")
            if seen.setdefault(lit.atom, lit.positive) != lit.positive:
                raise ValueError(f"{lit.atom} appears with both signs")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "literals", lits)

    @property
    def constants(self) -> tuple[str, ...]:
        return tuple(sorted(self.domain))

    def __len__(self):
        return len(self.literals)


@dataclass(frozen=True)
class Masker:
    kind: str = "identity"
    predicates: tuple[str, ...] | None = None
    p: float = 1.0
    seed: int = 0
    literals: tuple[Literal, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown masker kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("drop probability parameter p must lie in [0, 1]")


def _ground_atoms(preds: Iterable[Predicate], constants: tuple[str, ...]):
    for p in sorted(preds):
        for args in itertools.product(constants, repeat=p.arity):
            yield Atom(p.name, args)


def apply_mask(masker: Masker, example: Example,
               vocabulary: Iterable[Predicate] | None = None) -> MaskedExample:
    """Mask ``example``; ``vocabulary`` widens the predicate set used by the
    identity and random-drop kinds (default: the example's predicates)."""
    vocab = set(example.predicates)
    if vocabulary is not None:
        vocab |= set(vocabulary)
    kind = masker.kind
    if kind == "identity":
        lits = [Literal(a, a in example.atoms) for a in _ground_atoms(vocab, example.constants)]
    elif kind == "positive-only":
        wanted = None if masker.predicates is None else set(masker.predicates)
        lits = [Literal(a) for a in example.atoms if wanted is None or a.pred in wanted]
    elif kind == "random-drop":
        atoms = list(_ground_atoms(vocab, example.constants))
        keep = Stream(masker.seed).bernoulli_many(masker.p, len(atoms))
        lits = [Literal(a, a in example.atoms) for a, kept in zip(atoms, keep) if kept]
    else:
        for lit in masker.literals:
            if not set(lit.args) <= example.domain:
                raise ValueError(f"{lit} uses constants outside the domain")
            if (lit.atom in example.atoms) != lit.positive:
                raise ValueError(f"{lit} is false in the example")
        lits = list(masker.literals)
    return MaskedExample(example.domain, frozenset(lits))


def mask_restrict(masked: MaskedExample, subset: Iterable[str]) -> MaskedExample:
    s = frozenset(subset)
    if not s <= masked.domain:
        raise ValueError(f"subset not within the domain: {', '.join(sorted(s - masked.domain))}")
    return MaskedExample(s, frozenset(l for l in masked.literals if s.issuperset(l.args)))


def parse_masked(text: str) -> MaskedExample:
    domain = None
    lits = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("domain:"):
            if domain is not None:
                raise ParseError("duplicate domain declaration", lineno, 1)
            domain = frozenset(line[len("domain:"):].split())
            for c in domain:
                if not is_constant(c):
                    raise ParseError(f"invalid constant {c!r}", lineno, 1)
            continue
        if domain is None:
            raise ParseError("literals must follow the domain: line", lineno, 1)
        try:
            lits.append(Literal.parse(line.rstrip(".")))
        except ParseError as exc:
            raise ParseError(str(exc).split(": ", 1)[-1], lineno, exc.column) from exc
        except ValueError as exc:
            raise ParseError(str(exc), lineno, 1) from exc
    if domain is None:
        raise ParseError("missing domain: line")
    try:
        return MaskedExample(domain, frozenset(lits))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def format_masked(masked: MaskedExample) -> str:
    lines = ["domain: " + " ".join(masked.constants)]
    lines.extend(str(l) for l in sorted(masked.literals, key=lambda l: (l.atom, not l.positive)))
    return "\n".join(lines) + "\n"
