"""Function-free first-order logic over finite domains.

Terms are plain strings: identifiers starting with an uppercase letter are
variables, lowercase-initial identifiers are constants.  Formulas are in
prenex form, a quantifier prefix over a quantifier-free matrix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

IDENT = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*")
KEYWORDS = frozenset({"forall", "exists", "domain", "predicates"})


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


def is_variable(term: str) -> bool:
    return term[:1].isupper()


def is_constant(term: str) -> bool:
    return term[:1].islower()


@dataclass(frozen=True, order=True)
class Predicate:
    name: str
    arity: int

    def __post_init__(self):
        if not IDENT.fullmatch(self.name):
            raise ValueError(f"invalid predicate name {self.name!r}")
        if self.arity < 0:
            raise ValueError("arity must be non-negative")

    def __str__(self):
        return f"{self.name}/{self.arity}"

    @classmethod
    def parse(cls, text: str) -> "Predicate":
        name, _, arity = text.strip().partition("/")
        if not arity.isdigit():
            raise ValueError(f"expected name/arity, got {text!r}")
        return cls(name, int(arity))


@dataclass(frozen=True, order=True)
class Atom:
    pred: str
    args: tuple[str, ...] = ()

    @property
    def predicate(self) -> Predicate:
        return Predicate(self.pred, len(self.args))

    @property
    def is_ground(self) -> bool:
        return all(is_constant(a) for a in self.args)

    def constants(self) -> frozenset[str]:
        return frozenset(a for a in self.args if is_constant(a))

    def variables(self) -> frozenset[str]:
        return frozenset(a for a in self.args if is_variable(a))

    def substitute(self, env: Mapping[str, str]) -> "Atom":
        return Atom(self.pred, tuple(env.get(a, a) for a in self.args))

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True, order=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __neg__(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    @property
    def pred(self) -> str:
        return self.atom.pred

    @property
    def args(self) -> tuple[str, ...]:
        return self.atom.args

    def constants(self) -> frozenset[str]:
        return self.atom.constants()

    def __str__(self):
        return str(self.atom) if self.positive else f"!{self.atom}"

    @classmethod
    def parse(cls, text: str) -> "Literal":
        text = text.strip()
        positive = not text.startswith("!")
        atom = parse_atom(text.lstrip("!").strip())
        if not atom.is_ground:
            raise ValueError(f"literal {text!r} is not ground")
        return cls(atom, positive)


# Quantifier-free matrix nodes.  Atom is the leaf.


@dataclass(frozen=True)
class Not:
    arg: "Matrix"


@dataclass(frozen=True)
class And:
    args: tuple["Matrix", ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("And needs at least two operands")


@dataclass(frozen=True)
class Or:
    args: tuple["Matrix", ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("Or needs at least two operands")


@dataclass(frozen=True)
class Implies:
    lhs: "Matrix"
    rhs: "Matrix"


@dataclass(frozen=True)
class Iff:
    lhs: "Matrix"
    rhs: "Matrix"


Matrix = Union[Atom, Not, And, Or, Implies, Iff]

FORALL = "forall"
EXISTS = "exists"


def matrix_atoms(m: Matrix) -> Iterator[Atom]:
    if isinstance(m, Atom):
        yield m
    elif isinstance(m, Not):
        yield from matrix_atoms(m.arg)
    elif isinstance(m, (And, Or)):
        for a in m.args:
            yield from matrix_atoms(a)
    else:
        yield from matrix_atoms(m.lhs)
        yield from matrix_atoms(m.rhs)


@dataclass(frozen=True)
class Formula:
    """A closed prenex formula: ``prefix`` is a tuple of (quantifier, variable)."""

    prefix: tuple[tuple[str, str], ...]
    matrix: Matrix

    def __post_init__(self):
        seen = set()
        for quant, var in self.prefix:
            if quant not in (FORALL, EXISTS):
                raise ValueError(f"unknown quantifier {quant!r}")
            if not is_variable(var):
                raise ValueError(f"{var!r} is not a variable")
            if var in seen:
                raise ValueError(f"variable {var} bound twice")
            seen.add(var)
        free = set()
        for atom in matrix_atoms(self.matrix):
            free |= atom.variables()
        unbound = sorted(free - seen)
        if unbound:
            raise ValueError(f"unbound variable(s): {', '.join(unbound)}")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.prefix)

    def atoms(self) -> Iterator[Atom]:
        return matrix_atoms(self.matrix)

    def predicates(self) -> frozenset[Predicate]:
        return frozenset(a.predicate for a in self.atoms())

    def constants(self) -> frozenset[str]:
        out: set[str] = set()
        for a in self.atoms():
            out |= a.constants()
        return frozenset(out)

    @property
    def constant_free(self) -> bool:
        return not self.constants()

    def negate(self) -> "Formula":
        """Prenex form of the negation (quantifiers dualised)."""
        flipped = tuple((EXISTS if q == FORALL else FORALL, v) for q, v in self.prefix)
        return Formula(flipped, Not(self.matrix))

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Theory:
    formulas: tuple[Formula, ...] = ()
    predicates_: frozenset[Predicate] = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        unique = tuple(dict.fromkeys(self.formulas))
        object.__setattr__(self, "formulas", unique)
        vocab = set()
        for f in unique:
            vocab |= f.predicates()
        check_vocabulary(vocab)
        object.__setattr__(self, "predicates_", frozenset(vocab))

    @property
    def vocabulary(self) -> frozenset[Predicate]:
        return self.predicates_

    @property
    def constant_free(self) -> bool:
        return all(f.constant_free for f in self.formulas)

    def constants(self) -> frozenset[str]:
        out: set[str] = set()
        for f in self.formulas:
            out |= f.constants()
        return frozenset(out)

    def __len__(self):
        return len(self.formulas)

    def __iter__(self):
        return iter(self.formulas)

    def __str__(self):
        return format_theory(self)


def check_vocabulary(preds: Iterable[Predicate]) -> None:
    arities: dict[str, int] = {}
    for p in preds:
        if arities.setdefault(p.name, p.arity) != p.arity:
            raise ValueError(f"predicate {p.name} used with arities {arities[p.name]} and {p.arity}")


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|[&|!(),:])|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<bad>\S))"
)


class _Tokens:
    def __init__(self, text: str, line: int):
        self.line = line
        self.items: list[tuple[str, int]] = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                break
            if m.group("bad"):
                raise ParseError(f"unexpected character {m.group('bad')!r}", line, m.start("bad") + 1)
            tok = m.group("op") or m.group("ident")
            start = m.start("op") if m.group("op") else m.start("ident")
            self.items.append((tok, start + 1))
            pos = m.end()
        self.i = 0
        self.end_col = len(text) + 1

    def peek(self) -> str | None:
        return self.items[self.i][0] if self.i < len(self.items) else None

    def column(self) -> int:
        return self.items[self.i][1] if self.i < len(self.items) else self.end_col

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.line, self.column())
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        col = self.column()
        got = self.next()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r}", self.line, col)

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line, self.column())


def _parse_formula_tokens(toks: _Tokens) -> Formula:
    prefix: list[tuple[str, str]] = []
    while toks.peek() in (FORALL, EXISTS):
        quant = toks.next()
        while True:
            col = toks.column()
            var = toks.next()
            if not IDENT.fullmatch(var) or not is_variable(var):
                raise ParseError(f"expected a variable, got {var!r}", toks.line, col)
            if var in {v for _, v in prefix}:
                raise ParseError(f"variable {var} bound twice", toks.line, col)
            prefix.append((quant, var))
            if toks.peek() == ",":
                toks.next()
                continue
            break
        toks.expect(":")
    matrix = _parse_iff(toks)
    if toks.peek() is not None:
        raise toks.error(f"unexpected token {toks.peek()!r}")
    bound = {v for _, v in prefix}
    for atom in matrix_atoms(matrix):
        for v in atom.variables():
            if v not in bound:
                raise ParseError(f"unbound variable {v}", toks.line, 1)
    return Formula(tuple(prefix), matrix)


def _parse_iff(toks: _Tokens) -> Matrix:
    left = _parse_implies(toks)
    while toks.peek() == "<->":
        toks.next()
        left = Iff(left, _parse_implies(toks))
    return left


def _parse_implies(toks: _Tokens) -> Matrix:
    left = _parse_or(toks)
    if toks.peek() == "->":
        toks.next()
        return Implies(left, _parse_implies(toks))
    return left


def _parse_or(toks: _Tokens) -> Matrix:
    args = [_parse_and(toks)]
    while toks.peek() == "|":
        toks.next()
        args.append(_parse_and(toks))
    return args[0] if len(args) == 1 else Or(tuple(args))


def _parse_and(toks: _Tokens) -> Matrix:
    args = [_parse_unary(toks)]
    while toks.peek() == "&":
        toks.next()
        args.append(_parse_unary(toks))
    return args[0] if len(args) == 1 else And(tuple(args))


def _parse_unary(toks: _Tokens) -> Matrix:
    tok = toks.peek()
    if tok == "!":
        toks.next()
        return Not(_parse_unary(toks))
    if tok == "(":
        toks.next()
        inner = _parse_iff(toks)
        toks.expect(")")
        return inner
    if tok in (FORALL, EXISTS):
        raise toks.error("quantifiers are only allowed in the prefix")
    return _parse_atom_tokens(toks)


def _parse_atom_tokens(toks: _Tokens) -> Atom:
    col = toks.column()
    name = toks.next()
    if not IDENT.fullmatch(name) or name in KEYWORDS:
        raise ParseError(f"expected a predicate, got {name!r}", toks.line, col)
    args: list[str] = []
    if toks.peek() == "(":
        toks.next()
        if toks.peek() != ")":
            while True:
                col = toks.column()
                term = toks.next()
                if not IDENT.fullmatch(term):
                    raise ParseError(f"expected a term, got {term!r}", toks.line, col)
                args.append(term)
                if toks.peek() == ",":
                    toks.next()
                    continue
                break
        toks.expect(")")
    return Atom(name, tuple(args))


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def parse_formula(text: str, line: int = 1) -> Formula:
    return _parse_formula_tokens(_Tokens(text, line))


def parse_atom(text: str, line: int = 1) -> Atom:
    toks = _Tokens(text, line)
    atom = _parse_atom_tokens(toks)
    if toks.peek() is not None:
        raise toks.error(f"unexpected token {toks.peek()!r}")
    return atom


def parse_theory(text: str, require_constant_free: bool = False) -> Theory:
    """Parse a theory file: one prenex formula per line, ``#`` starts a comment."""
    formulas = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        formula = parse_formula(body, lineno)
        if require_constant_free and not formula.constant_free:
            consts = ", ".join(sorted(formula.constants()))
            raise ParseError(f"formula must be constant-free (found {consts})", lineno, 1)
        formulas.append(formula)
    try:
        return Theory(tuple(formulas))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Printing

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Atom: 6}


def _fmt(m: Matrix) -> str:
    if isinstance(m, Atom):
        return str(m)
    if isinstance(m, Not):
        inner = _fmt(m.arg)
        return "!" + (inner if _PREC[type(m.arg)] >= 5 else f"({inner})")
    if isinstance(m, (And, Or)):
        op = " & " if isinstance(m, And) else " | "
        p = _PREC[type(m)]
        return op.join(_fmt(a) if _PREC[type(a)] > p else f"({_fmt(a)})" for a in m.args)
    if isinstance(m, Implies):
        lhs = _fmt(m.lhs) if _PREC[type(m.lhs)] > 2 else f"({_fmt(m.lhs)})"
        rhs = _fmt(m.rhs) if _PREC[type(m.rhs)] >= 2 else f"({_fmt(m.rhs)})"
        return f"{lhs} -> {rhs}"
    lhs = _fmt(m.lhs) if _PREC[type(m.lhs)] > 1 else f"({_fmt(m.lhs)})"
    rhs = _fmt(m.rhs) if _PREC[type(m.rhs)] > 1 else f"({_fmt(m.rhs)})"
    return f"{lhs} <-> {rhs}"


def format_formula(f: Formula) -> str:
    parts = []
    i = 0
    while i < len(f.prefix):
        quant = f.prefix[i][0]
        group = []
        while i < len(f.prefix) and f.prefix[i][0] == quant:
            group.append(f.prefix[i][1])
            i += 1
        parts.append(f"{quant} {', '.join(group)}: ")
    return "".join(parts) + _fmt(f.matrix)


def format_theory(t: Theory) -> str:
    return "".join(format_formula(f) + "\n" for f in t.formulas)


# ---------------------------------------------------------------------------
# Closed-world satisfaction


def _eval_matrix(m: Matrix, atoms: frozenset[Atom] | set[Atom], env: dict[str, str]) -> bool:
    if isinstance(m, Atom):
        return m.substitute(env) in atoms
    if isinstance(m, Not):
        return not _eval_matrix(m.arg, atoms, env)
    if isinstance(m, And):
        return all(_eval_matrix(a, atoms, env) for a in m.args)
    if isinstance(m, Or):
        return any(_eval_matrix(a, atoms, env) for a in m.args)
    if isinstance(m, Implies):
        return (not _eval_matrix(m.lhs, atoms, env)) or _eval_matrix(m.rhs, atoms, env)
    return _eval_matrix(m.lhs, atoms, env) == _eval_matrix(m.rhs, atoms, env)


def holds(atoms, domain: Sequence[str], formula: Formula) -> bool:
    """Truth of ``formula`` with quantifiers ranging over ``domain`` and atoms
    looked up in ``atoms`` (anything absent is false).  No domain checks."""
    prefix = formula.prefix
    env: dict[str, str] = {}

    def rec(i: int) -> bool:
        if i == len(prefix):
            return _eval_matrix(formula.matrix, atoms, env)
        quant, var = prefix[i]
        results = (rec_bind(i, var, c) for c in domain)
        return all(results) if quant == FORALL else any(results)

    def rec_bind(i: int, var: str, c: str) -> bool:
        env[var] = c
        return rec(i + 1)

    return rec(0)


def evaluate(example, formula: Formula | Literal | Atom) -> bool:
    """Closed-world satisfaction of a closed formula (or ground literal/atom) by an example."""
    if isinstance(formula, Atom):
        formula = Literal(formula)
    if isinstance(formula, Literal):
        if not formula.atom.is_ground:
            raise ValueError(f"{formula} is not ground")
        outside = formula.constants() - example.domain
        if outside:
            raise ValueError(f"constants outside the domain: {', '.join(sorted(outside))}")
        return (formula.atom in example.atoms) == formula.positive
    outside = formula.constants() - example.domain
    if outside:
        raise ValueError(f"constants outside the domain: {', '.join(sorted(outside))}")
    return holds(example.atoms, example.constants, formula)


def evaluate_theory(example, theory: Theory) -> bool:
    return all(evaluate(example, f) for f in theory.formulas)
