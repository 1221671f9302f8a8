"""Grounding to CNF and a small DPLL solver.

Literals are non-zero ints (DIMACS style).  Grounding introduces one
auxiliary variable per compound subformula instance (definitional CNF),
with constant folding of empty quantifier expansions.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .logic import FORALL, And, Atom, Formula, Iff, Implies, Not, Or

TRUE = object()
FALSE = object()


class CNFBuilder:
    def __init__(self):
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.atom_vars: dict[Atom, int] = {}

    def new_var(self) -> int:
        self.nvars += 1
        return self.nvars

    def atom(self, atom: Atom) -> int:
        v = self.atom_vars.get(atom)
        if v is None:
            v = self.atom_vars[atom] = self.new_var()
        return v

    # gates ---------------------------------------------------------------

    def conj(self, lits: list) -> object:
        if any(l is FALSE for l in lits):
            return FALSE
        lits = list(dict.fromkeys(l for l in lits if l is not TRUE))
        if not lits:
            return TRUE
        if len(lits) == 1:
            return lits[0]
        g = self.new_var()
        for l in lits:
            self.clauses.append([-g, l])
        self.clauses.append([g] + [-l for l in lits])
        return g

    def disj(self, lits: list) -> object:
        return self.neg(self.conj([self.neg(l) for l in lits]))

    @staticmethod
    def neg(lit):
        if lit is TRUE:
            return FALSE
        if lit is FALSE:
            return TRUE
        return -lit

    def iff(self, a, b):
        return self.conj([self.disj([self.neg(a), b]), self.disj([a, self.neg(b)])])

    # encoding ------------------------------------------------------------

    def encode_matrix(self, m, env: dict[str, str]):
        if isinstance(m, Atom):
            return self.atom(m.substitute(env))
        if isinstance(m, Not):
            return self.neg(self.encode_matrix(m.arg, env))
        if isinstance(m, And):
            return self.conj([self.encode_matrix(a, env) for a in m.args])
        if isinstance(m, Or):
            return self.disj([self.encode_matrix(a, env) for a in m.args])
        if isinstance(m, Implies):
            return self.disj([self.neg(self.encode_matrix(m.lhs, env)), self.encode_matrix(m.rhs, env)])
        assert isinstance(m, Iff)
        return self.iff(self.encode_matrix(m.lhs, env), self.encode_matrix(m.rhs, env))

    def encode(self, prefix, matrix, universe: Sequence[str], env=None):
        env = {} if env is None else env
        if not prefix:
            return self.encode_matrix(matrix, env)
        quant, var = prefix[0]
        parts = [self.encode(prefix[1:], matrix, universe, {**env, var: c}) for c in universe]
        return self.conj(parts) if quant == FORALL else self.disj(parts)

    def add_unit(self, lit) -> None:
        if lit is TRUE:
            return
        self.clauses.append([] if lit is FALSE else [lit])

    def assert_formula(self, formula: Formula, universe: Sequence[str]) -> None:
        """Add clauses equisatisfiable with ``formula`` grounded over ``universe``."""
        lead = 0
        while lead < len(formula.prefix) and formula.prefix[lead][0] == FORALL:
            lead += 1
        rest = formula.prefix[lead:]
        names = [v for _, v in formula.prefix[:lead]]
        for env in _assignments(names, universe):
            if rest:
                self.add_unit(self.encode(rest, formula.matrix, universe, env))
            else:
                self._assert_matrix(formula.matrix, env)

    def _assert_matrix(self, m, env) -> None:
        if isinstance(m, And):
            for a in m.args:
                self._assert_matrix(a, env)
        elif isinstance(m, (Or, Implies)):
            parts = list(m.args) if isinstance(m, Or) else [Not(m.lhs), m.rhs]
            lits = [self.encode_matrix(p, env) for p in parts]
            if any(l is TRUE for l in lits):
                return
            self.clauses.append([l for l in lits if l is not FALSE])
        else:
            self.add_unit(self.encode_matrix(m, env))


def _assignments(names: list[str], universe: Sequence[str]):
    if not names:
        yield {}
        return
    for rest in _assignments(names[1:], universe):
        for c in universe:
            yield {names[0]: c, **rest}


def solve(clauses: Iterable[list[int]], assumptions: Iterable[int] = ()) -> dict[int, bool] | None:
    """Return a satisfying partial assignment (unlisted variables are free) or None."""
    clauses = [list(c) for c in clauses] + [[a] for a in assumptions]
    return _dpll(clauses, {})


def _propagate(clauses, assign) -> bool:
    changed = True
    while changed:
        changed = False
        for c in clauses:
            free = None
            nfree = 0
            for l in c:
                v = assign.get(abs(l))
                if v is None:
                    nfree += 1
                    free = l
                elif v == (l > 0):
                    break
            else:
                if nfree == 0:
                    return False
                if nfree == 1:
                    assign[abs(free)] = free > 0
                    changed = True
    return True


def _dpll(clauses, assign):
    if not _propagate(clauses, assign):
        return None
    branch = None
    for c in clauses:
        if any(assign.get(abs(l)) == (l > 0) for l in c):
            continue
        branch = next(l for l in c if abs(l) not in assign)
        break
    if branch is None:
        return assign
    for value in (branch > 0, branch < 0):
        trial = dict(assign)
        trial[abs(branch)] = value
        result = _dpll(clauses, trial)
        if result is not None:
            return result
    return None
