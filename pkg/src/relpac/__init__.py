"""Bounded inference (k-entailment, voting entailment) with imperfect rules,
error bounds, and a sampling harness that checks them empirically."""

from .fragments import Example, Fragment, FragmentCounter, ProbabilityEstimate, format_example, parse_example, q_exact, q_monte_carlo, restrict
from .logic import Atom, Formula, Literal, ParseError, Predicate, Theory, evaluate, format_formula, format_theory, parse_formula, parse_theory
from .masking import MaskedExample, Masker, apply_mask, format_masked, mask_restrict, parse_masked
from .reasoner import (consistent, entails, false_entailed, k_entailed_literals, k_entails, vote_count,
                       vote_counts, voting_entailed_literals)

__version__ = "0.1.0"
