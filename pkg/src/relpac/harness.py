"""Train/test sampling, concentration checks, PAC experiments and scenarios."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import partial
from typing import Iterable, Sequence

import numpy as np

from . import bounds
from .fragments import (DEFAULT_BUDGET, Example, FragmentCounter, q_monte_carlo, restrict)
from .logic import (And, Atom, Formula, Iff, Implies, Literal, Not, Or, Predicate, Theory,
                    evaluate_theory, matrix_atoms, parse_theory)
from .masking import Masker, apply_mask
from .reasoner import false_entailed
from .sampling import Stream, as_stream

SCHEMA_VERSION = "relpac.trials/1"

RARE_RULE = "forall X, Y: rare(X) -> rare(Y)"
CHAIN_RULE = "forall X, Y: rare(X) & e(X,Y) -> rare(Y)"
SMOKERS_RULE = "forall X, Y: fr(X,Y) & sm(X) -> sm(Y)"
RANDOM_RULE = "forall X, Y: r(X,Y) -> p(X) | q(Y)"

RARE_HYPOTHESES = (
    RARE_RULE,
    "forall X, Y: rare(X) -> !rare(Y)",
    "forall X: !rare(X)",
    "forall X, Y: rare(X) <-> rare(Y)",
)


# ---------------------------------------------------------------------------
# Scenario generators


def _names(n: int) -> list[str]:
    return [f"c{i}" for i in range(1, n + 1)]


def gen_rare_clique(n: int) -> Example:
    """{rare(c1)} over c1..cn."""
    if n < 2:
        raise ValueError("need at least 2 constants")
    return Example(frozenset(_names(n)), frozenset({Atom("rare", ("c1",))}),
                   frozenset({Predicate("rare", 1)}))


def gen_rare_chain(n: int) -> Example:
    """rare(c1) plus the path e(c1,c2), ..., e(c_{n-1},c_n)."""
    if n < 2:
        raise ValueError("need at least 2 constants")
    names = _names(n)
    atoms = {Atom("rare", ("c1",))}
    atoms.update(Atom("e", (a, b)) for a, b in zip(names, names[1:]))
    return Example(frozenset(names), frozenset(atoms))


def gen_smokers(people: Iterable[str], friendships: Iterable[tuple[str, str]],
                smokers: Iterable[str]) -> Example:
    people = list(people)
    if len(people) < 2:
        raise ValueError("need at least 2 people")
    atoms = {Atom("fr", tuple(f)) for f in friendships}
    atoms.update(Atom("sm", (s,)) for s in smokers)
    return Example(frozenset(people), frozenset(atoms),
                   frozenset({Predicate("fr", 2), Predicate("sm", 1)}))


def gen_random(n: int, vocab: Sequence[Predicate], density: float, seed: int) -> Example:
    """Each ground atom of ``vocab`` over c1..cn present independently with probability ``density``."""
    if n < 2:
        raise ValueError("need at least 2 constants")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    names = sorted(_names(n))
    stream = Stream(seed)
    atoms = set()
    for p in sorted(vocab):
        tuples = list(itertools.product(names, repeat=p.arity))
        keep = stream.bernoulli_many(density, len(tuples))
        atoms.update(Atom(p.name, t) for t, kept in zip(tuples, keep) if kept)
    return Example(frozenset(names), frozenset(atoms), frozenset(vocab))


def parse_vocab(text: str) -> list[Predicate]:
    return [Predicate.parse(p) for p in text.replace(",", " ").split()]


@dataclass(frozen=True)
class Scenario:
    name: str
    theory: str
    target: Predicate

    def generate(self, n: int, seed: int = 0, density: float = 0.1, vocab: str = "p/1 q/1 r/2") -> Example:
        if self.name == "rare-clique":
            return gen_rare_clique(n)
        if self.name == "rare-chain":
            return gen_rare_chain(n)
        if self.name == "random":
            return gen_random(n, parse_vocab(vocab), density, seed)
        if self.name == "smokers":
            stream = Stream(seed)
            people = _names(n)
            pairs = [(a, b) for a in people for b in people if a != b]
            fr = [pr for pr, kept in zip(pairs, stream.bernoulli_many(density, len(pairs))) if kept]
            sm = [p for p, kept in zip(people, stream.bernoulli_many(0.5, n)) if kept]
            return gen_smokers(people, fr, sm)
        raise ValueError(f"unknown scenario {self.name!r}")


SCENARIOS = {
    "rare-clique": Scenario("rare-clique", RARE_RULE, Predicate("rare", 1)),
    "rare-chain": Scenario("rare-chain", CHAIN_RULE, Predicate("rare", 1)),
    "random": Scenario("random", RANDOM_RULE, Predicate("p", 1)),
    "smokers": Scenario("smokers", SMOKERS_RULE, Predicate("sm", 1)),
}


# ---------------------------------------------------------------------------
# Sampling processes


def sample_learning_instance(aleph: Example, n: int, u: int, seed) -> tuple[Example, Example]:
    """Independent uniform size-n (training) and size-u (test) restrictions of ``aleph``.

    The two constant sets are drawn independently and may overlap.
    """
    size = len(aleph.domain)
    if n > size or u > size:
        raise ValueError(f"sample sizes {n}, {u} exceed |domain| = {size}")
    stream = as_stream(seed)
    consts = aleph.constants
    train = stream.child(0).sample(consts, n)
    test = stream.child(1).sample(consts, u)
    return restrict(aleph, train), restrict(aleph, test)


def sample_subsets_iid(aleph: Example, n: int, k: int, rng, count: int | None = None) -> list[frozenset[str]]:
    """floor(n/k) independent uniform size-k subsets of the whole domain."""
    if not 0 < k <= n <= len(aleph.domain):
        raise ValueError("need 0 < k <= n <= |domain|")
    if count is not None and count != n // k:
        raise ValueError(f"count must be floor(n/k) = {n // k}")
    stream = as_stream(rng)
    consts = aleph.constants
    return [frozenset(stream.sample(consts, k)) for _ in range(n // k)]


def sample_subsets_relabelled(aleph: Example, n: int, k: int, rng) -> list[frozenset[str]]:
    """Size-k subsets of a sampled size-n domain via an injective relabelling.

    1. draw the training domain (size n); 2. draw floor(n/k) size-k index
    sets from {0..N-1}; 3. map the union of indices injectively and
    uniformly into the training domain and apply the map.
    """
    if not 0 < k <= n <= len(aleph.domain):
        raise ValueError("need 0 < k <= n <= |domain|")
    stream = as_stream(rng)
    consts = aleph.constants
    train = sorted(stream.sample(consts, n))
    index_sets = [stream.sample_indices(len(consts), k) for _ in range(n // k)]
    used = sorted(set().union(*map(set, index_sets)))
    image = stream.sample(train, len(used))
    g = dict(zip(used, image))
    return [frozenset(g[i] for i in s) for s in index_sets]


def _chi2_two_sample(a: Sequence[int], b: Sequence[int]) -> float:
    from scipy.stats import chi2_contingency

    table = np.array([a, b], dtype=float)
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return 1.0
    return float(chi2_contingency(table, correction=False)[1])


def compare_subset_processes(aleph: Example, n: int, k: int, theory: Theory, draws: int, seed: int) -> dict:
    """Two-sample chi-square p-values comparing the X and Y processes.

    Statistics: pooled per-subset frequencies, and the number of sampled
    subsets (out of floor(n/k)) whose fragment satisfies ``theory``.
    """
    from scipy.stats import chisquare

    subsets = [frozenset(s) for s in itertools.combinations(aleph.constants, k)]
    slot = {s: i for i, s in enumerate(subsets)}
    truth = {s: evaluate_theory(restrict(aleph, s), theory) for s in subsets}
    m = n // k
    out = {}
    freq = {}
    for name, fn, path in (("X", sample_subsets_iid, 0), ("Y", sample_subsets_relabelled, 1)):
        stream = Stream(seed, path)
        pair_counts = [0] * len(subsets)
        sat_counts = [0] * (m + 1)
        for _ in range(draws):
            vec = fn(aleph, n, k, stream)
            for s in vec:
                pair_counts[slot[s]] += 1
            sat_counts[sum(truth[s] for s in vec)] += 1
        freq[name] = (pair_counts, sat_counts)
        out[f"{name}_uniform_pvalue"] = float(chisquare(pair_counts)[1])
    out["pair_pvalue"] = _chi2_two_sample(freq["X"][0], freq["Y"][0])
    out["count_pvalue"] = _chi2_two_sample(freq["X"][1], freq["Y"][1])
    out["pair_counts"] = {"X": freq["X"][0], "Y": freq["Y"][0]}
    out["sat_counts"] = {"X": freq["X"][1], "Y": freq["Y"][1]}
    return out


lemma3_sample_X = sample_subsets_iid
lemma3_sample_Y = sample_subsets_relabelled


# ---------------------------------------------------------------------------
# Concentration validation


def binomial_slack(p: float, trials: int, sigmas: float = 3.0) -> float:
    p = min(max(p, 0.0), 1.0)
    return sigmas * math.sqrt(p * (1 - p) / trials)


@dataclass
class ConcentrationReport:
    n: int
    k: int
    u: int | None
    trials: int
    reference: Fraction | float
    reference_mode: str
    rows: list[dict] = field(default_factory=list)
    realizable: dict | None = None

    def checks(self) -> list[tuple[str, float, float, bool]]:
        """(label, empirical, bound, ok) with a 3-standard-error allowance."""
        out = []
        pairs = [("upper", "bound_one_sided"), ("lower", "bound_one_sided"),
                 ("two_sided", "bound_two_sided"), ("two_sample_upper", "bound_two_sample_one_sided"),
                 ("two_sample", "bound_two_sample"), ("realizable", "bound_realizable")]
        rows = self.rows + ([self.realizable] if self.realizable else [])
        for row in rows:
            for emp, bnd in pairs:
                if row.get(emp) is None or row.get(bnd) is None:
                    continue
                ok = row[emp] <= row[bnd] + binomial_slack(row[bnd], self.trials)
                out.append((f"eps={row['eps']:.4g} {emp}", row[emp], row[bnd], ok))
        return out

    @property
    def ok(self) -> bool:
        return all(c[3] for c in self.checks())


def _concentration_trial(shared, t: int) -> tuple:
    counter, consts, n, u, seed = shared
    stream = Stream(seed, t)
    train = [consts[i] for i in stream.child(0).sample_indices(len(consts), n)]
    res = counter.count(train)
    if u is not None:
        test = [consts[i] for i in stream.child(1).sample_indices(len(consts), u)]
        res += counter.count(test)
    return res


_SHARED = None


def _init_worker(shared) -> None:
    global _SHARED
    _SHARED = shared


def _call_shared(fn, t):
    return fn(_SHARED, t)


def _run_trials(fn, shared, trials: int, threads: int) -> list:
    """``[fn(shared, t) for t in range(trials)]``, optionally across processes.

    Every trial derives its own stream from (seed, t), so the result does not
    depend on ``threads``.
    """
    if threads <= 1 or trials < 2:
        return [fn(shared, t) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker, initargs=(shared,)) as pool:
        return list(pool.map(partial(_call_shared, fn), range(trials),
                             chunksize=max(1, trials // (4 * threads))))


def validate_concentration(aleph: Example, theory: Theory, k: int, n: int, eps_grid: Iterable[float],
                           trials: int, seed: int, u: int | None = None,
                           budget: int = DEFAULT_BUDGET, threads: int = 1) -> ConcentrationReport:
    """Empirical deviation tails of the training estimate next to their bounds.

    The realizable check applies to the negated theory, whose estimate is 0
    exactly when the training Q of ``theory`` is 1.
    """
    counter = FragmentCounter(aleph, theory, k)
    total = math.comb(len(aleph.domain), k)
    if counter.method == "enumerate" and total > budget:
        reference = float(q_monte_carlo(aleph, k, theory, 10**6, seed).value)
        mode = "monte-carlo"
    else:
        reference = counter.q()
        mode = "exact"
    results = _run_trials(_concentration_trial, (counter, aleph.constants, n, u, seed), trials, threads)
    a_hat = [Fraction(r[0], r[1]) for r in results]
    perfect = sum(1 for r in results if r[0] == r[1])
    b_hat = [Fraction(r[2], r[3]) for r in results] if u is not None else None
    ref = Fraction(reference) if mode == "exact" else Fraction(str(reference))
    report = ConcentrationReport(n, k, u, trials, reference, mode)
    for eps in eps_grid:
        e = Fraction(str(eps))
        row = {
            "eps": float(eps),
            "upper": sum(x - ref >= e for x in a_hat) / trials,
            "lower": sum(ref - x >= e for x in a_hat) / trials,
            "two_sided": sum(abs(x - ref) >= e for x in a_hat) / trials,
            "bound_one_sided": bounds.tail_one_sample(n, k, float(eps), two_sided=False),
            "bound_two_sided": bounds.tail_one_sample(n, k, float(eps)),
        }
        if b_hat is not None:
            row["two_sample_upper"] = sum(x - y >= e for x, y in zip(a_hat, b_hat)) / trials
            row["two_sample"] = sum(abs(x - y) >= e for x, y in zip(a_hat, b_hat)) / trials
            row["bound_two_sample_one_sided"] = bounds.tail_two_sample(n, u, k, float(eps), False)
            row["bound_two_sample"] = bounds.tail_two_sample(n, u, k, float(eps))
        if mode == "exact" and 1 - ref >= e:
            row["realizable"] = perfect / trials
            row["bound_realizable"] = bounds.tail_realizable(n, k, float(eps))
        report.rows.append(row)
    if mode == "exact" and ref < 1:
        eps = float(1 - ref)
        report.realizable = {"eps": eps, "realizable": perfect / trials,
                             "bound_realizable": bounds.tail_realizable(n, k, eps)}
    return report


# ---------------------------------------------------------------------------
# PAC experiments


def select_best_theory(hypotheses: Sequence[Theory], train: Example, k: int) -> tuple[int, Fraction]:
    """Index and value of the highest training Q (ties go to the lowest index)."""
    if not hypotheses:
        raise ValueError("empty hypothesis class")
    best, best_q = 0, Fraction(-1)
    for i, phi in enumerate(hypotheses):
        q = FragmentCounter(train, phi, k).q()
        if q > best_q:
            best, best_q = i, q
    return best, best_q


@dataclass
class TrialRecord:
    trial: int
    group: int
    seed: int
    train_domain: tuple[str, ...]
    test_domain: tuple[str, ...]
    selected: int
    q_train: list[Fraction]
    q_test: list[Fraction]
    q_global: list[Fraction]
    f_k: list[int]
    f_vote: list[int | None]
    bounds: dict[str, list[float | None]]
    violations: dict[str, bool]


@dataclass
class ExperimentResult:
    records: list[TrialRecord]
    summary: dict


BOUND_COLUMNS = ("prop3", "prop4", "thm7", "thm8", "thm9", "thm9_form2", "thm10", "thm10_fraction")
FLAG_COLUMNS = ("prop3", "prop4", "thm9", "thm10")


def _pac_trial(shared, t: int) -> TrialRecord:
    (aleph, hypotheses, counters, q_global, k, n, u, masker, target, gamma, delta, seed, inner,
     positive_only) = shared
    group = t // inner
    consts = aleph.constants
    train_idx = Stream(seed, 0, group).sample_indices(len(consts), n)
    test_idx = Stream(seed, 1, t).sample_indices(len(consts), u)
    train_dom = sorted(consts[i] for i in train_idx)
    test_dom = sorted(consts[i] for i in test_idx)
    gamma_ex = restrict(aleph, test_dom)
    q_train = [c.q(train_dom) for c in counters]
    q_test = [c.q(test_dom) for c in counters]
    selected = max(range(len(hypotheses)), key=lambda i: (q_train[i], -i))
    mask_seed = Stream(seed, 2, t).raw1() >> 1
    m = Masker(masker.kind, masker.predicates, masker.p, mask_seed, masker.literals)
    masked = apply_mask(m, gamma_ex, vocabulary=set().union(*(h.vocabulary for h in hypotheses)) | {target})
    a = target.arity
    h = len(hypotheses)
    f_k, f_vote = [], []
    cols: dict[str, list] = {c: [] for c in BOUND_COLUMNS}
    for i, phi in enumerate(hypotheses):
        f_k.append(len(false_entailed(gamma_ex, masked, phi, k, target, positive_only=positive_only)))
        f_vote.append(None if gamma is None else len(
            false_entailed(gamma_ex, masked, phi, k, target, gamma=gamma, positive_only=positive_only)))
        qt, qs = float(q_test[i]), float(q_train[i])
        cols["prop3"].append(bounds.worst_case_k(qt, u, k, a))
        cols["prop4"].append(None if gamma is None else bounds.worst_case_voting(qt, u, k, a, float(gamma)))
        cols["thm7"].append(bounds.pac_realizable_expected(n, u, k, a, h, delta).value
                            if q_train[i] == 1 else None)
        cols["thm8"].append(bounds.pac_expected(qs, n, u, k, a, h, delta).value)
        actual = bounds.pac_actual(qs, n, u, k, a, h, delta)
        cols["thm9"].append(actual.value)
        cols["thm9_form2"].append(actual.extra["form2"])
        if gamma is None or gamma == 0:
            cols["thm10"].append(None)
            cols["thm10_fraction"].append(None)
        else:
            vb = bounds.pac_voting(qs, n, u, k, a, float(gamma), h, delta)
            cols["thm10"].append(vb.value)
            cols["thm10_fraction"].append(vb.extra["fraction"])
    flags = {
        "prop3": any(f > b for f, b in zip(f_k, cols["prop3"])),
        "prop4": gamma is not None and any(f > b for f, b in zip(f_vote, cols["prop4"])),
        "thm9": any(f > b for f, b in zip(f_k, cols["thm9"])),
        "thm10": cols["thm10"][0] is not None and any(f > b for f, b in zip(f_vote, cols["thm10"])),
    }
    return TrialRecord(t, group, seed, tuple(train_dom), tuple(test_dom), selected, q_train, q_test,
                       q_global, f_k, f_vote, cols, flags)


def run_pac_experiment(aleph: Example, hypotheses: Sequence[Theory], k: int, n: int, u: int,
                       masker: Masker, target: Predicate, trials: int, delta: float, seed: int,
                       gamma=None, inner: int = 1, positive_only: bool = False,
                       threads: int = 1) -> ExperimentResult:
    """Repeated train/test draws with error counts and every applicable bound.

    Trials come in groups of ``inner`` that share one training sample, so the
    group mean of |F| estimates the expected error the expected-error bounds
    speak about.
    """
    if not hypotheses:
        raise ValueError("empty hypothesis class")
    if trials < 1 or inner < 1:
        raise ValueError("trials and inner must be positive")
    if target.arity > k:
        raise ValueError(f"target arity {target.arity} exceeds k={k}")
    if n > len(aleph.domain) or u > len(aleph.domain):
        raise ValueError("sample sizes exceed the domain")
    if gamma is not None:
        gamma = Fraction(gamma)
    counters = [FragmentCounter(aleph, phi, k) for phi in hypotheses]
    q_global = [c.q() for c in counters]
    shared = (aleph, list(hypotheses), counters, q_global, k, n, u, masker, target, gamma, delta, seed,
              inner, positive_only)
    records = _run_trials(_pac_trial, shared, trials, threads)
    return ExperimentResult(records, summarize(records, len(hypotheses), delta, target, u, positive_only))


def summarize(records: list[TrialRecord], h_size: int, delta: float, target: Predicate, u: int,
              positive_only: bool = False) -> dict:
    trials = len(records)
    limit = delta + 3 * math.sqrt(delta * (1 - delta) / trials) if trials else None
    out: dict = {"schema": SCHEMA_VERSION, "trials": trials, "delta": delta, "allowed_rate": limit}
    rates = {}
    for flag in FLAG_COLUMNS:
        rates[flag] = sum(r.violations[flag] for r in records) / trials if trials else 0.0
    out["violation_rates"] = rates
    groups: dict[int, list[TrialRecord]] = {}
    for r in records:
        groups.setdefault(r.group, []).append(r)
    expected = {"thm7": 0, "thm8": 0}
    for members in groups.values():
        for i in range(h_size):
            mean_f = sum(r.f_k[i] for r in members) / len(members)
            b7 = members[0].bounds["thm7"][i]
            if b7 is not None and mean_f > b7:
                expected["thm7"] += 1
                break
        for i in range(h_size):
            mean_f = sum(r.f_k[i] for r in members) / len(members)
            if mean_f > members[0].bounds["thm8"][i]:
                expected["thm8"] += 1
                break
    ng = len(groups)
    out["groups"] = ng
    out["expected_violation_rates"] = {k: (v / ng if ng else 0.0) for k, v in expected.items()}
    out["pass"] = {
        "prop3": rates["prop3"] == 0,
        "prop4": rates["prop4"] == 0,
        "thm9": trials > 0 and rates["thm9"] <= limit,
        "thm10": trials > 0 and rates["thm10"] <= limit,
        "thm7": ng > 0 and out["expected_violation_rates"]["thm7"] <= delta,
        "thm8": ng > 0 and out["expected_violation_rates"]["thm8"] <= delta,
    }
    out["mean_f_k"] = [sum(r.f_k[i] for r in records) / trials if trials else 0.0 for i in range(h_size)]
    if records and records[0].f_vote[0] is not None:
        out["mean_f_vote"] = [sum(r.f_vote[i] for r in records) / trials for i in range(h_size)]
    out["selected_counts"] = [sum(r.selected == i for r in records) for i in range(h_size)]
    out["literal_count"] = bounds.literal_count(u, target.arity, positive_only)
    return out


# ---------------------------------------------------------------------------
# Reports


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def trial_columns(h_size: int) -> list[str]:
    cols = ["trial", "group", "seed", "train_size", "train_digest", "test_domain", "selected"]
    for i in range(h_size):
        cols += [f"q_train_{i}", f"q_test_{i}", f"q_global_{i}", f"f_k_{i}", f"f_vote_{i}"]
        cols += [f"{b}_{i}" for b in BOUND_COLUMNS]
    cols += [f"violation_{f}" for f in FLAG_COLUMNS]
    return cols


def trials_csv(records: list[TrialRecord], h_size: int) -> str:
    import hashlib

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trial_columns(h_size))
    for r in records:
        row = [r.trial, r.group, r.seed, len(r.train_domain),
               hashlib.sha256(" ".join(r.train_domain).encode()).hexdigest()[:16],
               " ".join(r.test_domain), r.selected]
        for i in range(h_size):
            row += [_frac(r.q_train[i]), _frac(r.q_test[i]), _frac(r.q_global[i]), r.f_k[i],
                    "" if r.f_vote[i] is None else r.f_vote[i]]
            row += [_num(r.bounds[b][i]) for b in BOUND_COLUMNS]
        row += [int(r.violations[f]) for f in FLAG_COLUMNS]
        w.writerow(row)
    return buf.getvalue()


def summary_json(summary: dict, config: dict | None = None) -> str:
    doc = dict(summary)
    if config is not None:
        doc["config"] = config
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def count_errors_report(result: ExperimentResult, h_size: int, out_dir, config: dict | None = None):
    """Write trials.csv and summary.json into ``out_dir``; returns the two paths."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / "trials.csv", out / "summary.json"
    csv_path.write_text(trials_csv(result.records, h_size))
    json_path.write_text(summary_json(result.summary, config))
    return csv_path, json_path


# ---------------------------------------------------------------------------
# Constant elimination


def _aux_name(atom: Atom) -> str:
    return atom.pred + "".join(f"__{i + 1}_{c}" for i, c in enumerate(atom.args) if c[:1].islower())


def _rewrite(m, mapping: dict[Atom, Atom]):
    if isinstance(m, Atom):
        return mapping.get(m, m)
    if isinstance(m, Not):
        return Not(_rewrite(m.arg, mapping))
    if isinstance(m, And):
        return And(tuple(_rewrite(a, mapping) for a in m.args))
    if isinstance(m, Or):
        return Or(tuple(_rewrite(a, mapping) for a in m.args))
    if isinstance(m, Implies):
        return Implies(_rewrite(m.lhs, mapping), _rewrite(m.rhs, mapping))
    return Iff(_rewrite(m.lhs, mapping), _rewrite(m.rhs, mapping))


def eliminate_constants(theory: Theory, example: Example) -> tuple[Theory, Example]:
    """Replace atoms mentioning constants by auxiliary predicates over their variable positions.

    ``fr(alice,X)`` becomes ``fr__1_alice(X)``, and the example gains
    ``fr__1_alice(d)`` for every ``fr(alice,d)`` it contains.  Auxiliary
    atoms keep one argument per variable position, repeats included.
    """
    outside = theory.constants() - example.domain
    if outside:
        raise ValueError(f"theory constants outside the domain: {', '.join(sorted(outside))}")
    taken = {p.name for p in theory.vocabulary} | {p.name for p in example.predicates}
    mapping: dict[Atom, Atom] = {}
    patterns: dict[str, tuple] = {}
    for f in theory.formulas:
        for atom in matrix_atoms(f.matrix):
            if not atom.constants() or atom in mapping:
                continue
            name = _aux_name(atom)
            if name in taken:
                raise ValueError(f"auxiliary predicate {name} collides with the vocabulary")
            shape = tuple(a if a[:1].islower() else None for a in atom.args)
            if name in patterns and patterns[name] != (atom.pred, shape):
                raise ValueError(f"auxiliary predicate {name} is ambiguous")
            patterns[name] = (atom.pred, shape)
            mapping[atom] = Atom(name, tuple(a for a in atom.args if a[:1].isupper()))
    if not mapping:
        return theory, example
    rewritten = Theory(tuple(Formula(f.prefix, _rewrite(f.matrix, mapping)) for f in theory.formulas))
    preds = set(example.predicates)
    extra = set()
    for name, (pred, shape) in patterns.items():
        preds.add(Predicate(name, shape.count(None)))
        for atom in example.atoms:
            if atom.pred != pred or len(atom.args) != len(shape):
                continue
            if all(c is None or c == v for c, v in zip(shape, atom.args)):
                extra.add(Atom(name, tuple(v for c, v in zip(shape, atom.args) if c is None)))
    return rewritten, Example(example.domain, example.atoms | frozenset(extra), frozenset(preds))


def load_hypotheses(text: str) -> list[Theory]:
    """Hypothesis file: theories separated by lines consisting of ``---``."""
    blocks, cur = [], []
    for line in text.splitlines():
        if line.strip() == "---":
            blocks.append("\n".join(cur))
            cur = []
        else:
            cur.append(line)
    blocks.append("\n".join(cur))
    theories = [parse_theory(b, require_constant_free=True) for b in blocks]
    return [t for t in theories if len(t)]


# ---------------------------------------------------------------------------
# Experiment configuration


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat key-value description of one PAC experiment."""

    scenario: str = "rare-clique"
    domain: int = 10_000
    hypotheses: str = "builtin:rare"
    target: str = "rare/1"
    n: int = 2000
    u: int = 40
    k: int = 2
    a: int = 1
    gamma: str | None = "1/10"
    mask: str = "positive-only"
    mask_p: float = 1.0
    positive_only: bool = False
    trials: int = 2000
    inner: int = 50
    delta: float = 0.05
    seed: int = 1
    density: float = 0.1
    output: str = "out"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if Predicate.parse(self.target).arity != self.a:
            raise ValueError(f"target {self.target} does not have arity a={self.a}")
        if self.trials % self.inner:
            raise ValueError("trials must be a multiple of inner")

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "ExperimentConfig":
        kinds = {f.name: f.type for f in cls.__dataclass_fields__.values()}
        unknown = set(values) - set(kinds)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        out = {}
        for key, raw in values.items():
            kind = kinds[key]
            if kind == "int":
                out[key] = int(raw)
            elif kind == "float":
                out[key] = float(raw)
            elif kind == "bool":
                if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(f"{key} must be a boolean")
                out[key] = raw.lower() in ("true", "1", "yes")
            elif key == "gamma":
                out[key] = None if raw.lower() in ("", "none") else str(Fraction(raw))
            else:
                out[key] = raw
        return cls(**out)

    def as_dict(self) -> dict:
        return asdict(self)

    def load_hypotheses(self, base_dir=".") -> list[Theory]:
        from pathlib import Path

        if self.hypotheses == "builtin:rare":
            return [parse_theory(t) for t in RARE_HYPOTHESES]
        if self.hypotheses == "builtin:scenario":
            return [parse_theory(SCENARIOS[self.scenario].theory)]
        return load_hypotheses((Path(base_dir) / self.hypotheses).read_text())

    def run(self, base_dir=".", threads: int = 1) -> ExperimentResult:
        aleph = SCENARIOS[self.scenario].generate(self.domain, seed=self.seed, density=self.density)
        masker = Masker(self.mask, p=self.mask_p, seed=self.seed)
        return run_pac_experiment(aleph, self.load_hypotheses(base_dir), self.k, self.n, self.u, masker,
                                  Predicate.parse(self.target), self.trials, self.delta, self.seed,
                                  gamma=self.gamma, inner=self.inner, positive_only=self.positive_only,
                                  threads=threads)


def read_experiment_config(path) -> ExperimentConfig:
    """INI file with a single ``[experiment]`` section."""
    import configparser

    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section("experiment"):
        raise ValueError(f"{path}: missing [experiment] section")
    return ExperimentConfig.from_mapping(dict(parser.items("experiment")))
