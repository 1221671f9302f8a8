"""Command-line entry point.

JSON (``--format json``) and CSV outputs are the stable surface; text output
is for people.  Exit codes: 0 success, 1 domain or I/O error (JSON error on
stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds, harness
from .fragments import format_example, parse_example, q_exact, q_monte_carlo
from .logic import Literal, ParseError, Predicate, format_theory, parse_theory
from .masking import Masker, apply_mask, format_masked, parse_masked
from .reasoner import false_entailed, is_true, k_entailed_literals, voting_entailed_literals

SCHEMA_VERSION = "relpac.cli/1"


class DomainError(Exception):
    pass


def load_schema(name: str) -> dict:
    """Published JSON schema: ``output``, ``error`` or ``summary``."""
    from importlib.resources import files

    return json.loads(files("relpac").joinpath("schemas", f"{name}.schema.json").read_text())


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path: str | Path, text: str) -> None:
    p = Path(path)
    if p.parent != Path("."):
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _frac(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "format")}


def _emit(args, result: dict, text: str) -> None:
    if args.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": _config(args),
               "result": result}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# commands ---------------------------------------------------------------------


def cmd_q(args) -> None:
    example = parse_example(_read(args.example))
    theory = parse_theory(_read(args.theory), require_constant_free=True)
    if args.mc:
        est = q_monte_carlo(example, args.k, theory, args.trials, args.seed)
        result = {"mode": "monte-carlo", "value": float(est.value), "hits": est.numerator,
                  "trials": est.denominator, "k": args.k, "digest": est.digest}
        text = repr(float(est.value))
    else:
        est = q_exact(example, args.k, theory, budget=args.budget)
        result = {"mode": "exact", "value": _frac(est.value), "float": float(est.value),
                  "numerator": est.numerator, "denominator": est.denominator, "k": args.k,
                  "method": est.method, "digest": est.digest}
        text = _frac(est.value)
    _emit(args, result, text)


def _masker(args) -> Masker:
    preds = tuple(args.predicates.split(",")) if args.predicates else None
    lits = ()
    if args.kind == "literal-list":
        if not args.literals:
            raise DomainError("--kind literal-list needs --literals FILE")
        lits = tuple(sorted(parse_masked(_read(args.literals)).literals))
    return Masker(args.kind, preds, args.p, args.seed, lits)


def cmd_mask(args) -> None:
    example = parse_example(_read(args.example))
    masked = apply_mask(_masker(args), example)
    body = format_masked(masked)
    if args.out:
        _write(args.out, body)
    _emit(args, {"domain": list(masked.constants), "literals": [str(l) for l in sorted(masked.literals)]},
          body if not args.out else f"wrote {len(masked)} literals to {args.out}")


def _entailment(args, masked, theory):
    target = Predicate.parse(args.target)
    if args.mode == "vote" and args.gamma is None:
        raise DomainError("--mode vote needs --gamma")
    if args.mode == "k" and args.gamma is not None:
        raise DomainError("--gamma only applies to --mode vote")
    if args.mode == "vote" or args.gamma is not None:
        return voting_entailed_literals(masked, theory, args.k, Fraction(args.gamma), target,
                                        args.positive_only)
    return k_entailed_literals(masked, theory, args.k, target, args.positive_only)


def cmd_infer(args) -> None:
    masked = parse_masked(_read(args.masked))
    theory = parse_theory(_read(args.theory), require_constant_free=True)
    example = parse_example(_read(args.example)) if args.example else None
    if example is not None and example.domain != masked.domain:
        raise DomainError("the example and the masked example have different domains")
    res = _entailment(args, masked, theory)
    rows = []
    for lit in sorted(res.literals):
        row = {"literal": str(lit), "positive": lit.positive}
        if res.mode == "vote":
            row["votes"] = res.votes[lit]
        else:
            row["witness"] = list(res.witnesses[lit])
        if example is not None:
            row["true"] = is_true(example, lit)
        rows.append(row)
    result = {"mode": res.mode, "k": res.k, "literals": rows}
    if res.mode == "vote":
        result["threshold"] = _frac(res.threshold)
        result["gamma"] = _frac(res.gamma)
    lines = [r["literal"] + (f"\tvotes={r['votes']}" if "votes" in r else "\t{" + ",".join(r["witness"]) + "}")
             + ("" if "true" not in r else ("\ttrue" if r["true"] else "\tFALSE")) for r in rows]
    _emit(args, result, "\n".join(lines) if lines else "(none)")


def cmd_errors(args) -> None:
    example = parse_example(_read(args.example))
    theory = parse_theory(_read(args.theory), require_constant_free=True)
    if args.masked:
        masked = parse_masked(_read(args.masked))
    else:
        masked = apply_mask(_masker(args), example)
    target = Predicate.parse(args.target)
    if args.mode == "vote" and args.gamma is None:
        raise DomainError("--mode vote needs --gamma")
    gamma = None if args.gamma is None else Fraction(args.gamma)
    errs = false_entailed(example, masked, theory, args.k, target, gamma, args.positive_only)
    q = q_exact(example, args.k, theory).value
    u, a = len(example.domain), target.arity
    worst = (bounds.worst_case_k(float(q), u, args.k, a) if gamma is None
             else bounds.worst_case_voting(float(q), u, args.k, a, float(gamma)))
    result = {"count": len(errs), "false_literals": [str(l) for l in sorted(errs)], "q": _frac(q),
              "worst_case_bound": worst, "literal_count": bounds.literal_count(u, a, args.positive_only)}
    _emit(args, result, "\n".join([f"|F| = {len(errs)}  (worst-case bound {worst:.6g})"]
                                  + [str(l) for l in sorted(errs)]))


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise DomainError(f"--theorem {args.theorem} needs " + ", ".join("--" + m for m in missing))


def cmd_bounds(args) -> None:
    t = args.theorem
    two = not args.one_sided
    if t == "prop3":
        _need(args, "q", "c", "k", "a")
        rep = bounds.BoundReport(t, bounds.worst_case_k(args.q, args.c, args.k, args.a),
                                 {"Q": args.q, "C": args.c, "k": args.k, "a": args.a},
                                 bounds.literal_count(args.c, args.a, args.positive_only))
    elif t == "prop4":
        _need(args, "q", "c", "k", "a", "gamma")
        rep = bounds.BoundReport(t, bounds.worst_case_voting(args.q, args.c, args.k, args.a, args.gamma),
                                 {"Q": args.q, "C": args.c, "k": args.k, "a": args.a, "gamma": args.gamma},
                                 bounds.literal_count(args.c, args.a, args.positive_only))
    elif t == "tail1":
        _need(args, "n", "k", "eps")
        rep = bounds.BoundReport(t, bounds.tail_one_sample(args.n, args.k, args.eps, two),
                                 {"n": args.n, "k": args.k, "eps": args.eps, "two_sided": two})
    elif t == "tail2":
        _need(args, "n", "u", "k", "eps")
        rep = bounds.BoundReport(t, bounds.tail_two_sample(args.n, args.u, args.k, args.eps, two),
                                 {"n": args.n, "u": args.u, "k": args.k, "eps": args.eps, "two_sided": two})
    elif t == "tailr":
        _need(args, "n", "k", "eps")
        rep = bounds.BoundReport(t, bounds.tail_realizable(args.n, args.k, args.eps),
                                 {"n": args.n, "k": args.k, "eps": args.eps})
    else:
        _need(args, "n", "u", "k", "a", "H", "delta")
        common = dict(n=args.n, u=args.u, k=args.k, a=args.a, h_size=args.H, delta=args.delta,
                      positive_only=args.positive_only)
        if t == "thm7":
            rep = bounds.pac_realizable_expected(**common)
        else:
            _need(args, "q")
            if t == "thm8":
                rep = bounds.pac_expected(args.q, **common)
            elif t == "thm9":
                rep = bounds.pac_actual(args.q, **common)
            else:
                _need(args, "gamma")
                rep = bounds.pac_voting(args.q, gamma=args.gamma, **common)
    _emit(args, rep.as_dict(), f"{rep.value:.6g}" + ("  (vacuous)" if rep.vacuous else ""))


def cmd_generate(args) -> None:
    example = harness.SCENARIOS[args.scenario].generate(args.n, seed=args.seed, density=args.density,
                                                         vocab=args.vocab)
    _write(args.out, format_example(example))
    _emit(args, {"out": args.out, "constants": len(example.domain), "atoms": len(example.atoms),
                 "digest": example.digest}, f"wrote {args.out} ({len(example.atoms)} atoms)")


def cmd_experiment(args) -> None:
    cfg = harness.read_experiment_config(args.config)
    overrides = {k: getattr(args, k) for k in ("trials", "seed", "output") if getattr(args, k) is not None}
    if overrides:
        cfg = harness.ExperimentConfig(**{**cfg.as_dict(), **overrides})
    h = cfg.load_hypotheses(Path(args.config).parent)
    result = cfg.run(Path(args.config).parent, threads=args.threads)
    csv_path, json_path = harness.count_errors_report(result, len(h), cfg.output, cfg.as_dict())
    s = result.summary
    text = [f"trials={s['trials']} groups={s['groups']} allowed violation rate={s['allowed_rate']:.4f}"]
    text += [f"{name:6s} violation rate {rate:.4f}" for name, rate in s["violation_rates"].items()]
    text += [f"{name:6s} group violation rate {rate:.4f}" for name, rate in s["expected_violation_rates"].items()]
    text += [f"pass: {', '.join(k for k, v in s['pass'].items() if v)}",
             f"fail: {', '.join(k for k, v in s['pass'].items() if not v) or '-'}",
             f"wrote {csv_path} and {json_path}"]
    _emit(args, {"summary": s, "csv": str(csv_path), "json": str(json_path), "experiment": cfg.as_dict()},
          "\n".join(text))


def cmd_concentration(args) -> None:
    if args.example:
        if not args.theory:
            raise DomainError("--example needs --theory")
        aleph = parse_example(_read(args.example))
        theory = parse_theory(_read(args.theory), require_constant_free=True)
    else:
        sc = harness.SCENARIOS[args.scenario]
        aleph = sc.generate(args.domain, seed=args.seed, density=args.density)
        theory = parse_theory(_read(args.theory) if args.theory else sc.theory)
    eps = [float(e) for e in args.eps.split(",")]
    rep = harness.validate_concentration(aleph, theory, args.k, args.n, eps, args.trials, args.seed,
                                         u=args.u, threads=args.threads)
    checks = [{"label": c[0], "empirical": c[1], "bound": c[2], "ok": c[3]} for c in rep.checks()]
    ref = _frac(rep.reference) if rep.reference_mode == "exact" else rep.reference
    result = {"reference": ref, "reference_mode": rep.reference_mode, "rows": rep.rows,
              "realizable": rep.realizable, "checks": checks, "ok": rep.ok}
    lines = [f"A = {ref} ({rep.reference_mode}), n={rep.n}, k={rep.k}, trials={rep.trials}"]
    lines += [f"{c['label']:32s} {c['empirical']:.4f} <= {c['bound']:.4g}  {'ok' if c['ok'] else 'FAIL'}"
              for c in checks]
    _emit(args, result, "\n".join(lines))
    if not rep.ok:
        raise SystemExit(1)


def cmd_transform(args) -> None:
    theory = parse_theory(_read(args.theory))
    example = parse_example(_read(args.example))
    new_theory, new_example = harness.eliminate_constants(theory, example)
    th_path, ex_path = f"{args.out_prefix}.th", f"{args.out_prefix}.ex"
    _write(th_path, format_theory(new_theory))
    _write(ex_path, format_example(new_example))
    aux = sorted(p.name for p in new_example.predicates - example.predicates)
    _emit(args, {"theory": th_path, "example": ex_path, "auxiliary": aux},
          f"wrote {th_path} and {ex_path}; auxiliary predicates: {', '.join(aux) or '-'}")


def cmd_selftest(args) -> None:
    from .selftest import run_checks

    rows = run_checks()
    ok = all(r["ok"] for r in rows)
    width = max(len(r["name"]) for r in rows)
    lines = [f"{r['name']:{width}s}  {'PASS' if r['ok'] else 'FAIL'}  expected {r['expected']}, got {r['got']}"
             for r in rows]
    lines.append(f"{sum(r['ok'] for r in rows)}/{len(rows)} passed")
    _emit(args, {"checks": rows, "ok": ok}, "\n".join(lines))
    if not ok:
        raise SystemExit(1)


# parser -----------------------------------------------------------------------


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                        help="worker processes for trial loops (results do not depend on it)")

    parser = argparse.ArgumentParser(prog="relpac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("q", parents=[common], help="fraction of size-k fragments satisfying a theory")
    p.add_argument("--example", required=True)
    p.add_argument("--theory", required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    how = p.add_mutually_exclusive_group()
    how.add_argument("--exact", action="store_true", help="exact rational (default)")
    how.add_argument("--mc", action="store_true", help="Monte Carlo estimate")
    p.add_argument("--trials", type=_positive_int, default=10_000, help="Monte Carlo draws")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None, help="max fragment evaluations for --exact")
    p.set_defaults(func=cmd_q)

    def mask_flags(p, required):
        p.add_argument("--kind", choices=("identity", "positive-only", "random-drop", "literal-list"),
                       required=required, default=None if required else "identity")
        p.add_argument("--pred", "--predicates", dest="predicates", help="comma-separated predicate names (positive-only)")
        p.add_argument("--p", type=float, default=1.0, help="keep probability (random-drop)")
        p.add_argument("--literals", help="masked-example file listing the kept literals")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("mask", parents=[common], help="apply a masking process to an example")
    p.add_argument("--example", required=True)
    mask_flags(p, True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mask)

    def infer_flags(p):
        p.add_argument("--theory", required=True)
        p.add_argument("--k", type=_positive_int, required=True)
        p.add_argument("--target", required=True, help="target predicate as name/arity")
        p.add_argument("--gamma", help="voting parameter (rational); omit for k-entailment")
        p.add_argument("--positive-only", action="store_true", help="only positive target literals")
        p.add_argument("--mode", choices=("k", "vote"), help="defaults to vote when --gamma is given")

    p = sub.add_parser("infer", parents=[common], help="k-entailed or voting-entailed target literals")
    p.add_argument("--mask", "--masked", dest="masked", required=True, help="masked example file")
    p.add_argument("--example", help="complete example, to report each literal's truth")
    infer_flags(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("errors", parents=[common], help="entailed target literals that are false")
    p.add_argument("--example", required=True)
    p.add_argument("--mask", "--masked", dest="masked", help="masked example file; otherwise --kind masks the example")
    infer_flags(p)
    mask_flags(p, False)
    p.set_defaults(func=cmd_errors)

    p = sub.add_parser("bounds", parents=[common], help="evaluate an error bound or tail")
    p.add_argument("--theorem", required=True,
                   choices=("prop3", "prop4", "thm7", "thm8", "thm9", "thm10", "tail1", "tail2", "tailr"))
    for name, kind in (("q", float), ("c", int), ("n", int), ("u", int), ("k", int), ("a", int),
                       ("gamma", float), ("H", int), ("delta", float), ("eps", float)):
        p.add_argument(f"--{name}", type=kind)
    p.add_argument("--one-sided", action="store_true")
    p.add_argument("--positive-only", action="store_true", help="count positive literals for vacuity")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("generate", parents=[common], help="write a scenario example")
    p.add_argument("--scenario", choices=sorted(harness.SCENARIOS), required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=0.1)
    p.add_argument("--vocab", default="p/1 q/1 r/2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("experiment", parents=[common], help="run a PAC experiment from an INI config")
    p.add_argument("--config", required=True)
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("concentration", parents=[common], help="empirical tails against their bounds")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", choices=sorted(harness.SCENARIOS))
    src.add_argument("--example")
    p.add_argument("--theory")
    p.add_argument("--domain", type=_positive_int, default=2000, help="scenario size")
    p.add_argument("--density", type=float, default=0.1)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--u", type=_positive_int)
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--eps", default="0.02,0.05,0.1,0.2")
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_concentration)

    p = sub.add_parser("transform", parents=[common], help="theory/example transforms")
    tsub = p.add_subparsers(dest="transform", required=True)
    e = tsub.add_parser("eliminate-constants", parents=[common],
                        help="replace constants in a theory by auxiliary predicates")
    e.add_argument("--theory", required=True)
    e.add_argument("--example", required=True)
    e.add_argument("--out-prefix", required=True)
    e.set_defaults(func=cmd_transform)

    p = sub.add_parser("selftest", parents=[common], help="run the worked examples and print a table")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (DomainError, ParseError, ValueError, ArithmeticError, OSError) as exc:
        err = {"schema_version": SCHEMA_VERSION, "error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
