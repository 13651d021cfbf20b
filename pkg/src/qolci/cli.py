"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 infeasible interval.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dataio
from .coverage import coverage_report, mc_coverage
from .errors import DataError, DomainError, IntervalInfeasible, QolciError
from .exact import (
    POLICIES,
    DesignCounts,
    as_fraction,
    find_interval,
    format_probability,
    parse_quantile,
    pmf_table,
    resolve_policy,
)
from .experiment import (
    DEMO_SPEC,
    SynthSpec,
    demo_experiment,
    observe,
    randomize,
    sharp_null_population,
    synth_population,
)
from .ordering import parse_cut
from .report import DEFAULT_QUANTILES, analyze, render_csv, render_json, render_table

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _split_quantiles(text: str) -> list[str]:
    return [q for q in (s.strip() for s in text.split(",")) if q]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qolci",
        description="Exact randomization confidence sets for quantiles of outcomes censored by death.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="confidence sets for quantiles of an observed dataset")
    a.add_argument("--input", required=True, help="CSV with header id,arm,status,qol")
    a.add_argument("--alpha", default="0.05")
    a.add_argument("--cut", action="append", default=None,
                   help="death placement: -inf, +inf or a number (repeatable; default -inf)")
    a.add_argument("--quantiles", default=",".join(DEFAULT_QUANTILES),
                   help="comma-separated fractions, e.g. 1/8,1/4,1/2")
    a.add_argument("--policy", default="paper", choices=POLICIES)
    a.add_argument("--format", default="table", choices=("json", "table", "csv"))

    iv = sub.add_parser("interval", help="rank interval for a design")
    iv.add_argument("--i", type=int, required=True)
    iv.add_argument("--n", type=int, required=True)
    iv.add_argument("--m", type=int, required=True)
    iv.add_argument("--alpha", default="0.05")
    iv.add_argument("--policy", default="paper", choices=POLICIES)
    iv.add_argument("--digits", type=int, default=12, help="significant digits for probabilities")

    pm = sub.add_parser("pmf", help="distribution of controls below the counterfactual order statistic")
    pm.add_argument("--i", type=int, required=True)
    pm.add_argument("--n", type=int, required=True)
    pm.add_argument("--m", type=int, required=True)
    pm.add_argument("--exact", action="store_true", help="print exact fractions")

    s = sub.add_parser("simulate", help="draw a synthetic population and one randomized experiment")
    s.add_argument("--spec", default="demo", help="JSON population recipe, or 'demo'")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n", type=int, default=None, help="treated count (default N//2)")
    s.add_argument("--out", required=True, help="observed dataset CSV to write")
    s.add_argument("--population-out", default=None, help="also write the potential outcomes CSV")
    s.add_argument("--fixed-demo", action="store_true",
                   help="write the deterministic 325/325 demo dataset instead of simulating")

    c = sub.add_parser("coverage", help="Monte Carlo coverage of the confidence set")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="population CSV, or observed CSV (sharp null is assumed)")
    src.add_argument("--spec", help="JSON population recipe, or 'demo'")
    c.add_argument("--i", type=int, required=True)
    c.add_argument("--n", type=int, default=None, help="treated count (default N//2)")
    c.add_argument("--alpha", default="0.05")
    c.add_argument("--cut", default="-inf")
    c.add_argument("--policy", default="paper", choices=POLICIES)
    c.add_argument("--trials", type=int, default=10_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--format", default="json", choices=("json", "table"))
    return p


def _alpha(text: str):
    try:
        alpha = as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad --alpha {text!r}") from None
    if not 0 < alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    return alpha


def _load_spec(text: str) -> SynthSpec:
    if text == "demo":
        return DEMO_SPEC
    try:
        raw = json.loads(Path(text).read_text())
    except OSError as exc:
        raise DataError(f"cannot read spec {text}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"spec {text} is not valid JSON: {exc}") from None
    try:
        return SynthSpec.from_dict(raw)
    except (DomainError, TypeError) as exc:
        raise DataError(f"bad population spec: {exc}") from None


def _cmd_analyze(args, out) -> int:
    alpha = _alpha(args.alpha)
    try:
        placements = [parse_cut(c) for c in (args.cut or ["-inf"])]
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    quantiles = _split_quantiles(args.quantiles)
    try:
        for q in quantiles:
            parse_quantile(q)
    except (DomainError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --quantiles: {exc}") from None
    obs = dataio.ingest_csv(args.input)
    report = analyze(obs, alpha, placements, quantiles, args.policy).to_dict()
    render = {"json": render_json, "table": render_table, "csv": render_csv}[args.format]
    out.write(render(report))
    bad = [r for r in report["rows"] if "max_event_coverage" in r]
    return EXIT_INFEASIBLE if bad else EXIT_OK


def _cmd_interval(args, out) -> int:
    alpha = _alpha(args.alpha)
    try:
        d = DesignCounts(args.n, args.m)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if not 1 <= args.i <= d.n:
        raise UsageError(f"--i must lie in 1..{d.n}")
    fmt = lambda x: format_probability(x, args.digits)
    try:
        iv = find_interval(args.i, d, alpha, args.policy)
    except IntervalInfeasible as exc:
        out.write(f"infeasible: {exc}\n")
        out.write(f"max_event_coverage: {fmt(exc.max_event_coverage)}\n")
        out.write(f"max_eq1_coverage: {fmt(exc.max_eq1_coverage)}\n")
        return EXIT_INFEASIBLE
    out.write(f"design: N={d.N} n={d.n} m={d.m} i={args.i} alpha={args.alpha} "
              f"policy={args.policy} ({resolve_policy(args.policy)})\n")
    out.write(f"interval: ({iv.a}, {iv.b})\n")
    out.write(f"eq1_coverage: {fmt(iv.printed_coverage)}\n")
    out.write(f"event_coverage: {fmt(iv.event_coverage)}\n")
    out.write(f"conservative_coverage: {fmt(iv.conservative_coverage)}\n")
    return EXIT_OK


def _cmd_pmf(args, out) -> int:
    try:
        d = DesignCounts(args.n, args.m)
        probs = pmf_table(args.i, d)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if args.exact:
        out.write(" ".join(str(p) for p in probs) + "\n")
    else:
        out.write(" ".join(format_probability(p) for p in probs) + "\n")
    return EXIT_OK


def _cmd_simulate(args, out) -> int:
    if args.fixed_demo:
        dataio.write_dataset(demo_experiment(), args.out)
        out.write(f"wrote demo dataset to {args.out}\n")
        return EXIT_OK
    spec = _load_spec(args.spec)
    pop = synth_population(spec)
    n = pop.N // 2 if args.n is None else args.n
    try:
        z = randomize(pop.N, n, args.seed)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    obs = observe(pop, z)
    dataio.write_dataset(obs, args.out)
    if args.population_out:
        dataio.write_population(pop, args.population_out)
    deaths_t = sum(1 for zi, x in zip(obs.z, obs.outcomes) if zi and str(x) == "D")
    deaths_c = sum(1 for zi, x in zip(obs.z, obs.outcomes) if not zi and str(x) == "D")
    out.write(f"wrote {obs.N} rows to {args.out} (treated {obs.n}, deaths {deaths_t}; "
              f"control {obs.m}, deaths {deaths_c})\n")
    return EXIT_OK


def _cmd_coverage(args, out) -> int:
    alpha = _alpha(args.alpha)
    try:
        placement = parse_cut(args.cut)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if args.input:
        header = dataio.sniff_header(args.input)
        if header == dataio.POPULATION_HEADER:
            pop = dataio.read_population(args.input)
            described = {"source": "population_csv", "path": args.input, "N": pop.N}
        else:
            obs = dataio.ingest_csv(args.input)
            pop = sharp_null_population(obs)
            described = {"source": "observed_csv_sharp_null", "path": args.input, "N": pop.N}
    else:
        spec = _load_spec(args.spec)
        pop = synth_population(spec)
        described = {"source": "synthetic", "spec": spec.to_dict(), "N": pop.N}
    n = pop.N // 2 if args.n is None else args.n
    if not 1 <= n < pop.N:
        raise UsageError(f"--n must lie in 1..{pop.N - 1}")
    if not 1 <= args.i <= n:
        raise UsageError(f"--i must lie in 1..{n}")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    est = mc_coverage(pop, args.i, alpha, placement, args.policy, args.trials, args.seed,
                      n=n, workers=args.workers)
    report = coverage_report(est, population=described, i=args.i, alpha=format_probability(alpha),
                             placement=placement, policy=args.policy, seed=args.seed, n=n)
    if args.format == "json":
        out.write(render_json(report))
    else:
        for key in ("trials", "infeasible_trials", "hits", "estimate", "standard_error", "lower_bound"):
            out.write(f"{key}: {report[key]}\n")
        if report["interval"]:
            out.write(f"interval: ({report['interval']['a']}, {report['interval']['b']})\n")
    return EXIT_INFEASIBLE if est.trials == 0 else EXIT_OK


COMMANDS = {
    "analyze": _cmd_analyze,
    "interval": _cmd_interval,
    "pmf": _cmd_pmf,
    "simulate": _cmd_simulate,
    "coverage": _cmd_coverage,
}


def _glue_cut_values(argv: list[str]) -> list[str]:
    # argparse reads "--cut -inf" as two options; bind the value explicitly.
    out, k = [], 0
    while k < len(argv):
        if argv[k] == "--cut" and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"--cut={argv[k + 1]}")
            k += 2
        else:
            out.append(argv[k])
            k += 1
    return out


def run_cli(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    argv = _glue_cut_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"qolci {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        err.write(f"qolci {args.command}: data error: {exc}\n")
        return EXIT_DATA
    except IntervalInfeasible as exc:
        err.write(f"qolci {args.command}: {exc}\n")
        return EXIT_INFEASIBLE
    except QolciError as exc:
        err.write(f"qolci {args.command}: data error: {exc}\n")
        return EXIT_DATA


def main():
    sys.exit(run_cli())
