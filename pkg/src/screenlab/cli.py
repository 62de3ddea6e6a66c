"""Command-line front end.

Exit status: 0 success, 1 failed acceptance check, 2 invalid config,
arguments or input file, 3 runtime failure (for example a zero first stage).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from . import io
from .config import DEFAULT_ALPHA, DEFAULT_N_BOOT, load_config
from .diagnostics import recommend, retention_test, tnr_test
from .dgp import DiscreteDgpConfig, generate_discrete
from .errors import (
    ConfigError,
    InvalidConfig,
    InvalidRetention,
    SchemaError,
    ScreenlabError,
)
from .estimators import estimate
from .montecarlo import run_scenario, size_power_run, summarize
from .power import PowerSpec, gain_report
from .screening import ScreenMechanism, apply_screen
from .verify import DEFAULT_SEED, SUITES, run_suite

SEED_ENV = "SCREENLAB_SEED"

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


class _UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"screenlab: {msg}", file=sys.stderr)


def resolve_seed(flag, fallback: int) -> int:
    """``--seed`` wins, then ``$SCREENLAB_SEED``, then the fallback."""
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV, "").strip()
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return fallback


def _fmt(x, width=10, prec=5):
    return f"{x:>{width}.{prec}f}" if x is not None else " " * (width - 1) + "-"


def _summary_table(summary) -> str:
    head = f"{'mechanism':<18}{'kept':>7}{'mean':>10}{'sd':>10}{'mean se':>10}{'med|bias|':>10}{'discard':>9}"
    lines = [head, "-" * len(head)]
    for label, m in summary.mechanisms.items():
        lines.append(
            f"{label:<18}{m.n_kept:>7}{_fmt(m.mean_beta_hat)}{_fmt(m.empirical_sd)}"
            f"{_fmt(m.mean_se)}{_fmt(m.median_abs_bias)}{m.discard_rate:>9.3f}"
        )
    if summary.diagnostic is not None:
        d = summary.diagnostic
        lines.append(
            f"{d.diagnostic}: rejection rate {d.rejection_rate:.3f} "
            f"(MCSE {d.rejection_rate_mcse:.3f}) over {d.n_ok} runs at alpha={d.alpha}"
        )
    return "\n".join(lines)


def _scenario_echo(sc) -> dict:
    return {
        "dgp_kind": sc.dgp.kind.value,
        "dgp": dataclasses.asdict(sc.dgp),
        "mechanisms": sc.labels,
        "population_sign": sc.population_sign,
        "apply_sign_screen": sc.apply_sign_screen,
        "n_reps": sc.n_reps,
        "base_seed": sc.base_seed,
    }


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    sc = cfg.scenario
    changes = {"base_seed": resolve_seed(args.seed, sc.base_seed)}
    if args.reps is not None:
        if args.reps < 1:
            raise ConfigError("--reps must be positive")
        changes["n_reps"] = args.reps
    sc = dataclasses.replace(sc, **changes)
    workers = args.workers if args.workers is not None else cfg.workers
    out_dir = Path(args.out if args.out is not None else cfg.out_dir)
    fmt = args.format or cfg.out_format

    table = run_scenario(sc, workers=workers)
    target = sc.dgp.beta if sc.is_gaussian else sc.dgp.beta_complier
    summary = summarize(table, target)
    if cfg.diagnostic is not None:
        dg = cfg.diagnostic
        summary.diagnostic = size_power_run(sc, dg.test, dg.alpha, dg.n_boot, workers=workers)

    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        io.write_rep_table_csv(table, out_dir / "reps.csv")
    else:
        io.write_rep_table_json(table, out_dir / "reps.json")
    io.dump_json({"scenario": _scenario_echo(sc), "summary": summary.to_dict()}, out_dir / "summary.json")
    if not args.quiet:
        print(_summary_table(summary))
        print(f"wrote {out_dir / ('reps.' + fmt)} and {out_dir / 'summary.json'}")
    return EXIT_OK


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    if not isinstance(cfg.dgp, DiscreteDgpConfig):
        raise ConfigError("generate needs a discrete DGP")
    sample = generate_discrete(cfg.dgp, resolve_seed(args.seed, cfg.scenario.base_seed))
    if args.drop_types:
        sample = sample.replace(true_type=None)
    io.write_dataset(sample, args.out)
    return EXIT_OK


def analyze_sample(sample, alpha, n_boot, seed, population_sign=1, method="centered") -> dict:
    """Build the analysis report for one dataset.

    A zero first stage on the full sample is fatal (raised); problems that
    only affect the screened estimate or a diagnostic are reported as notices.
    """
    notices = []
    report = {"n": len(sample), "alpha": alpha, "n_boot": n_boot, "seed": seed}
    report["unscreened"] = estimate(apply_screen(sample, ScreenMechanism.NO_SCREEN), population_sign)
    report["screened"] = None
    report["retention_test"] = None
    report["tnr_test"] = None
    report["recommendation"] = None
    if sample.stated_complier is None:
        notices.append("no stated_complier column: screened estimate and diagnostics skipped")
        report["notices"] = notices
        return report
    try:
        report["screened"] = estimate(apply_screen(sample, ScreenMechanism.STATED_COMPLIER), population_sign)
    except ScreenlabError as err:
        notices.append(f"screened estimate unavailable ({err.code}): {err}")
    retention = retention_test(sample, alpha, n_boot, seed, method)
    report["retention_test"] = retention
    report["recommendation"] = recommend(retention)
    try:
        report["tnr_test"] = tnr_test(sample, alpha, n_boot, seed, method)
    except ScreenlabError as err:
        notices.append(f"tnr test unavailable ({err.code}): {err}")
    report["notices"] = notices
    return report


def cmd_analyze(args) -> int:
    sample = io.read_dataset(args.dataset)
    seed = resolve_seed(args.seed, 0)
    report = analyze_sample(sample, args.alpha, args.n_boot, seed, args.population_sign, args.method)
    text = io.dump_json(report, args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        rec = report["recommendation"] or "n/a (no stated types)"
        print(f"recommendation: {rec}; report written to {args.out}")
    for note in report["notices"]:
        _err(f"notice: {note}")
    return EXIT_OK


def _gain_table(rep) -> str:
    lines = [
        f"first stage (complier share)  {rep.pi_hat:.4f}",
        f"optimal retention r           {rep.optimal_r:.4f}",
        f"se ratio sqrt(r)              {rep.optimal_se_ratio:.4f}",
        f"MDE reduction                 {rep.mde_reduction:.1%}",
    ]
    if rep.mde_unscreened is not None:
        lines.append(f"se unscreened                 {rep.se_unscreened:.5f}")
        lines.append(f"MDE unscreened / screened     {rep.mde_unscreened:.5f} / {rep.mde_screened:.5f}")
    if rep.candidates:
        lines.append(f"{'r':>8}{'se ratio':>10}{'MDE':>12}")
        for c in rep.candidates:
            mde = f"{c.mde:>12.5f}" if c.mde is not None else f"{'-':>12}"
            lines.append(f"{c.r:>8.3f}{c.se_ratio:>10.4f}{mde}")
    return "\n".join(lines)


def cmd_power(args) -> int:
    if not 0.0 < args.pi_hat <= 1.0:
        raise _UsageError(
            f"--pi-hat must lie in (0, 1], got {args.pi_hat}; a zero first stage has no compliers"
        )
    spec = PowerSpec(
        alpha=args.alpha,
        target_power=args.power,
        se_unscreened=args.se,
        n=args.n,
        sigma_u=args.sigma_u,
        q=args.q,
        r_candidates=tuple(args.r or ()),
    )
    rep = gain_report(args.pi_hat, spec)
    text = io.dump_json(rep.to_dict(), args.out)
    print(_gain_table(rep))
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = resolve_seed(args.seed, DEFAULT_SEED)
    print(f"suite {args.suite}, seed {seed}")
    results = run_suite(args.suite, seed=seed, workers=args.workers, echo=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="screenlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a Monte Carlo scenario from a config file")
    s.add_argument("config")
    s.add_argument("--seed", type=int, help=f"base seed (fallback: ${SEED_ENV}, then the config)")
    s.add_argument("--reps", type=int, help="override n_reps")
    s.add_argument("--out", help="output directory (default: [output] dir)")
    s.add_argument("--format", choices=("csv", "json"), help="RepTable format")
    s.add_argument("--workers", type=int, help="worker processes")
    s.add_argument("--quiet", action="store_true", help="suppress the summary table")
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("generate", help="write one simulated dataset CSV from a config's [dgp]")
    g.add_argument("config")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.add_argument("--drop-types", action="store_true", help="omit the true_type column")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="estimate and run diagnostics on a dataset CSV")
    a.add_argument("dataset")
    a.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    a.add_argument("--n-boot", type=int, default=DEFAULT_N_BOOT)
    a.add_argument("--seed", type=int)
    a.add_argument("--population-sign", choices=("+", "-"), default="+")
    a.add_argument("--method", choices=("centered", "percentile"), default="centered")
    a.add_argument("--out", help="report path (default: stdout)")
    a.set_defaults(func=cmd_analyze)

    w = sub.add_parser("power", help="predicted precision gain from screening")
    w.add_argument("--pi-hat", type=float, required=True)
    w.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    w.add_argument("--power", type=float, default=0.8)
    w.add_argument("--r", type=float, nargs="*", help="candidate retention fractions")
    w.add_argument("--se", type=float, help="unscreened standard error")
    w.add_argument("--n", type=int)
    w.add_argument("--sigma-u", type=float)
    w.add_argument("--q", type=float)
    w.add_argument("--out", help="JSON path (default: printed after the table)")
    w.set_defaults(func=cmd_power)

    v = sub.add_parser("verify", help="run acceptance checks")
    v.add_argument("--suite", choices=tuple(SUITES), default="all")
    v.add_argument("--seed", type=int)
    v.add_argument("--workers", type=int, default=1)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, SchemaError, InvalidConfig, InvalidRetention, _UsageError) as err:
        _err(str(err))
        return EXIT_CONFIG
    except ScreenlabError as err:
        _err(f"{err.code}: {err}")
        return EXIT_RUNTIME
    except FileNotFoundError as err:
        _err(str(err))
        return EXIT_CONFIG
    except OSError as err:
        _err(str(err))
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
