"""Command-line interface: ``combfit <command> [options]``.

Commands write a JSON (or CSV) report to ``--output`` and a short table to
stdout.  Exit codes: 0 success, 2 usage or parse error, 3 data error,
4 numerical failure, 5 non-convergence (the partial report is still
written).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BenchConfig, run_bench, write_bench_csv
from .bootstrap import BootstrapOptions, parametric_bootstrap
from .data_io import load_claims, summarize, write_claims
from .errors import (
    BootstrapUnstable,
    CombfitError,
    FactorizationError,
    LikelihoodUnderflow,
    ParseError,
    SamplerStarved,
)
from .estimation import FitOptions, fit_ifm
from .levy_bridge import intensities_from_model, simulate_levy, write_events_csv
from .comb_bernoulli import CombBernoulliModel, simulate
from .mvn_kernels import DEFAULT_MVN_TOL
from .spearman import spearman_bounds
from .zero_mixed import zero_mixed_fit

EXIT_OK, EXIT_PARSE, EXIT_DATA, EXIT_NUMERIC, EXIT_NONCONVERGED = 0, 2, 3, 4, 5
SEED_ENV = "COMBFIT_SEED"


class UsageError(Exception):
    """Bad flag combination detected after argparse."""


def _seed(args, required: bool) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"${SEED_ENV} must be an integer, got {env!r}") from exc
    if required:
        raise UsageError(f"this command is stochastic: pass --seed or set ${SEED_ENV}")
    return None


def _provenance(args, seed) -> dict:
    return {
        "command": args.command,
        "seed": seed,
        "mvn_tol": getattr(args, "mvn_tol", None),
        "input": getattr(args, "input", None),
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _open_output(args) -> Path | None:
    if args.output is None:
        return None
    out = Path(args.output)
    if out.exists() and not args.force:
        raise UsageError(f"{out} exists; pass --force to overwrite")
    return out


def _write_json(out: Path | None, doc: dict) -> None:
    text = json.dumps(doc, indent=2, sort_keys=False, default=_json_default)
    if out is None:
        return
    out.write_text(text + "\n", encoding="utf-8")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _load(args):
    if args.input is None:
        raise UsageError("--input is required")
    if not Path(args.input).is_file():
        raise ParseError(f"input file {args.input} not found")
    cols = args.columns.split(",") if args.columns else None
    return load_claims(args.input, unit=args.unit, columns=cols)


def _fit_options(args, seed) -> FitOptions:
    return FitOptions(tol=args.tol, max_iter=args.max_iter, restarts=args.restarts, seed=seed, mvn_tol=args.mvn_tol)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_stats(args) -> int:
    out = _open_output(args)
    series = _load(args)
    s = summarize(series)
    doc = {"provenance": _provenance(args, None), **s.to_dict()}
    _write_json(out, doc)
    print(f"days: {s.n_days}")
    print(f"{'column':<12}{'positive':>10}{'share':>8}{'mean':>10}{'min':>12}{'max':>10}")
    for c in s.columns:
        print(f"{c.label:<12}{c.n_positive:>10}{c.share:>8.3f}{c.mean:>10.3f}{c.min:>12.5f}{c.max:>10.2f}")
    for key, v in doc["pairs"].items():
        print(f"{key:<24} co-jumps {v['cojumps']:>6}  no-jumps {v['nojumps']:>6}")
    print(f"all columns: co-jumps {s.all_cojumps}  no-jumps {s.all_nojumps}")
    return EXIT_OK


def _print_fit(rep) -> None:
    for lab, m in zip(rep.labels, rep.marginals):
        print(f"{lab:<12} p={m.p:.4f} mu={m.severity.mu:.4f} sigma={m.severity.sigma:.4f}")
    d = len(rep.labels)
    for i in range(d):
        for j in range(i + 1, d):
            print(f"rho[{rep.labels[i]},{rep.labels[j]}] = {rep.correlation[i, j]:.4f}")
    print(f"loglik = {rep.loglik:.6f}  converged = {rep.converged}")


def cmd_fit(args) -> int:
    seed = _seed(args, required=True)
    out = _open_output(args)
    series = _load(args)
    rep = fit_ifm(series, _fit_options(args, seed))
    doc = {"provenance": _provenance(args, seed), "fit": rep.to_dict()}
    _write_json(out, doc)
    _print_fit(rep)
    return EXIT_OK if rep.converged else EXIT_NONCONVERGED


def cmd_bootstrap(args) -> int:
    seed = _seed(args, required=True)
    out = _open_output(args)
    series = _load(args)
    rep = fit_ifm(series, _fit_options(args, seed))
    opts = BootstrapOptions(
        bonferroni=not args.no_bonferroni,
        fit=FitOptions(tol=args.tol, max_iter=args.max_iter, restarts=1, seed=seed, mvn_tol=args.mvn_tol),
        threads=args.threads,
    )
    boot = parametric_bootstrap(rep.model, series.n_rows, args.replicas, args.alpha, seed, opts, list(series.labels))
    rep.ci = {name: list(iv) for name, iv in zip(boot.parameter_names, boot.intervals)}
    doc = {"provenance": _provenance(args, seed), "fit": rep.to_dict(), "bootstrap": boot.to_dict()}
    _write_json(out, doc)
    _print_fit(rep)
    for name, point, iv in zip(boot.parameter_names, rep.correlation_entries(), boot.intervals):
        print(f"{name:<28} {point:.4f}  [{iv[0]:.4f}, {iv[1]:.4f}]")
    return EXIT_OK if rep.converged else EXIT_NONCONVERGED


def cmd_simulate(args) -> int:
    seed = _seed(args, required=True)
    if args.model is None:
        raise UsageError("--model is required")
    out = _open_output(args)
    try:
        doc = json.loads(Path(args.model).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read model file {args.model}: {exc}") from exc
    model = CombBernoulliModel.from_dict(doc, mvn_tol=args.mvn_tol, base_seed=seed)
    if args.levy:
        lam = intensities_from_model(model, dt=args.dt, horizon_T=args.rows * args.dt)
        events = simulate_levy(lam, model, seed)
        if out is not None:
            write_events_csv(out, events)
        print(f"simulated {len(events)} events from {events.n_processes} subset processes")
        return EXIT_OK
    series = simulate(model, args.rows, seed)
    if out is not None:
        write_claims(out, series, unit=args.unit)
    share = (series.values > 0).mean(axis=0)
    print(f"simulated {series.n_rows} rows; positive shares " + ", ".join(f"{s:.3f}" for s in share))
    return EXIT_OK


def cmd_spearman(args) -> int:
    out = _open_output(args)
    series = _load(args)
    X = series.values
    d = X.shape[1]
    pairs = []
    for i in range(d):
        for j in range(i + 1, d):
            b = spearman_bounds(X[:, i], X[:, j])
            lo, hi = b.r_scale
            pairs.append(
                {
                    "pair": [series.labels[i], series.labels[j]],
                    "rho_min": b.rho_min,
                    "rho_max": b.rho_max,
                    "r_min": lo,
                    "r_max": hi,
                    "degenerate": b.degenerate,
                }
            )
            print(f"{series.labels[i]}-{series.labels[j]}: rank [{b.rho_min:.3f}, {b.rho_max:.3f}]"
                  f"  correlation scale [{lo:.3f}, {hi:.3f}]")
    _write_json(out, {"provenance": _provenance(args, None), "pairs": pairs})
    return EXIT_OK


def cmd_zero_mixed(args) -> int:
    seed = _seed(args, required=True)
    out = _open_output(args)
    series = _load(args)
    rep = zero_mixed_fit(series, B=args.replicas, alpha=args.alpha, seed=seed)
    doc = {"provenance": _provenance(args, seed), **rep.to_dict()}
    _write_json(out, doc)
    for S, p in rep.probabilities.items():
        label = "{" + ",".join(str(i + 1) for i in S) + "}"
        print(f"P{label:<10} = {p:.3f}  ({rep.counts[S]} rows)")
    for fit in rep.copulas.values():
        flag = " undetermined" if fit.undetermined else (" wide" if fit.wide else "")
        for name, iv in fit.ci.items():
            i, j = (int(k) - 1 for k in name.split("-"))
            a, b = fit.subset.index(i), fit.subset.index(j)
            print(f"  subset {fit.to_dict()['subset']} rho[{name}] = {fit.correlation[a, b]:.3f} "
                  f"[{iv[0]:.3f}, {iv[1]:.3f}]{flag}")
        if fit.undetermined:
            print(f"  subset {fit.to_dict()['subset']}: {fit.n_rows} rows, correlation undetermined")
    return EXIT_OK


def cmd_bench(args) -> int:
    seed = _seed(args, required=True)
    out = _open_output(args)
    try:
        dims = tuple(sorted(int(v) for v in args.dims.split(",")))
    except ValueError as exc:
        raise UsageError(f"--dims must be a comma-separated list of integers, got {args.dims!r}") from exc
    cfg = BenchConfig(dims=dims, n_rows=args.rows, repetitions=args.repetitions, seed=seed)
    rep = run_bench(cfg)
    if out is not None:
        write_bench_csv(out, rep)
        out.with_suffix(".json").write_text(
            json.dumps({"provenance": _provenance(args, seed), **rep.to_dict()}, indent=2, default=_json_default)
            + "\n",
            encoding="utf-8",
        )
    print(f"{'d':>4}{'comb [s]':>12}{'subset [s]':>12}  status")
    for r in rep.rows:
        lv = "-" if r.levy_seconds is None else f"{r.levy_seconds:.4g}"
        print(f"{r.d:>4}{r.comb_seconds:>12.4g}{lv:>12}  {r.levy_status}")
    if rep.comb_fit:
        print(f"comb-bernoulli scaling: {rep.comb_fit['classification']} (R^2 {rep.comb_fit['linear_r2']:.3f})")
    if rep.levy_fit:
        print(f"subset-process scaling: {rep.levy_fit['classification']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="claim CSV")
    common.add_argument("--output", help="report path (JSON, or CSV for simulate/bench)")
    common.add_argument("--force", action="store_true", help="overwrite an existing output")
    common.add_argument("--seed", type=int, default=None, help=f"master seed (fallback ${SEED_ENV})")
    common.add_argument("--mvn-tol", type=float, default=DEFAULT_MVN_TOL, dest="mvn_tol")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--unit", choices=["dkk", "millions"], default="millions")
    common.add_argument("--columns", help="comma-separated subset of claim columns")

    p = argparse.ArgumentParser(prog="combfit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"combfit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("stats", parents=[common], help="descriptive statistics and co-jump counts")

    for name, helptext in (("fit", "two-stage maximum likelihood fit"), ("bootstrap", "fit plus bootstrap CIs")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--restarts", type=int, default=3)
        sp.add_argument("--tol", type=float, default=1e-5)
        sp.add_argument("--max-iter", type=int, default=2000, dest="max_iter")
        if name == "bootstrap":
            sp.add_argument("--replicas", type=int, default=1000)
            sp.add_argument("--alpha", type=float, default=0.05)
            sp.add_argument("--no-bonferroni", action="store_true", dest="no_bonferroni")

    sp = sub.add_parser("simulate", parents=[common], help="simulate from a model JSON")
    sp.add_argument("--model", help="model JSON {marginals: [{p, mu, sigma}], correlation}")
    sp.add_argument("--rows", type=int, default=1000)
    sp.add_argument("--levy", action="store_true", help="simulate subset processes; writes an event CSV")
    sp.add_argument("--dt", type=float, default=1.0)

    sub.add_parser("spearman", parents=[common], help="Spearman tie bounds for every pair")

    sp = sub.add_parser("zero-mixed", parents=[common], help="zero-mixed benchmark calibration")
    sp.add_argument("--replicas", type=int, default=200)
    sp.add_argument("--alpha", type=float, default=0.05)

    sp = sub.add_parser("bench", parents=[common], help="simulation timing table")
    sp.add_argument("--dims", default="2,3,5,10,20,50,100")
    sp.add_argument("--rows", type=int, default=1000)
    sp.add_argument("--repetitions", type=int, default=20)
    return p


COMMANDS = {
    "stats": cmd_stats,
    "fit": cmd_fit,
    "bootstrap": cmd_bootstrap,
    "simulate": cmd_simulate,
    "spearman": cmd_spearman,
    "zero-mixed": cmd_zero_mixed,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParseError, FileNotFoundError) as exc:
        print(f"combfit: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FactorizationError, LikelihoodUnderflow, BootstrapUnstable, SamplerStarved, FloatingPointError) as exc:
        print(f"combfit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CombfitError as exc:
        print(f"combfit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
