"""Simulation timing: Comb-Bernoulli (linear in d) against the
subset-process construction (2^d - 1 Poisson processes).

Both simulators use the same Student-t copula (nu = 4 by default) and the
same marginals.  Subset intensities for the process construction come from
a Monte-Carlo pilot run, which is not timed.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import SamplerStarved
from .levy_bridge import empirical_set_probabilities, intensities_from_model, simulate_levy
from .comb_bernoulli import CombBernoulliModel, simulate

LEVY_MAX_DIM = 12


@dataclass(frozen=True)
class BenchConfig:
    dims: tuple[int, ...] = (2, 3, 5, 10, 20, 50, 100)
    n_rows: int = 1000
    repetitions: int = 20
    seed: int = 0
    nu: float | None = 4.0
    p: float = 0.5
    rho: float = 0.1
    pilot_rows: int = 200_000
    levy_max_dim: int = LEVY_MAX_DIM


@dataclass
class BenchRow:
    d: int
    comb_seconds: float
    levy_seconds: float | None
    levy_status: str


@dataclass
class BenchReport:
    rows: list[BenchRow]
    comb_fit: dict = field(default_factory=dict)
    levy_fit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rows": [r.__dict__ for r in self.rows],
            "comb_fit": self.comb_fit,
            "levy_fit": self.levy_fit,
        }


def bench_model(d: int, p: float = 0.5, rho: float = 0.1) -> CombBernoulliModel:
    """Equicorrelated benchmark model with lognormal(0, 1) severities."""
    R = np.full((d, d), rho) + (1.0 - rho) * np.eye(d)
    return CombBernoulliModel.from_params([p] * d, [0.0] * d, [1.0] * d, R)


def median_time(fn, repetitions: int) -> float:
    """Median wall time over ``repetitions`` calls after one discarded warm-up."""
    fn(0)
    out = []
    for k in range(1, repetitions + 1):
        t0 = time.perf_counter()
        fn(k)
        out.append(time.perf_counter() - t0)
    return float(np.median(out))


def _aic(rss: float, n: int, k: int) -> float:
    return n * math.log(max(rss, 1e-300) / n) + 2 * k


def scaling_fit(dims: Sequence[int], seconds: Sequence[float]) -> dict:
    """Compare t = a + b d with t = c exp(k d) by least squares on the raw times and AIC."""
    d = np.asarray(dims, dtype=float)
    t = np.asarray(seconds, dtype=float)
    n = d.size
    A = np.column_stack([np.ones(n), d])
    coef, *_ = np.linalg.lstsq(A, t, rcond=None)
    resid = t - A @ coef
    rss_lin = float(resid @ resid)
    tss = float(((t - t.mean()) ** 2).sum())
    r2 = 1.0 - rss_lin / tss if tss > 0 else 1.0
    lc, *_ = np.linalg.lstsq(A, np.log(t), rcond=None)
    # refine c exp(k d) on the raw scale so both residual sums are comparable
    try:
        (c, k), _ = optimize.curve_fit(
            lambda x, c, k: c * np.exp(k * x), d, t, p0=(math.exp(lc[0]), lc[1]), maxfev=10_000
        )
        lc = np.array([math.log(c), k]) if c > 0 else lc
    except (RuntimeError, ValueError):
        pass
    fit_exp = np.exp(A @ lc)
    rss_exp = float(((t - fit_exp) ** 2).sum())
    aic_lin, aic_exp = _aic(rss_lin, n, 2), _aic(rss_exp, n, 2)
    ratios = (t[1:] / t[:-1]).tolist()
    steps = np.diff(d)
    per_unit = [float(r ** (1.0 / s)) for r, s in zip(ratios, steps)]
    return {
        "linear_intercept": float(coef[0]),
        "linear_slope": float(coef[1]),
        "linear_r2": r2,
        "exp_rate": float(lc[1]),
        "aic_linear": aic_lin,
        "aic_exponential": aic_exp,
        "classification": "linear" if aic_lin <= aic_exp else "exponential",
        "per_step_ratio": per_unit,
    }


def run_bench(cfg: BenchConfig) -> BenchReport:
    rows = []
    for d in cfg.dims:
        model = bench_model(d, cfg.p, cfg.rho)
        comb = median_time(lambda k: simulate(model, cfg.n_rows, cfg.seed + k, nu=cfg.nu), cfg.repetitions)
        if d > cfg.levy_max_dim:
            rows.append(BenchRow(d, comb, None, "infeasible"))
            continue
        probs = empirical_set_probabilities(model, cfg.pilot_rows, cfg.seed, nu=cfg.nu)
        lam = intensities_from_model(model, dt=1.0, horizon_T=float(cfg.n_rows), probabilities=probs)
        try:
            levy = median_time(lambda k: simulate_levy(lam, model, cfg.seed + k, nu=cfg.nu), cfg.repetitions)
            rows.append(BenchRow(d, comb, levy, "ok"))
        except SamplerStarved:
            rows.append(BenchRow(d, comb, None, "starved"))
    report = BenchReport(rows)
    report.comb_fit = scaling_fit([r.d for r in rows], [r.comb_seconds for r in rows]) if len(rows) > 2 else {}
    ok = [r for r in rows if r.levy_seconds is not None]
    report.levy_fit = scaling_fit([r.d for r in ok], [r.levy_seconds for r in ok]) if len(ok) > 2 else {}
    return report


def write_bench_csv(path, report: BenchReport) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "comb_seconds", "levy_seconds", "levy_status"])
        for r in report.rows:
            w.writerow([r.d, f"{r.comb_seconds:.6g}", "" if r.levy_seconds is None else f"{r.levy_seconds:.6g}", r.levy_status])
