"""Parametric bootstrap confidence intervals for fitted Comb-Bernoulli models.

Each replica simulates a series of the original length from the fitted
model, refits it with IFM and records the parameters of interest.  Replica
seeds depend only on (master seed, replica index), so results do not depend
on how replicas are scheduled across workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import BootstrapUnstable, CombfitError, DomainError
from .estimation import FitOptions, fit_ifm
from .comb_bernoulli import CombBernoulliModel, simulate

log = logging.getLogger(__name__)

MAX_FAILURE_SHARE = 0.05


@dataclass(frozen=True)
class BootstrapOptions:
    bonferroni: bool = True
    include_marginals: bool = False
    fit: FitOptions = FitOptions(restarts=1)
    threads: int = 1


@dataclass
class BootstrapResult:
    """Replica estimates and percentile intervals (nearest-rank, ceil)."""

    parameter_names: list[str]
    replicas: np.ndarray
    alpha: float
    intervals: list[tuple[float, float]]
    bonferroni: bool
    intervals_unadjusted: list[tuple[float, float]]
    intervals_bonferroni: list[tuple[float, float]]
    n_failed: int = 0

    def to_dict(self) -> dict:
        return {
            "parameter_names": self.parameter_names,
            "B": int(self.replicas.shape[0]),
            "alpha": self.alpha,
            "bonferroni": self.bonferroni,
            "intervals": [list(iv) for iv in self.intervals],
            "intervals_unadjusted": [list(iv) for iv in self.intervals_unadjusted],
            "intervals_bonferroni": [list(iv) for iv in self.intervals_bonferroni],
            "n_failed": self.n_failed,
        }


def replica_seed(seed: int, b: int) -> int:
    """Counter-based seed of replica ``b``."""
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(b)]).generate_state(1)[0])


def nearest_rank_quantile(values: np.ndarray, q: float) -> float:
    """Order statistic with index ceil(q B) (1-based), clipped to [1, B]."""
    v = np.sort(np.asarray(values, dtype=float))
    B = v.size
    k = min(max(math.ceil(q * B - 1e-12), 1), B)
    return float(v[k - 1])


def percentile_intervals(replicas: np.ndarray, alpha: float, m: int) -> list[tuple[float, float]]:
    """Per-column (alpha / 2m, 1 - alpha / 2m) nearest-rank quantiles."""
    a = alpha / m
    return [
        (nearest_rank_quantile(col, a / 2), nearest_rank_quantile(col, 1 - a / 2)) for col in replicas.T
    ]


def parameter_names(model: CombBernoulliModel, labels=None, include_marginals: bool = False) -> list[str]:
    d = model.d
    labels = labels or [f"x{i + 1}" for i in range(d)]
    names = [f"rho[{labels[i]},{labels[j]}]" for i in range(d) for j in range(i + 1, d)]
    if include_marginals:
        for lab in labels:
            names += [f"p[{lab}]", f"mu[{lab}]", f"sigma[{lab}]"]
    return names


def _estimate(model: CombBernoulliModel, n_rows: int, seed: int, opts: BootstrapOptions) -> np.ndarray:
    series = simulate(model, n_rows, seed)
    rep = fit_ifm(series, replace(opts.fit, seed=seed))
    vals = list(rep.correlation_entries())
    if opts.include_marginals:
        for m in rep.marginals:
            vals += [m.p, m.severity.mu, m.severity.sigma]
    return np.array(vals)


def parametric_bootstrap(
    model: CombBernoulliModel,
    n_rows: int,
    B: int,
    alpha: float = 0.05,
    seed: int = 0,
    opts: BootstrapOptions | None = None,
    labels=None,
) -> BootstrapResult:
    """Percentile intervals from B simulate-and-refit replicas.

    Replicas whose refit raises a library error are dropped and counted;
    more than 5% failures raises :class:`BootstrapUnstable`.
    """
    if B < 1:
        raise DomainError("B must be at least 1")
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    opts = opts or BootstrapOptions()
    names = parameter_names(model, labels, opts.include_marginals)

    def run(b: int):
        try:
            return _estimate(model, n_rows, replica_seed(seed, b), opts)
        except (CombfitError, FloatingPointError, np.linalg.LinAlgError) as exc:
            log.warning("bootstrap replica %d failed: %s", b, exc)
            return None

    if opts.threads > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as pool:
            results = list(pool.map(run, range(B)))
    else:
        results = [run(b) for b in range(B)]
    kept = [r for r in results if r is not None]
    n_failed = B - len(kept)
    if n_failed > MAX_FAILURE_SHARE * B:
        raise BootstrapUnstable(f"{n_failed} of {B} bootstrap replicas failed to refit")
    reps = np.vstack(kept)
    m = len(names)
    unadj = percentile_intervals(reps, alpha, 1)
    bonf = percentile_intervals(reps, alpha, m)
    return BootstrapResult(
        parameter_names=names,
        replicas=reps,
        alpha=alpha,
        intervals=bonf if opts.bonferroni else unadj,
        bonferroni=opts.bonferroni,
        intervals_unadjusted=unadj,
        intervals_bonferroni=bonf,
        n_failed=n_failed,
    )
