"""Zero-mixed benchmark: one occurrence probability per active-set pattern
and a separate Gaussian copula for every co-jump pattern.

The parameter count grows like 2^d, which is exactly what the benchmark is
meant to show; fitting is restricted to d <= 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.optimize import minimize, minimize_scalar

from .gaussian_copula import U_CLAMP, log_copula_density_z
from .errors import FactorizationError, ShapeError
from .angles import _corr_unchecked, _fold, n_angles
from .marginals import fit_marginal
from .comb_bernoulli import ClaimSeries, all_subsets, subset_label
from .mvn_kernels import cholesky

MIN_ROWS = 3
WIDE_CI_WIDTH = 1.0


@dataclass
class SubsetCopulaFit:
    """Gaussian copula fitted on the rows whose active set is exactly S."""

    subset: tuple[int, ...]
    n_rows: int
    correlation: np.ndarray | None
    ci: dict[str, tuple[float, float]] = field(default_factory=dict)
    undetermined: bool = False
    wide: bool = False

    def to_dict(self) -> dict:
        return {
            "subset": subset_label(self.subset),
            "n_rows": self.n_rows,
            "correlation": None if self.correlation is None else self.correlation.tolist(),
            "ci": {k: list(v) for k, v in self.ci.items()},
            "undetermined": self.undetermined,
            "wide": self.wide,
        }


@dataclass
class ZeroMixedReport:
    n_rows: int
    counts: dict[tuple[int, ...], int]
    probabilities: dict[tuple[int, ...], float]
    copulas: dict[tuple[int, ...], SubsetCopulaFit]
    labels: tuple[str, ...]

    @property
    def n_parameters(self) -> int:
        d = len(self.labels)
        n_prob = 2**d - 1
        n_corr = sum(n_angles(len(S)) for S in self.copulas)
        return n_prob + n_corr + 3 * d

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "n_rows": self.n_rows,
            "counts": {subset_label(S): c for S, c in self.counts.items()},
            "probabilities": {subset_label(S): p for S, p in self.probabilities.items()},
            "copulas": [f.to_dict() for f in self.copulas.values()],
            "n_parameters": self.n_parameters,
        }


def _fit_copula(z: np.ndarray) -> np.ndarray:
    """Maximum-likelihood Gaussian copula correlation for normal scores ``z``."""
    k = z.shape[1]
    if k == 2:
        def nll(r):
            R = np.array([[1.0, r], [r, 1.0]])
            return -float(np.sum(log_copula_density_z(R, z)))

        res = minimize_scalar(nll, bounds=(-0.999, 0.999), method="bounded", options={"xatol": 1e-8})
        r = float(res.x)
        return np.array([[1.0, r], [r, 1.0]])

    def obj(theta):
        R = _corr_unchecked(_fold(theta))
        try:
            cholesky(R)
        except FactorizationError:
            return math.inf
        return -float(np.sum(log_copula_density_z(R, z)))

    x0 = np.full(n_angles(k), math.pi / 2)
    res = minimize(obj, x0, method="Nelder-Mead", options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": 5000})
    return _corr_unchecked(_fold(res.x))


def _nearest_rank(sorted_vals: np.ndarray, q: float) -> float:
    B = sorted_vals.size
    k = min(max(math.ceil(q * B), 1), B)
    return float(sorted_vals[k - 1])


def zero_mixed_fit(
    series: ClaimSeries, B: int = 200, alpha: float = 0.05, seed: int = 0
) -> ZeroMixedReport:
    """Calibrate the zero-mixed benchmark model.

    Occurrence probabilities are the empirical exact-active-set frequencies.
    Severities are fitted once per column on all its positives; each
    co-jump pattern S with at least 3 rows gets a copula fitted on the
    pseudo-observations Psi_i(x_i), with a parametric-bootstrap CI of B
    replicas.  Patterns with fewer rows are marked undetermined.
    """
    X = series.values
    N, d = X.shape
    if d > 4:
        raise ShapeError("the zero-mixed benchmark is limited to d <= 4")
    severities = [fit_marginal(X[:, j])[0].severity for j in range(d)]
    keys = (X > 0) @ (1 << np.arange(d))
    counts, probs, copulas = {}, {}, {}
    for S in all_subsets(d):
        key = sum(1 << i for i in S)
        rows = np.flatnonzero(keys == key)
        counts[S] = int(rows.size)
        probs[S] = rows.size / N
        if len(S) < 2:
            continue
        fit = SubsetCopulaFit(subset=S, n_rows=int(rows.size), correlation=None)
        copulas[S] = fit
        if rows.size < MIN_ROWS:
            fit.undetermined = True
            continue
        u = np.column_stack([severities[i].cdf(X[rows, i]) for i in S])
        z = special.ndtri(np.clip(u, U_CLAMP, 1.0 - U_CLAMP))
        R = _fit_copula(z)
        fit.correlation = R
        # parametric bootstrap of the subset copula at the observed size
        rng = np.random.default_rng([seed, key])
        L = cholesky(R)
        pairs = [(a, b) for a in range(len(S)) for b in range(a + 1, len(S))]
        reps = np.empty((B, len(pairs)))
        for b in range(B):
            zb = rng.standard_normal((rows.size, len(S))) @ L.T
            Rb = _fit_copula(zb)
            reps[b] = [Rb[i, j] for i, j in pairs]
        for col, (i, j) in enumerate(pairs):
            vals = np.sort(reps[:, col])
            lo, hi = _nearest_rank(vals, alpha / 2), _nearest_rank(vals, 1 - alpha / 2)
            name = f"{S[i] + 1}-{S[j] + 1}"
            fit.ci[name] = (lo, hi)
            if hi - lo > WIDE_CI_WIDTH:
                fit.wide = True
    return ZeroMixedReport(N, counts, probs, copulas, series.labels)
