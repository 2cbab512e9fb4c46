"""Two-stage (IFM) estimation of the Comb-Bernoulli model.

Stage 1 fits every mixed marginal in closed form.  Stage 2 maximizes the
copula part of the log-likelihood over correlation matrices, parametrized
by Cholesky angles so that every point of the search space is a valid
correlation matrix.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .gaussian_copula import GaussianCopula, log_copula_density_z
from .errors import CombfitError, FactorizationError, ShapeError
from .marginals import MarginalFitDiagnostics, MixedMarginal, fit_marginal
from .comb_bernoulli import ClaimSeries, CombBernoulliModel, PreparedLikelihood, normal_scores
from .angles import _corr_unchecked, _fold, angles_from_correlation, correlation_from_angles, n_angles
from .mvn_kernels import DEFAULT_MVN_TOL, cholesky, validate_correlation
from .spearman import spearman_bounds, spearman_transform
from .zero_mixed import zero_mixed_fit

__all__ = [
    "FitOptions",
    "FitReport",
    "RestartResult",
    "angles_from_correlation",
    "correlation_from_angles",
    "fit_correlation",
    "fit_ifm",
    "limit_loglik",
    "n_angles",
    "spearman_bounds",
    "spearman_transform",
    "spearman_warm_start",
    "zero_mixed_fit",
]


# ---------------------------------------------------------------------------
# IFM
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitOptions:
    """Stage-2 optimizer settings."""

    tol: float = 1e-5
    max_iter: int = 2000
    restarts: int = 3
    seed: int = 0
    mvn_tol: float = DEFAULT_MVN_TOL
    warm_start: bool = True
    initial_step: float = 0.15


@dataclass
class RestartResult:
    start: str
    loglik: float
    iterations: int
    converged: bool
    angles: np.ndarray
    trace: list[float] = field(default_factory=list)


@dataclass
class FitReport:
    """Result of :func:`fit_ifm`."""

    marginals: tuple[MixedMarginal, ...]
    marginal_diagnostics: tuple[MarginalFitDiagnostics, ...]
    correlation: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    clamp_count: int
    floor_count: int
    labels: tuple[str, ...]
    restarts: list[RestartResult]
    ci: dict | None = None

    @property
    def model(self) -> CombBernoulliModel:
        return CombBernoulliModel(self.marginals, GaussianCopula(self.correlation))

    def pairs(self) -> list[tuple[int, int]]:
        d = len(self.marginals)
        return [(i, j) for i in range(d) for j in range(i + 1, d)]

    def correlation_entries(self) -> np.ndarray:
        return np.array([self.correlation[i, j] for i, j in self.pairs()])

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "marginals": [
                {
                    "p": m.p,
                    "mu": m.severity.mu,
                    "sigma": m.severity.sigma,
                    "n_positive": g.n_positive,
                    "se_p": g.se_p,
                    "se_mu": g.se_mu,
                    "se_sigma": g.se_sigma,
                }
                for m, g in zip(self.marginals, self.marginal_diagnostics)
            ],
            "correlation": self.correlation.tolist(),
            "loglik": self.loglik,
            "iterations": self.iterations,
            "converged": self.converged,
            "clamp_count": self.clamp_count,
            "floor_count": self.floor_count,
            "restarts": [
                {"start": r.start, "loglik": r.loglik, "iterations": r.iterations, "converged": r.converged}
                for r in self.restarts
            ],
            "ci": self.ci,
        }


def spearman_warm_start(series: ClaimSeries) -> np.ndarray:
    """Correlation matrix from transformed midpoints of pairwise Spearman tie bounds.

    A heuristic starting point only.  The matrix is shrunk toward the
    identity until it is positive definite.
    """
    X = series.values
    d = X.shape[1]
    R = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            b = spearman_bounds(X[:, i], X[:, j])
            mid = 0.0 if b.degenerate else 0.5 * (b.rho_min + b.rho_max)
            R[i, j] = R[j, i] = float(np.clip(spearman_transform(mid), -0.95, 0.95))
    for t in np.linspace(0.0, 1.0, 21):
        cand = (1 - t) * R + t * np.eye(d)
        try:
            cholesky(cand)
            return cand
        except FactorizationError:
            continue
    return np.eye(d)


def _nelder_mead(objective, x0: np.ndarray, opts: FitOptions) -> tuple[np.ndarray, float, int, bool, list[float]]:
    k = x0.size
    simplex = np.vstack([x0] + [x0 + opts.initial_step * np.eye(k)[i] for i in range(k)])
    trace: list[float] = []

    def record(intermediate_result):
        trace.append(-float(intermediate_result.fun))

    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        callback=record,
        options={
            "initial_simplex": simplex,
            "xatol": opts.tol,
            "fatol": 1e-8,
            "maxiter": opts.max_iter,
            "maxfev": 4 * opts.max_iter,
        },
    )
    return _fold(res.x), -float(res.fun), int(res.nit), bool(res.success), trace


def fit_correlation(
    prep: PreparedLikelihood, opts: FitOptions, warm: np.ndarray | None = None
) -> tuple[np.ndarray, float, list[RestartResult]]:
    """Maximize the copula log-likelihood over correlation matrices."""
    d = prep.d
    if d == 1:
        R = np.eye(1)
        return R, prep.evaluate(R)[0], []
    k = n_angles(d)

    def objective(theta):
        try:
            val = prep.evaluate(_corr_unchecked(_fold(theta)))[0]
        except (FactorizationError, CombfitError):
            return math.inf
        return -val if math.isfinite(val) else math.inf

    rng = np.random.default_rng(opts.seed)
    starts = []
    if warm is not None:
        starts.append(("spearman", angles_from_correlation(warm)))
    while len(starts) < max(opts.restarts, 1):
        starts.append(("random", rng.uniform(0.35, math.pi - 0.35, size=k)))
    results = []
    for name, x0 in starts:
        x, ll, nit, ok, trace = _nelder_mead(objective, np.asarray(x0, dtype=float), opts)
        results.append(RestartResult(name, ll, nit, ok, x, trace))
    # deterministic selection: highest loglik, then lexicographic angle vector
    best = max(results, key=lambda r: (r.loglik, tuple(-r.angles)))
    return _corr_unchecked(best.angles), best.loglik, results


def fit_ifm(series: ClaimSeries, opts: FitOptions | None = None) -> FitReport:
    """Two-stage fit: closed-form marginals, then Nelder-Mead on the copula.

    Non-convergence is reported through ``converged=False``, never raised.
    """
    opts = opts or FitOptions()
    X = series.values
    N, d = X.shape
    if N < d + 2:
        raise ShapeError(f"need at least d + 2 = {d + 2} rows, got {N}")
    fitted = [fit_marginal(X[:, j]) for j in range(d)]
    marginals = tuple(m for m, _ in fitted)
    diags = tuple(g for _, g in fitted)
    prep = PreparedLikelihood(marginals, X, opts.mvn_tol, opts.seed)
    warm = spearman_warm_start(series) if opts.warm_start and d > 1 else None
    R, ll, results = fit_correlation(prep, opts, warm)
    final, diag = prep.evaluate(R)
    best = next((r for r in results if r.loglik == ll), None)
    return FitReport(
        marginals=marginals,
        marginal_diagnostics=diags,
        correlation=R,
        loglik=final,
        iterations=sum(r.iterations for r in results),
        converged=bool(best.converged) if best is not None else True,
        clamp_count=diag.clamp_count,
        floor_count=diag.floor_count,
        labels=series.labels,
        restarts=results,
    )


# ---------------------------------------------------------------------------
# p -> 1 limit
# ---------------------------------------------------------------------------


def limit_loglik(marginals, R, series) -> float:
    """Continuous-marginal log-likelihood: ln c(Psi(x); R) + sum ln psi(x).

    This is the limit of the model log-likelihood as every p_i -> 1.  Zero
    entries are clamped (Psi(0) = 0) and trigger a warning.
    """
    X = series.values if isinstance(series, ClaimSeries) else np.array(series, dtype=float, ndmin=2)
    R = validate_correlation(R)
    cont = [MixedMarginal(1.0, m.severity) for m in marginals]
    if np.any(X == 0):
        warnings.warn("limit log-likelihood evaluated on data with zero claims", RuntimeWarning, stacklevel=2)
    z, _ = normal_scores(cont, X)
    rows = log_copula_density_z(R, z)
    sev = np.zeros(X.shape[0])
    for j, m in enumerate(cont):
        pos = X[:, j] > 0
        sev = sev + np.where(pos, m.log_positive_density(np.where(pos, X[:, j], 1.0)), 0.0)
    return float(np.sum(rows + sev))
