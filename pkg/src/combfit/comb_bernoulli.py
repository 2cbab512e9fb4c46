"""The Comb-Bernoulli model: claim series, active sets, the exact
log-likelihood, active-set probabilities and simulation.

Each row of a claim series is one monitoring period.  Component ``i`` is
zero with probability ``1 - p_i``; positive values follow the severity law.
Zeros and positives are coupled through a Gaussian copula on the mixed
marginal cdfs, so the likelihood of a row mixes copula derivatives (for the
positive coordinates) with copula probabilities (for the zero ones).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special, stats

from .gaussian_copula import (
    U_CLAMP,
    GaussianCopula,
    mixed_partial_parts,
    sample_normal_scores,
    student_t_scores,
    survival_restricted,
)
from .errors import DomainError, LikelihoodUnderflow, ShapeError
from .marginals import LognormalSeverity, MixedMarginal
from .mvn_kernels import DEFAULT_MVN_TOL, bvn_cdf, mvn_cdf, mvn_cdf_batch

PROB_FLOOR = 1e-300


# ---------------------------------------------------------------------------
# data containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClaimSeries:
    """N x d matrix of non-negative claim amounts (one row per period)."""

    values: np.ndarray
    labels: tuple[str, ...] | None = None
    dates: tuple[str, ...] | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float, ndmin=2)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ShapeError(f"claim series must be a non-empty N x d matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("claim series contains missing or infinite values")
        bad = np.argwhere(v < 0)
        if bad.size:
            raise DomainError(f"negative claim at row {bad[0][0]}, column {bad[0][1]}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        labels = self.labels or tuple(f"x{i + 1}" for i in range(v.shape[1]))
        labels = tuple(str(s) for s in labels)
        if len(labels) != v.shape[1] or len(set(labels)) != len(labels):
            raise ShapeError("labels must be unique and match the column count")
        object.__setattr__(self, "labels", labels)
        if self.dates is not None:
            dates = tuple(str(s) for s in self.dates)
            if len(dates) != v.shape[0]:
                raise ShapeError("dates must match the row count")
            object.__setattr__(self, "dates", dates)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def select(self, columns: Sequence[int | str]) -> "ClaimSeries":
        """Sub-series restricted to the given column indices or labels."""
        idx = [self.labels.index(c) if isinstance(c, str) else int(c) for c in columns]
        return ClaimSeries(self.values[:, idx], tuple(self.labels[i] for i in idx), self.dates)


@dataclass(frozen=True)
class ActiveSet:
    """Sorted 0-based indices of the strictly positive components."""

    indices: tuple[int, ...]

    @property
    def s(self) -> int:
        return len(self.indices)

    @property
    def label(self) -> str:
        """1-based set notation, e.g. ``{1,3}``; ``{}`` for the empty set."""
        return "{" + ",".join(str(i + 1) for i in self.indices) + "}"

    def key(self) -> int:
        return sum(1 << i for i in self.indices)


def active_set(x) -> ActiveSet:
    """Indices of the positive entries of one claim vector."""
    x = np.asarray(x, dtype=float).ravel()
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise DomainError("claims must be non-negative")
    return ActiveSet(tuple(int(i) for i in np.flatnonzero(x > 0)))


def subset_label(I: Sequence[int]) -> str:
    return ActiveSet(tuple(sorted(I))).label


def all_subsets(d: int, include_empty: bool = True) -> list[tuple[int, ...]]:
    """Every subset of range(d), ordered by size then lexicographically."""
    out = [c for k in range(d + 1) for c in itertools.combinations(range(d), k)]
    return out if include_empty else out[1:]


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CombBernoulliModel:
    """d mixed marginals coupled by one Gaussian copula."""

    marginals: tuple[MixedMarginal, ...]
    copula: GaussianCopula

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        if len(self.marginals) != self.copula.dim:
            raise ShapeError(f"{len(self.marginals)} marginals but a {self.copula.dim}-dim copula")

    @classmethod
    def from_params(
        cls, p, mu, sigma, R, mvn_tol: float = DEFAULT_MVN_TOL, base_seed: int = 0
    ) -> "CombBernoulliModel":
        margins = tuple(
            MixedMarginal(float(pi), LognormalSeverity(float(m), float(s))) for pi, m, s in zip(p, mu, sigma)
        )
        return cls(margins, GaussianCopula(np.asarray(R, dtype=float), mvn_tol, base_seed))

    @property
    def d(self) -> int:
        return len(self.marginals)

    @property
    def p(self) -> np.ndarray:
        return np.array([m.p for m in self.marginals])

    @property
    def R(self) -> np.ndarray:
        return self.copula.R

    def with_correlation(self, R) -> "CombBernoulliModel":
        return CombBernoulliModel(self.marginals, GaussianCopula(R, self.copula.mvn_tol, self.copula.base_seed))

    def with_p(self, p) -> "CombBernoulliModel":
        margins = tuple(MixedMarginal(float(q), m.severity) for q, m in zip(p, self.marginals))
        return CombBernoulliModel(margins, self.copula)

    def to_dict(self) -> dict:
        return {
            "marginals": [
                {"p": m.p, "mu": m.severity.mu, "sigma": m.severity.sigma} for m in self.marginals
            ],
            "correlation": self.R.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict, mvn_tol: float = DEFAULT_MVN_TOL, base_seed: int = 0) -> "CombBernoulliModel":
        try:
            ms = doc["marginals"]
            return cls.from_params(
                [m["p"] for m in ms], [m["mu"] for m in ms], [m["sigma"] for m in ms],
                doc["correlation"], mvn_tol, base_seed,
            )
        except (KeyError, TypeError) as exc:
            raise ShapeError(f"malformed model document: {exc}") from exc


# ---------------------------------------------------------------------------
# likelihood
# ---------------------------------------------------------------------------


def normal_scores(marginals: Sequence[MixedMarginal], X: np.ndarray) -> tuple[np.ndarray, int]:
    """z_ij = Phi^-1(F_j(x_ij)), clamped to u in [1e-12, 1 - 1e-12].

    The upper half is computed from the survival function so that large
    claims keep full relative precision.  Returns the scores and the number
    of clamped entries.
    """
    X = np.asarray(X, dtype=float)
    z = np.empty_like(X)
    clamps = 0
    for j, m in enumerate(marginals):
        x = X[:, j]
        u = (1.0 - m.p) + m.p * m.severity.cdf(x)
        v = m.p * m.severity.survival(x)  # 1 - u without cancellation
        clamps += int(np.sum(u < U_CLAMP) + np.sum(v < U_CLAMP))
        lo = special.ndtri(np.maximum(u, U_CLAMP))
        hi = -special.ndtri(np.maximum(v, U_CLAMP))
        z[:, j] = np.where(u <= 0.5, lo, hi)
    return z, clamps


def group_seed(base_seed: int, key: int) -> int:
    """Seed for the orthant kernel of one active-set group."""
    return int(np.random.SeedSequence([int(base_seed) & 0xFFFFFFFF, int(key)]).generate_state(1)[0])


@dataclass
class SetContribution:
    n_rows: int
    loglik: float


@dataclass
class LikelihoodDiagnostics:
    """Book-keeping returned next to a log-likelihood value."""

    clamp_count: int = 0
    floor_count: int = 0
    per_set: dict[str, SetContribution] = field(default_factory=dict)
    row_contributions: np.ndarray | None = None


def _check_series(model: CombBernoulliModel, series) -> np.ndarray:
    X = series.values if isinstance(series, ClaimSeries) else np.array(series, dtype=float, ndmin=2)
    if X.shape[1] != model.d:
        raise ShapeError(f"series has {X.shape[1]} columns, model has dimension {model.d}")
    if np.any(np.isnan(X)) or np.any(X < 0):
        raise DomainError("claims must be non-negative")
    return X


class PreparedLikelihood:
    """Copula part of the log-likelihood with the marginals frozen.

    Normal scores, active-set groups and severity log-densities are
    computed once; :meth:`evaluate` then only needs a correlation matrix.
    This is the objective of the second estimation stage.
    """

    def __init__(
        self,
        marginals: Sequence[MixedMarginal],
        X: np.ndarray,
        mvn_tol: float = DEFAULT_MVN_TOL,
        base_seed: int = 0,
    ):
        X = np.asarray(X, dtype=float)
        self.marginals = tuple(marginals)
        self.n_rows, self.d = X.shape
        self.mvn_tol = mvn_tol
        self.base_seed = base_seed
        self.z, self.clamp_count = normal_scores(self.marginals, X)
        keys = (X > 0) @ (1 << np.arange(self.d))
        self.groups = []
        for key in np.unique(keys):
            idx = np.flatnonzero(keys == key)
            S = tuple(i for i in range(self.d) if (int(key) >> i) & 1)
            sev = np.zeros(idx.size)
            for i in S:
                sev = sev + self.marginals[i].log_positive_density(X[idx, i])
            self.groups.append((int(key), S, idx, sev))

    def evaluate(self, R, with_rows: bool = False) -> tuple[float, LikelihoodDiagnostics]:
        R = np.asarray(R, dtype=float)
        rows = np.zeros(self.n_rows)
        diag = LikelihoodDiagnostics(clamp_count=self.clamp_count)
        for key, S, idx, sev in self.groups:
            seed = group_seed(self.base_seed, key)
            if S:
                log_dens, prob = mixed_partial_parts(R, S, self.z[idx], self.mvn_tol, seed)
            else:
                # every empty row has the same value ln C(1 - p)
                log_dens = np.zeros(idx.size)
                p0 = mvn_cdf_batch(self.z[idx[:1]], R, tol=self.mvn_tol, seed=seed)
                prob = np.repeat(p0, idx.size)
            low = prob < PROB_FLOOR
            diag.floor_count += int(np.sum(low))
            contrib = log_dens + np.log(np.where(low, PROB_FLOOR, prob))
            if S:
                contrib = contrib + sev
            rows[idx] = contrib
            diag.per_set[ActiveSet(S).label] = SetContribution(int(idx.size), float(np.sum(contrib)))
        bad = np.flatnonzero(~np.isfinite(rows))
        if bad.size:
            raise LikelihoodUnderflow(
                f"non-finite log-likelihood contribution at row {bad[0]}", row=int(bad[0])
            )
        if with_rows:
            diag.row_contributions = rows
        return float(np.sum(rows)), diag


def log_likelihood(model: CombBernoulliModel, series) -> tuple[float, LikelihoodDiagnostics]:
    """Exact log-likelihood of a claim series under the model.

    Row x with active set S contributes
    ``ln d^s C/du_S (F(x)) + sum_{i in S} ln(p_i psi_i(x_i))``; rows with
    S empty contribute ``ln C(1 - p)``.  Rows are grouped by active set so
    each group shares one conditional covariance.  Conditional orthant
    probabilities are floored at 1e-300 (counted in the diagnostics).
    """
    X = _check_series(model, series)
    prep = PreparedLikelihood(model.marginals, X, model.copula.mvn_tol, model.copula.base_seed)
    return prep.evaluate(model.R, with_rows=True)


# ---------------------------------------------------------------------------
# closed forms for d = 2 and d = 3 (used as independent oracles)
# ---------------------------------------------------------------------------


def _score(m: MixedMarginal, x: float) -> float:
    if x > 0:
        u = (1.0 - m.p) + m.p * float(m.severity.cdf(x))
        return float(stats.norm.ppf(u)) if u <= 0.5 else float(stats.norm.isf(m.p * float(m.severity.survival(x))))
    return float(stats.norm.ppf(1.0 - m.p))


def _log_pos(m: MixedMarginal, x: float) -> float:
    s = m.severity
    return math.log(m.p) + float(stats.lognorm.logpdf(x, s.sigma, scale=math.exp(s.mu)))


def loglik_closed_form_2d(model: CombBernoulliModel, x1: float, x2: float) -> float:
    """Per-observation log-likelihood of a bivariate model by explicit cases."""
    if model.d != 2:
        raise ShapeError("closed form needs a bivariate model")
    r = float(model.R[0, 1])
    m1, m2 = model.marginals
    z1, z2 = _score(m1, x1), _score(m2, x2)
    q = math.sqrt(1.0 - r * r)
    if x1 == 0 and x2 == 0:
        return math.log(float(bvn_cdf(z1, z2, r)))
    if x1 > 0 and x2 == 0:
        return math.log(stats.norm.cdf((z2 - r * z1) / q)) + _log_pos(m1, x1)
    if x1 == 0 and x2 > 0:
        return math.log(stats.norm.cdf((z1 - r * z2) / q)) + _log_pos(m2, x2)
    dens = -math.log(q) - (r * r * (z1 * z1 + z2 * z2) - 2.0 * r * z1 * z2) / (2.0 * q * q)
    return dens + _log_pos(m1, x1) + _log_pos(m2, x2)


def loglik_closed_form_3d(model: CombBernoulliModel, x) -> float:
    """Per-observation log-likelihood of a trivariate model by explicit cases."""
    if model.d != 3:
        raise ShapeError("closed form needs a trivariate model")
    x = [float(v) for v in np.asarray(x, dtype=float).ravel()]
    R = model.R
    z = [_score(m, v) for m, v in zip(model.marginals, x)]
    S = [i for i in range(3) if x[i] > 0]
    T = [i for i in range(3) if x[i] == 0]
    sev = sum(_log_pos(model.marginals[i], x[i]) for i in S)
    if not S:
        return math.log(mvn_cdf(z, R))
    if len(S) == 1:
        (i,) = S
        j, k = T
        sj, sk = math.sqrt(1 - R[i, j] ** 2), math.sqrt(1 - R[i, k] ** 2)
        rho = (R[j, k] - R[i, j] * R[i, k]) / (sj * sk)
        a = (z[j] - R[i, j] * z[i]) / sj
        b = (z[k] - R[i, k] * z[i]) / sk
        return math.log(float(bvn_cdf(a, b, rho))) + sev
    if len(S) == 2:
        i, j = S
        (k,) = T
        r = R[i, j]
        det = 1.0 - r * r
        # R_kS R_SS^-1 with the 2x2 inverse written out
        bi = (R[k, i] - r * R[k, j]) / det
        bj = (R[k, j] - r * R[k, i]) / det
        mean = bi * z[i] + bj * z[j]
        var = 1.0 - (bi * R[k, i] + bj * R[k, j])
        dens = -0.5 * math.log(det) - (r * r * (z[i] ** 2 + z[j] ** 2) - 2 * r * z[i] * z[j]) / (2 * det)
        return dens + math.log(stats.norm.cdf((z[k] - mean) / math.sqrt(var))) + sev
    # all three positive: ln c(z; R) with the adjugate inverse
    a, b, c = R[0, 1], R[0, 2], R[1, 2]
    det = 1 + 2 * a * b * c - a * a - b * b - c * c
    inv = np.array(
        [
            [1 - c * c, b * c - a, a * c - b],
            [b * c - a, 1 - b * b, a * b - c],
            [a * c - b, a * b - c, 1 - a * a],
        ]
    ) / det
    zz = np.array(z)
    quad = float(zz @ (inv - np.eye(3)) @ zz)
    return -0.5 * math.log(det) - 0.5 * quad + sev


# ---------------------------------------------------------------------------
# active-set probabilities
# ---------------------------------------------------------------------------


def _survival_all(model: CombBernoulliModel) -> dict[tuple[int, ...], float]:
    p = model.p
    out = {(): 1.0}
    for J in all_subsets(model.d, include_empty=False):
        out[J] = survival_restricted(model.copula, J, p[list(J)])
    return out


def active_set_probability(model: CombBernoulliModel, I: Sequence[int], method: str = "inclusion") -> float:
    """Probability that exactly the components in ``I`` are positive.

    ``method="inclusion"`` sums restricted survival copulas over supersets
    of I with alternating signs; ``method="orthant"`` evaluates the same
    event as one sign-flipped d-dimensional normal orthant probability.
    """
    d = model.d
    I = tuple(sorted(set(int(i) for i in I)))
    if any(i < 0 or i >= d for i in I):
        raise DomainError(f"index set {I} out of range for dimension {d}")
    p = model.p
    if method == "orthant":
        a = special.ndtri(1.0 - p)
        sign = np.ones(d)
        sign[list(I)] = -1.0
        R = model.R * np.outer(sign, sign)
        return mvn_cdf(sign * a, R, tol=model.copula.mvn_tol, seed=model.copula.base_seed)
    if method != "inclusion":
        raise ValueError(f"unknown method {method!r}")
    rest = [j for j in range(d) if j not in I]
    total = 0.0
    for k in range(len(rest) + 1):
        for extra in itertools.combinations(rest, k):
            J = tuple(sorted(I + extra))
            term = 1.0 if not J else survival_restricted(model.copula, J, p[list(J)])
            total += (-1.0) ** k * term
    return total


def active_set_probabilities(model: CombBernoulliModel) -> dict[tuple[int, ...], float]:
    """Exact-active-set probabilities for all 2^d subsets (inclusion-exclusion).

    Each restricted survival copula is evaluated once and reused.
    """
    surv = _survival_all(model)
    d = model.d
    out = {}
    for I in all_subsets(d):
        rest = [j for j in range(d) if j not in I]
        total = 0.0
        for k in range(len(rest) + 1):
            for extra in itertools.combinations(rest, k):
                total += (-1.0) ** k * surv[tuple(sorted(I + extra))]
        out[I] = total
    return out


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def claims_from_uniforms(marginals: Sequence[MixedMarginal], U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Threshold transform: x = 0 if u <= 1 - p, else the severity quantile.

    ``V`` must hold ``1 - U`` computed without cancellation; it is used for
    the upper tail of the severity.
    """
    X = np.zeros_like(U)
    for j, m in enumerate(marginals):
        u, v = U[:, j], V[:, j]
        hit = ~(u <= 1.0 - m.p)
        if not np.any(hit):
            continue
        uh, vh = u[hit], v[hit]
        head = (uh - (1.0 - m.p)) / m.p
        tail = vh / m.p
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(head <= 0.5, m.severity.quantile(np.clip(head, 0, 1)), m.severity.isf(np.clip(tail, 0, 1)))
        X[hit, j] = x
    return X


def simulate(model: CombBernoulliModel, n: int, seed, nu: float | None = None) -> ClaimSeries:
    """Draw ``n`` iid rows: copula uniforms, then the threshold transform.

    With ``nu`` set, the uniforms come from a Student-t copula with the same
    correlation matrix (used for timing comparisons only).
    """
    if n < 1:
        raise DomainError("number of rows must be at least 1")
    if nu is None:
        z = sample_normal_scores(model.copula, n, seed)
        U, V = special.ndtr(z), special.ndtr(-z)
    else:
        t = student_t_scores(model.R, nu, n, seed)
        U, V = special.stdtr(nu, t), special.stdtr(nu, -t)
    X = claims_from_uniforms(model.marginals, U, V)
    # a positive claim so small that it rounds to 0.0 would be misread as the atom
    X[(X == 0) & ~(U <= 1.0 - model.p)] = np.finfo(float).tiny
    return ClaimSeries(X)
