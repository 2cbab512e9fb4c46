"""Mixed discrete-continuous marginals: an atom at zero plus a severity law.

A component is zero with probability ``1 - p`` and otherwise draws a positive
claim from a continuous severity distribution (lognormal here).  All
functions accept scalars or arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
from scipy import special

from .errors import DomainError, InsufficientPositives

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@runtime_checkable
class SeverityDistribution(Protocol):
    """Continuous law on (0, inf) for the size of a positive claim."""

    def pdf(self, x): ...

    def logpdf(self, x): ...

    def cdf(self, x): ...

    def survival(self, x): ...

    def quantile(self, q): ...

    def isf(self, q): ...

    @property
    def params(self) -> tuple[float, ...]: ...


@dataclass(frozen=True)
class LognormalSeverity:
    """Lognormal severity: ``ln X ~ N(mu, sigma^2)``."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)) or self.sigma <= 0:
            raise DomainError(f"lognormal needs finite mu and sigma > 0, got ({self.mu}, {self.sigma})")

    @property
    def params(self) -> tuple[float, float]:
        return (self.mu, self.sigma)

    def _std(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return (np.log(x) - self.mu) / self.sigma

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        z = self._std(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -0.5 * z * z - np.log(x) - math.log(self.sigma) - _LOG_SQRT_2PI
        return np.where(x > 0, out, -np.inf)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, special.ndtr(self._std(np.maximum(x, 0.0))), 0.0)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, special.ndtr(-self._std(np.maximum(x, 0.0))), 1.0)

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        return np.exp(self.mu + self.sigma * special.ndtri(q))

    def isf(self, q):
        """Inverse survival function, accurate for small ``q``."""
        q = np.asarray(q, dtype=float)
        return np.exp(self.mu - self.sigma * special.ndtri(q))


@dataclass(frozen=True)
class MixedMarginal:
    """Atom ``1 - p`` at zero, severity law with mass ``p`` on (0, inf)."""

    p: float
    severity: SeverityDistribution

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise DomainError(f"occurrence probability must lie in (0, 1], got {self.p}")

    def cdf(self, x):
        return marginal_cdf(self, x)

    def survival(self, x):
        """P(X > x) = p * survival of the severity, computed without cancellation."""
        x = _check_claims(x)
        return self.p * self.severity.survival(x)

    def quantile(self, u):
        return mixed_quantile(self, u)

    def log_positive_density(self, x):
        """ln(p * psi(x)) for x > 0: the density of the continuous part."""
        return math.log(self.p) + self.severity.logpdf(x)


def _check_claims(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise DomainError("claims must be non-negative numbers")
    return x


def marginal_cdf(m: MixedMarginal, x):
    """F(x) = (1 - p) + p * Psi(x) for x >= 0; F(0) = 1 - p."""
    x = _check_claims(x)
    out = (1.0 - m.p) + m.p * m.severity.cdf(x)
    return out if out.ndim else float(out)


def mixed_quantile(m: MixedMarginal, u):
    """Generalised inverse of :func:`marginal_cdf`.

    Values ``u <= 1 - p`` map to the atom at zero (boundary included).
    """
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("mixed_quantile needs u strictly inside (0, 1)")
    q0 = 1.0 - m.p
    atom = u <= q0
    # exceedance probability of the severity; avoids cancellation near u = 1
    tail = np.where(atom, 0.5, (1.0 - u) / m.p)
    head = np.where(atom, 0.5, (u - q0) / m.p)
    sev = np.where(head <= 0.5, m.severity.quantile(head), m.severity.isf(tail))
    out = np.where(atom, 0.0, sev)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MarginalFitDiagnostics:
    """Sample sizes and asymptotic standard errors of the closed-form MLE."""

    n: int
    n_positive: int
    se_p: float
    se_mu: float
    se_sigma: float


def fit_marginal(column) -> tuple[MixedMarginal, MarginalFitDiagnostics]:
    """Closed-form MLE of a lognormal mixed marginal.

    ``p`` is the fraction of positive entries; ``mu`` and ``sigma`` are the
    mean and the divisor-n standard deviation of the logs of the positives.
    """
    x = _check_claims(column).ravel()
    if x.size == 0:
        raise InsufficientPositives("empty column")
    pos = x[x > 0]
    if pos.size < 2:
        raise InsufficientPositives(f"need at least 2 positive claims, found {pos.size}")
    logs = np.log(pos)
    mu = float(np.mean(logs))
    sigma = float(np.sqrt(np.mean((logs - mu) ** 2)))
    if sigma <= 0:
        raise InsufficientPositives("positive claims are all equal; sigma would be zero")
    n, k = x.size, pos.size
    p = k / n
    diag = MarginalFitDiagnostics(
        n=n,
        n_positive=k,
        se_p=math.sqrt(p * (1.0 - p) / n),
        se_mu=sigma / math.sqrt(k),
        se_sigma=sigma / math.sqrt(2.0 * k),
    )
    return MixedMarginal(p, LognormalSeverity(mu, sigma)), diag
