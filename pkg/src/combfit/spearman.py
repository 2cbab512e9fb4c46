"""Spearman rank correlation tools: the Gaussian-copula transform and
exact bounds over tie-breaking rank assignments.

Sparse claim series are dominated by zeros, so the usual midrank Spearman
coefficient hides a wide range of values that distinct-rank assignments
could produce.  :func:`spearman_bounds` returns the extremes of that range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError


def spearman_transform(rho):
    """Gaussian-copula correlation matching a Spearman rho: 2 sin(pi rho / 6)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) > 1):
        raise DomainError("Spearman correlation must lie in [-1, 1]")
    out = 2.0 * np.sin(np.pi * rho / 6.0)
    return float(out) if out.ndim == 0 else out


def spearman_from_correlation(r):
    """Inverse transform: (6 / pi) asin(r / 2)."""
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) > 1):
        raise DomainError("correlation must lie in [-1, 1]")
    out = 6.0 / np.pi * np.arcsin(r / 2.0)
    return float(out) if out.ndim == 0 else out


def spearman_from_ranks(r: np.ndarray, s: np.ndarray) -> float:
    """Spearman rho of two permutations of 1..n: 1 - 6 sum d^2 / (n (n^2 - 1))."""
    n = r.size
    diff = r.astype(float) - s.astype(float)
    return 1.0 - 6.0 * float(diff @ diff) / (n * (n * n - 1.0))


def _ranks(order: np.ndarray) -> np.ndarray:
    r = np.empty(order.size, dtype=np.int64)
    r[order] = np.arange(1, order.size + 1)
    return r


@dataclass(frozen=True)
class SpearmanBounds:
    """Extreme Spearman correlations over admissible tie-breakings."""

    rho_min: float
    rho_max: float
    degenerate: bool = False

    @property
    def r_scale(self) -> tuple[float, float]:
        """Bounds mapped to the Gaussian-copula correlation scale."""
        return (spearman_transform(self.rho_min), spearman_transform(self.rho_max))


def spearman_bounds(x, y) -> SpearmanBounds:
    """Minimum and maximum Spearman rho over distinct-rank tie-breakings.

    Ranks of ``x`` must respect the order of ``x`` (ties broken freely) and
    likewise for ``y``.  Because rho is affine in ``sum R_i S_i``, the
    maximum is reached by breaking ties in ``x`` by ``y`` and in ``y`` by
    ``x`` (rows tied in both get the same order), and the minimum by
    breaking them in the opposite direction.  A constant vector leaves
    every pairing admissible, giving the degenerate range (-1, 1).
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ShapeError("x and y must have equal length")
    n = x.size
    if n < 3:
        raise ShapeError("need at least 3 observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        return SpearmanBounds(-1.0, 1.0, degenerate=True)
    idx = np.arange(n)
    # np.lexsort sorts by the last key first
    r_max = _ranks(np.lexsort((idx, y, x)))
    s_max = _ranks(np.lexsort((idx, x, y)))
    r_min = _ranks(np.lexsort((idx, -y, x)))
    s_min = _ranks(np.lexsort((-idx, -x, y)))
    return SpearmanBounds(spearman_from_ranks(r_min, s_min), spearman_from_ranks(r_max, s_max))


def spearman_midrank(x, y) -> float:
    """Ordinary Spearman rho with midranks for ties."""
    from scipy.stats import spearmanr

    return float(spearmanr(x, y).statistic)
