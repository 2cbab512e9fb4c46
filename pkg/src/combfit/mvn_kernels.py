"""Gaussian primitives: univariate pdf/cdf/quantile, Cholesky, and the
multivariate normal density and orthant probability.

``mvn_cdf`` is the numerical workhorse of the copula likelihood.  The
algorithm depends on the dimension:

* d = 1: ``scipy.special.ndtr``;
* d = 2: Genz's Gauss-Legendre quadrature of the Drezner-Wesolowsky
  integrand (deterministic, ~1e-15 absolute);
* d = 3, 4: composite Gauss-Legendre over one coordinate, recursing on the
  conditional Gaussian down to the bivariate kernel (deterministic,
  ~1e-14 absolute);
* d >= 5 (or ``method="qmc"``): randomized quasi-Monte-Carlo (Richtmyer
  lattice, baker transform) on the Genz separation-of-variables integrand,
  refined until the 3-sigma error estimate is below ``tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .errors import DomainError, FactorizationError, ShapeError

PIVOT_TOL = 1e-12
DEFAULT_MVN_TOL = 1e-7

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_2PI = math.log(2.0 * math.pi)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
# first 100 primes: Richtmyer generators for up to 101 dimensions
_PRIMES = np.array(
    [p for p in range(2, 600) if all(p % q for q in range(2, int(p**0.5) + 1))][:100],
    dtype=float,
)


def std_normal(kind: str, x):
    """Standard normal ``pdf``, ``cdf`` or ``quantile`` evaluated at ``x``."""
    x = np.asarray(x, dtype=float)
    if kind == "pdf":
        out = np.exp(-0.5 * x * x) / _SQRT_2PI
    elif kind == "cdf":
        out = special.ndtr(x)
    elif kind == "quantile":
        if np.any((x <= 0.0) | (x >= 1.0)) or np.any(np.isnan(x)):
            raise DomainError("normal quantile requires arguments strictly inside (0, 1)")
        out = special.ndtri(x)
    else:
        raise ValueError(f"unknown kind {kind!r}; expected pdf, cdf or quantile")
    return out[()] if out.ndim == 0 else out


def validate_correlation(R, *, atol: float = 1e-10) -> np.ndarray:
    """Return ``R`` as a float array after checking it is a correlation matrix.

    Raises ``ShapeError`` for non-square input, ``DomainError`` for asymmetry,
    a non-unit diagonal or off-diagonals outside (-1, 1), and
    ``FactorizationError`` when ``R`` is not positive definite.
    """
    R = np.array(R, dtype=float, ndmin=2)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ShapeError(f"correlation matrix must be square, got shape {R.shape}")
    if not np.allclose(R, R.T, atol=atol, rtol=0.0):
        raise DomainError("correlation matrix is not symmetric")
    if not np.allclose(np.diag(R), 1.0, atol=atol, rtol=0.0):
        raise DomainError("correlation matrix must have a unit diagonal")
    off = R[~np.eye(R.shape[0], dtype=bool)]
    if np.any(np.abs(off) >= 1.0):
        raise DomainError("off-diagonal correlations must lie strictly inside (-1, 1)")
    cholesky(R)
    return R


def cholesky(A) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite matrix.

    Pivots (squared diagonal entries before the square root) at or below
    1e-12 raise ``FactorizationError`` naming the failing index; near-singular
    matrices are rejected, never regularized.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"cholesky needs a square matrix, got shape {A.shape}")
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > PIVOT_TOL:
            raise FactorizationError(
                f"matrix is not positive definite: pivot {j} equals {pivot:.3e}", pivot=j
            )
        L[j, j] = math.sqrt(pivot)
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def mvn_logpdf(z, R) -> np.ndarray | float:
    """Log density of N(0, R) at the rows of ``z`` (last axis is the dimension)."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    z = np.asarray(z, dtype=float)
    d = R.shape[0]
    if z.shape[-1:] != (d,):
        raise ShapeError(f"point dimension {z.shape[-1:]} does not match matrix dimension {d}")
    L = cholesky(R)
    flat = z.reshape(-1, d)
    # solve L w = z for every row
    w = np.linalg.solve(L, flat.T).T if d > 0 else flat
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    out = -0.5 * np.sum(w * w, axis=1) - 0.5 * logdet - 0.5 * d * _LOG_2PI
    out = out.reshape(z.shape[:-1])
    return float(out) if out.ndim == 0 else out


def mvn_pdf(z, R) -> np.ndarray | float:
    """Density of N(0, R); computed through the Cholesky factor."""
    return np.exp(mvn_logpdf(z, R))


@dataclass(frozen=True)
class PartitionedCorrelation:
    """Block view of a correlation matrix for an active/inactive index split."""

    active: tuple[int, ...]
    inactive: tuple[int, ...]
    R_SS: np.ndarray
    R_ST: np.ndarray
    R_TS: np.ndarray
    R_TT: np.ndarray

    @property
    def regression(self) -> np.ndarray:
        """Conditional mean map R_TS R_SS^-1 (shape t x s)."""
        if not self.active or not self.inactive:
            return np.zeros((len(self.inactive), len(self.active)))
        return np.linalg.solve(self.R_SS, self.R_ST).T

    @property
    def schur(self) -> np.ndarray:
        """Conditional covariance R_TT - R_TS R_SS^-1 R_ST."""
        if not self.active:
            return self.R_TT.copy()
        return self.R_TT - self.regression @ self.R_ST


def partition(R, S: Sequence[int]) -> PartitionedCorrelation:
    """Split ``R`` into blocks for the 0-based index set ``S`` and its complement."""
    R = np.asarray(R, dtype=float)
    d = R.shape[0]
    active = tuple(sorted(set(int(i) for i in S)))
    if any(i < 0 or i >= d for i in active):
        raise DomainError(f"active indices {active} out of range for dimension {d}")
    inactive = tuple(i for i in range(d) if i not in active)
    a, t = list(active), list(inactive)
    return PartitionedCorrelation(
        active=active,
        inactive=inactive,
        R_SS=R[np.ix_(a, a)],
        R_ST=R[np.ix_(a, t)],
        R_TS=R[np.ix_(t, a)],
        R_TT=R[np.ix_(t, t)],
    )


# ---------------------------------------------------------------------------
# bivariate normal cdf
# ---------------------------------------------------------------------------


def _bvnu(h: np.ndarray, k: np.ndarray, r: float) -> np.ndarray:
    """P(X > h, Y > k) for standard bivariate normal with correlation r.

    Finite, broadcast-compatible ``h`` and ``k``; |r| < 1.
    """
    h, k = np.broadcast_arrays(np.asarray(h, float), np.asarray(k, float))
    h = h.copy()
    k = k.copy()
    if r == 0.0:
        return special.ndtr(-h) * special.ndtr(-k)
    tp = 2.0 * math.pi
    x = np.concatenate([1.0 - _GL_X, 1.0 + _GL_X])
    w = np.concatenate([_GL_W, _GL_W]) / 2.0
    hk = h * k
    if abs(r) < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r) / 2.0
        sn = np.sin(asr * x)
        expo = (sn[None, :] * hk.reshape(-1, 1) - hs.reshape(-1, 1)) / (1.0 - sn * sn)[None, :]
        bvn = (np.exp(expo) @ w).reshape(h.shape)
        return bvn * asr / tp + special.ndtr(-h) * special.ndtr(-k)
    if r < 0:
        k = -k
        hk = -hk
    a2 = (1.0 - r) * (1.0 + r)
    a = math.sqrt(a2)
    bs = (h - k) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 80.0
    asr = -(bs / a2 + hk) / 2.0
    bvn = np.where(
        asr > -100.0,
        a * np.exp(np.maximum(asr, -100.0)) * (1.0 - c * (bs - a2) * (1.0 - d * bs) / 3.0 + c * d * a2 * a2),
        0.0,
    )
    b = np.sqrt(bs)
    sp = _SQRT_2PI * special.ndtr(-b / a)
    bvn = np.where(
        hk > -100.0,
        bvn - np.exp(-np.maximum(hk, -100.0) / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0),
        bvn,
    )
    a = a / 2.0
    xs = (a * x) ** 2  # nodes
    bsr = bs.reshape(-1, 1)
    hkr = hk.reshape(-1, 1)
    cr = c.reshape(-1, 1)
    dr = d.reshape(-1, 1)
    asr2 = -(bsr / xs[None, :] + hkr) / 2.0
    sp2 = 1.0 + cr * xs[None, :] * (1.0 + 5.0 * dr * xs[None, :])
    rs = np.sqrt(1.0 - xs)
    ep = np.exp(-(hkr / 2.0) * (xs / (1.0 + rs) ** 2)[None, :]) / rs[None, :]
    terms = np.where(asr2 > -100.0, np.exp(np.maximum(asr2, -100.0)) * (sp2 - ep), 0.0)
    bvn = (a * (terms @ w).reshape(h.shape) - bvn) / tp
    if r > 0:
        return bvn + special.ndtr(-np.maximum(h, k))
    lower = np.where(h < 0, special.ndtr(k) - special.ndtr(h), special.ndtr(-h) - special.ndtr(-k))
    return np.where(h >= k, -bvn, lower - bvn)


def bvn_cdf(a, b, r: float) -> np.ndarray:
    """P(X <= a, Y <= b) for a standard bivariate normal with correlation ``r``.

    Vectorized over ``a`` and ``b``; infinite limits are handled exactly.
    """
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    if not -1.0 < r < 1.0:
        raise DomainError(f"bivariate correlation must lie in (-1, 1), got {r}")
    out = np.empty(a.shape)
    fa, fb = np.isfinite(a), np.isfinite(b)
    both = fa & fb
    if np.any(both):
        out[both] = _bvnu(-a[both], -b[both], float(r))
    # any -inf limit -> 0; +inf limits drop the coordinate
    only_a = fa & ~fb
    only_b = fb & ~fa
    out[only_a] = np.where(b[only_a] > 0, special.ndtr(a[only_a]), 0.0)
    out[only_b] = np.where(a[only_b] > 0, special.ndtr(b[only_b]), 0.0)
    neither = ~fa & ~fb
    out[neither] = np.where((a[neither] > 0) & (b[neither] > 0), 1.0, 0.0)
    return np.clip(out, 0.0, 1.0)


# ---------------------------------------------------------------------------
# d >= 3: randomized lattice QMC on the separation-of-variables integrand
# ---------------------------------------------------------------------------


def _qmc_orthant(
    b: np.ndarray,
    C: np.ndarray,
    tol: float,
    seed: int,
    n_shifts: int = 10,
    n_start: int = 1024,
    max_points: int = 1 << 19,
    chunk: int = 8192,
) -> tuple[np.ndarray, np.ndarray]:
    """P(Z <= b_row) for each row of ``b`` with Z ~ N(0, C C^T), C lower triangular.

    Returns (estimates, 3-sigma error estimates).  Rows may contain +inf; no
    row may contain -inf (callers handle that exactly).
    """
    m, d = b.shape
    diag = np.diag(C)
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, d, 0x6D766E])
    shifts = rng.random((n_shifts, d - 1))
    gen = np.sqrt(_PRIMES[: d - 1])
    sums = np.zeros((n_shifts, m))
    e0 = special.ndtr(b[:, 0] / diag[0])
    tiny = np.finfo(float).tiny
    done = 0
    target = n_start
    while True:
        while done < target:
            n = min(chunk, target - done)
            k = np.arange(done + 1, done + n + 1, dtype=float)
            base = np.outer(k, gen)
            for s in range(n_shifts):
                frac = np.mod(base + shifts[s], 1.0)
                w = np.abs(2.0 * frac - 1.0)  # baker transform
                e = np.broadcast_to(e0[:, None], (m, n))
                f = e.copy()
                y = np.empty((d - 1, m, n))
                for i in range(1, d):
                    arg = np.clip(w[:, i - 1][None, :] * e, tiny, 1.0 - 1e-16)
                    y[i - 1] = special.ndtri(arg)
                    shift = np.tensordot(C[i, :i], y[:i], axes=(0, 0))
                    e = special.ndtr((b[:, i][:, None] - shift) / diag[i])
                    f = f * e
                sums[s] += f.sum(axis=1)
            done += n
        means = sums / done
        est = means.mean(axis=0)
        err = 3.0 * means.std(axis=0, ddof=1) / math.sqrt(n_shifts)
        if np.all(err <= tol) or done >= max_points:
            return est, err
        target = min(2 * done, max_points)


_QUAD_X, _QUAD_W = np.polynomial.legendre.leggauss(16)
QUADRATURE_MAX_DIM = 4
_QUAD_CHUNK = 1 << 16


def _quad_orthant(b: np.ndarray, corr: np.ndarray, panels: int = 12) -> np.ndarray:
    """P(Z <= b_row) by integrating out one coordinate with composite
    Gauss-Legendre and recursing on the conditional law (d >= 3).

    All rows of ``b`` are finite or +inf; -inf rows are handled by callers.
    """
    m, d = b.shape
    q = panels * _QUAD_X.size
    rows = max(1, _QUAD_CHUNK // q ** (d - 2))
    if m > rows:
        # bound the size of the node tensor for the recursive levels
        return np.concatenate([_quad_orthant(b[k : k + rows], corr, panels) for k in range(0, m, rows)])
    # condition on the coordinate least correlated with the rest: smoothest integrand
    off = np.abs(corr - np.eye(d))
    first = int(np.argmin(off.max(axis=1)))
    rest = [i for i in range(d) if i != first]
    beta = corr[rest, first]
    cond = corr[np.ix_(rest, rest)] - np.outer(beta, beta)
    sd = np.sqrt(np.diag(cond))
    cond_corr = cond / np.outer(sd, sd)
    top = b[:, first]
    finite_top = np.where(np.isfinite(top), top, 9.0)
    top = np.minimum(finite_top, 9.0)
    lo = np.minimum(top, 0.0) - 9.0
    # nodes: (m, panels * 16)
    edges = lo[:, None] + (top - lo)[:, None] * np.linspace(0.0, 1.0, panels + 1)[None, :]
    half = (edges[:, 1:] - edges[:, :-1]) / 2.0
    mid = (edges[:, 1:] + edges[:, :-1]) / 2.0
    x = (mid[:, :, None] + half[:, :, None] * _QUAD_X[None, None, :]).reshape(m, -1)
    wx = (half[:, :, None] * _QUAD_W[None, None, :]).reshape(m, -1)
    dens = np.exp(-0.5 * x * x) / _SQRT_2PI
    limits = (b[:, rest][:, None, :] - x[:, :, None] * beta[None, None, :]) / sd[None, None, :]
    flat = limits.reshape(m * q, d - 1)
    if d - 1 == 2:
        inner = bvn_cdf(flat[:, 0], flat[:, 1], float(cond_corr[0, 1]))
    else:
        inner = _quad_orthant(flat, cond_corr, panels)
    val = np.sum(wx * dens * inner.reshape(m, q), axis=1)
    # mass of the first coordinate above the truncation point 9 is < 1e-19
    return np.clip(val, 0.0, 1.0)


def _order_variables(b: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Genz-style prioritization: most constraining limits integrated first."""
    sd = np.sqrt(np.diag(cov))
    scaled = np.where(np.isfinite(b), b, np.inf) / sd
    key = np.mean(np.where(np.isfinite(scaled), scaled, 1e6), axis=0)
    return np.argsort(key, kind="stable")


def mvn_cdf_batch(
    b,
    cov,
    tol: float = DEFAULT_MVN_TOL,
    seed: int = 0,
    return_error: bool = False,
    method: str = "auto",
):
    """Vectorized P(Z <= b_row) for Z ~ N(0, cov) and each row of ``b``.

    ``cov`` must be symmetric positive definite but need not have a unit
    diagonal (conditional Schur complements are passed here directly).
    A zero-column ``b`` yields ones (empty-product convention).

    ``method="auto"`` uses quadrature up to ``QUADRATURE_MAX_DIM`` and
    lattice QMC beyond; ``method="qmc"`` forces QMC for any d >= 3.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[None, :]
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    m, d = b.shape
    if cov.shape != (d, d):
        raise ShapeError(f"limits have dimension {d} but covariance is {cov.shape}")
    if tol <= 0:
        raise DomainError("mvn tolerance must be positive")
    err = np.zeros(m)
    if d == 0:
        out = np.ones(m)
        return (out, err) if return_error else out
    var = np.diag(cov)
    if not np.all(np.isfinite(cov)) or np.any(var <= 0):
        raise FactorizationError("covariance has a non-positive or non-finite diagonal", pivot=int(np.argmin(var)))
    sd = np.sqrt(var)
    bs = b / sd
    corr = cov / np.outer(sd, sd)
    out = np.zeros(m)
    live = ~np.any(np.isneginf(bs), axis=1)
    if d == 1:
        out = special.ndtr(bs[:, 0])
    elif d == 2:
        out[live] = bvn_cdf(bs[live, 0], bs[live, 1], float(corr[0, 1]))
    elif d <= QUADRATURE_MAX_DIM and method != "qmc":
        if np.any(live):
            out[live] = _quad_orthant(bs[live], corr)
    elif np.any(live):
        sub = bs[live]
        order = _order_variables(sub, corr)
        sub = sub[:, order]
        C = cholesky(corr[np.ix_(order, order)])
        est, e = _qmc_orthant(sub, C, tol, seed)
        out[live] = np.clip(est, 0.0, 1.0)
        err[live] = e
    return (out, err) if return_error else out


def mvn_cdf(z, R, tol: float = DEFAULT_MVN_TOL, seed: int = 0, method: str = "auto") -> float:
    """P(Z <= z) for Z ~ N(0, R).

    Deterministic for fixed (z, R, tol, seed); the seed only matters on the
    QMC path (d > QUADRATURE_MAX_DIM or ``method="qmc"``).
    """
    z = np.asarray(z, dtype=float).ravel()
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape != (z.size, z.size):
        raise ShapeError(f"point of length {z.size} does not match matrix of shape {R.shape}")
    return float(mvn_cdf_batch(z[None, :], R, tol=tol, seed=seed, method=method)[0])
