"""Independent reference computations shared by the test modules."""

from __future__ import annotations

import itertools

import numpy as np

from combfit.gaussian_copula import GaussianCopula, copula_cdf

# central-difference step per derivative order (roundoff grows like h^-s)
FD_STEPS = {1: 1e-3, 2: 4e-3, 3: 1e-2, 4: 2e-2}


def random_correlation(d: int, rng, spread: float = 1.0) -> np.ndarray:
    """Random well-conditioned correlation matrix (normalized Wishart-like draw)."""
    A = rng.normal(size=(d, d + 2)) * spread
    C = A @ A.T + np.eye(d)
    s = np.sqrt(np.diag(C))
    R = C / np.outer(s, s)
    np.fill_diagonal(R, 1.0)
    return R


def fd_mixed_partial(gc: GaussianCopula, S, u, h: float | None = None) -> float:
    """Central finite difference of copula_cdf in the coordinates S, with one
    Richardson step (error O(h^4))."""
    S = list(S)
    h = FD_STEPS[len(S)] if h is None else h
    u = np.asarray(u, dtype=float)

    def central(step):
        total = 0.0
        for signs in itertools.product((-1.0, 1.0), repeat=len(S)):
            v = u.copy()
            v[S] += step * np.array(signs)
            total += np.prod(signs) * copula_cdf(gc, v)
        return total / (2.0 * step) ** len(S)

    return (4.0 * central(h / 2) - central(h)) / 3.0


def brute_orthant(b, R, n: int, seed: int) -> float:
    """Plain Monte Carlo P(Z <= b) for Z ~ N(0, R)."""
    rng = np.random.default_rng(seed)
    L = np.linalg.cholesky(R)
    z = rng.standard_normal((n, len(b))) @ L.T
    return float(np.mean(np.all(z <= b, axis=1)))
