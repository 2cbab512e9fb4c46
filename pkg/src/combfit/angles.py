"""Cholesky-angle parametrization of correlation matrices.

Row i of the Cholesky factor is a point on the unit sphere written in
spherical coordinates, so any angle vector in (0, pi) maps to a valid
correlation matrix and the optimizer can search without constraints.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, ShapeError
from .mvn_kernels import cholesky, validate_correlation



def n_angles(d: int) -> int:
    return d * (d - 1) // 2


def _dim_from_angles(k: int) -> int:
    d = int(round((1 + math.sqrt(1 + 8 * k)) / 2))
    if n_angles(d) != k:
        raise ShapeError(f"{k} angles do not correspond to any dimension")
    return d


def correlation_from_angles(angles) -> np.ndarray:
    """Correlation matrix L L^T where row i of L is a point on the unit sphere.

    ``angles`` lists theta_{i,j} (0 <= j < i) row by row; each lies in (0, pi).
    """
    angles = np.asarray(angles, dtype=float).ravel()
    if np.any((angles <= 0) | (angles >= math.pi)):
        raise DomainError("angles must lie strictly inside (0, pi)")
    return _corr_unchecked(angles)


def _corr_unchecked(angles: np.ndarray) -> np.ndarray:
    d = _dim_from_angles(angles.size)
    L = np.zeros((d, d))
    L[0, 0] = 1.0
    k = 0
    for i in range(1, d):
        prod = 1.0
        for j in range(i):
            L[i, j] = math.cos(angles[k]) * prod
            prod *= math.sin(angles[k])
            k += 1
        L[i, i] = prod
    R = L @ L.T
    np.fill_diagonal(R, 1.0)
    return R


def angles_from_correlation(R) -> np.ndarray:
    """Inverse of :func:`correlation_from_angles`."""
    R = validate_correlation(R)
    L = cholesky(R)
    d = R.shape[0]
    out = []
    for i in range(1, d):
        prod = 1.0
        for j in range(i):
            c = float(np.clip(L[i, j] / prod, -1.0, 1.0))
            theta = math.acos(c)
            out.append(theta)
            prod *= math.sin(theta)
    return np.array(out)


def _fold(angles: np.ndarray) -> np.ndarray:
    # reflect an unconstrained search point into [0, pi]
    return np.arccos(np.cos(angles))
