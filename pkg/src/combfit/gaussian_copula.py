"""Gaussian copula: cdf, density, restricted survival copula, mixed partial
derivatives and sampling.  A Student-t sampler is included for timing
benchmarks only (no t density or likelihood).

Index sets are 0-based tuples throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import DomainError, ShapeError
from .mvn_kernels import (
    DEFAULT_MVN_TOL,
    cholesky,
    mvn_cdf_batch,
    mvn_logpdf,
    partition,
    validate_correlation,
)

U_CLAMP = 1e-12


@dataclass(frozen=True)
class GaussianCopula:
    """Gaussian copula with correlation ``R``.

    ``mvn_tol`` and ``base_seed`` configure the orthant-probability kernel
    for dimensions where it is randomized.
    """

    R: np.ndarray
    mvn_tol: float = DEFAULT_MVN_TOL
    base_seed: int = 0
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        R = validate_correlation(self.R)
        R.setflags(write=False)
        object.__setattr__(self, "R", R)
        if not self.mvn_tol > 0:
            raise DomainError("mvn_tol must be positive")
        object.__setattr__(self, "_chol", cholesky(R))

    @property
    def dim(self) -> int:
        return self.R.shape[0]

    @property
    def cholesky_factor(self) -> np.ndarray:
        return self._chol


def _as_points(u, d: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape[-1:] != (d,):
        raise ShapeError(f"expected points of dimension {d}, got shape {u.shape}")
    return u


def _interior(u: np.ndarray) -> None:
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("copula argument must lie strictly inside (0, 1)")


def _subset(S: Sequence[int], d: int) -> tuple[int, ...]:
    S = tuple(sorted(set(int(i) for i in S)))
    if any(i < 0 or i >= d for i in S):
        raise DomainError(f"index set {S} out of range for dimension {d}")
    return S


def copula_cdf(gc: GaussianCopula, u) -> float:
    """C(u; R) = Phi_d(Phi^-1(u); R), with boundary limits.

    Any coordinate equal to 0 gives 0; coordinates equal to 1 are dropped.
    """
    u = _as_points(u, gc.dim).ravel()
    if np.any((u < 0) | (u > 1)) or np.any(np.isnan(u)):
        raise DomainError("copula argument must lie in [0, 1]")
    if np.any(u == 0):
        return 0.0
    keep = np.flatnonzero(u < 1)
    if keep.size == 0:
        return 1.0
    z = special.ndtri(u[keep])
    R = gc.R[np.ix_(keep, keep)]
    return float(mvn_cdf_batch(z[None, :], R, tol=gc.mvn_tol, seed=gc.base_seed)[0])


def log_copula_density_z(R, z) -> np.ndarray | float:
    """ln c at normal scores ``z``: ln phi_d(z; R) - ln phi_d(z; I)."""
    z = np.asarray(z, dtype=float)
    return mvn_logpdf(z, R) + 0.5 * np.sum(z * z, axis=-1) + 0.5 * z.shape[-1] * np.log(2 * np.pi)


def copula_density(gc: GaussianCopula, u) -> float | np.ndarray:
    """Gaussian copula density at interior ``u`` (rows broadcast)."""
    u = _as_points(u, gc.dim)
    _interior(u)
    return np.exp(log_copula_density_z(gc.R, special.ndtri(u)))


def survival_restricted(gc: GaussianCopula, J: Sequence[int], v) -> float:
    """P(U_j > 1 - v_j for all j in J).

    By radial symmetry this is the Gaussian copula of the block ``R_JJ``
    evaluated at ``v``.
    """
    J = _subset(J, gc.dim)
    if not J:
        raise DomainError("survival_restricted needs a non-empty index set")
    v = np.asarray(v, dtype=float).ravel()
    if v.size != len(J):
        raise ShapeError(f"{len(J)} indices but {v.size} arguments")
    if np.any((v < 0) | (v > 1)):
        raise DomainError("survival copula argument must lie in [0, 1]")
    sub = GaussianCopula(gc.R[np.ix_(J, J)], gc.mvn_tol, gc.base_seed)
    return copula_cdf(sub, v)


def mixed_partial_parts(
    R: np.ndarray, S: Sequence[int], z: np.ndarray, tol: float = DEFAULT_MVN_TOL, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """The two factors of the mixed partial derivative of C w.r.t. u_S.

    ``z`` holds normal scores (rows of length d).  Returns the log density
    ratio ``ln phi_s(z_S; R_SS) - ln phi_s(z_S; I)`` and the conditional
    probability ``Phi_{d-s}(z_T - B z_S; R_TT - B R_ST)`` with
    ``B = R_TS R_SS^-1`` (ones when T is empty).
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    part = partition(R, S)
    a, t = list(part.active), list(part.inactive)
    log_dens = log_copula_density_z(part.R_SS, z[:, a]) if a else np.zeros(z.shape[0])
    if not t:
        return log_dens, np.ones(z.shape[0])
    limits = z[:, t] - z[:, a] @ part.regression.T if a else z[:, t]
    return log_dens, mvn_cdf_batch(limits, part.schur, tol=tol, seed=seed)


def log_mixed_partial_z(
    R: np.ndarray, S: Sequence[int], z: np.ndarray, tol: float = DEFAULT_MVN_TOL, seed: int = 0
) -> np.ndarray:
    """Row-wise log of the mixed partial derivative at normal scores ``z``."""
    log_dens, prob = mixed_partial_parts(R, S, z, tol, seed)
    with np.errstate(divide="ignore"):
        return log_dens + np.log(prob)


def mixed_partial(gc: GaussianCopula, S: Sequence[int], u) -> float | np.ndarray:
    """d^s C / prod_{i in S} du_i at interior ``u``; S must be non-empty.

    With S covering every index the result is the copula density.
    """
    S = _subset(S, gc.dim)
    if not S:
        raise DomainError("mixed_partial needs a non-empty index set; use copula_cdf")
    u = _as_points(u, gc.dim)
    _interior(u)
    scalar = u.ndim == 1
    val = np.exp(log_mixed_partial_z(gc.R, S, special.ndtri(np.atleast_2d(u)), gc.mvn_tol, gc.base_seed))
    return float(val[0]) if scalar else val


def sample_normal_scores(gc: GaussianCopula, n: int, seed) -> np.ndarray:
    """n x d draws of N(0, R) (the normal scores behind :func:`sample`)."""
    if n < 1:
        raise DomainError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((n, gc.dim))
    return eps @ gc.cholesky_factor.T


def sample(gc: GaussianCopula, n: int, seed) -> np.ndarray:
    """n iid draws from the copula: u = Phi(L eps)."""
    return special.ndtr(sample_normal_scores(gc, n, seed))


def student_t_scores(R, nu: float, n: int, seed) -> np.ndarray:
    """n x d multivariate Student-t draws y / sqrt(W / nu) with scale ``R``."""
    if not nu > 2:
        raise DomainError("Student-t sampler needs nu > 2")
    if n < 1:
        raise DomainError("sample size must be at least 1")
    L = cholesky(validate_correlation(R))
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((n, L.shape[0])) @ L.T
    w = rng.chisquare(nu, size=(n, 1))
    return y / np.sqrt(w / nu)


def sample_student_t(R, nu: float, n: int, seed) -> np.ndarray:
    """n draws of the Student-t copula with ``nu`` degrees of freedom."""
    return special.stdtr(nu, student_t_scores(R, nu, n, seed))
