import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from combfit.gaussian_copula import (
    GaussianCopula,
    copula_cdf,
    copula_density,
    mixed_partial,
    sample,
    sample_student_t,
    student_t_scores,
    survival_restricted,
)
from combfit.errors import DomainError, FactorizationError, ShapeError

from oracles import brute_orthant, fd_mixed_partial, random_correlation

R3 = np.array([[1.0, 0.5, 0.3], [0.5, 1.0, 0.4], [0.3, 0.4, 1.0]])


def test_rejects_invalid_matrix():
    with pytest.raises((DomainError, FactorizationError)):
        GaussianCopula(np.array([[1.0, 1.2], [1.2, 1.0]]))
    with pytest.raises(DomainError):
        GaussianCopula(np.array([[1.0, 0.2], [0.3, 1.0]]))


def test_cdf_boundaries():
    gc = GaussianCopula(R3)
    assert copula_cdf(gc, [0.0, 0.5, 0.5]) == 0.0
    assert copula_cdf(gc, [1.0, 1.0, 1.0]) == 1.0
    # a coordinate at 1 drops out: bivariate margin
    biv = GaussianCopula(R3[:2, :2])
    assert copula_cdf(gc, [0.3, 0.6, 1.0]) == pytest.approx(copula_cdf(biv, [0.3, 0.6]), abs=1e-14)
    assert copula_cdf(gc, [0.3, 1.0, 1.0]) == pytest.approx(0.3, abs=1e-14)
    with pytest.raises(DomainError):
        copula_cdf(gc, [1.2, 0.5, 0.5])
    with pytest.raises(ShapeError):
        copula_cdf(gc, [0.5, 0.5])


def test_independence_cdf_is_product():
    gc = GaussianCopula(np.eye(3))
    u = np.array([0.2, 0.7, 0.45])
    assert copula_cdf(gc, u) == pytest.approx(np.prod(u), abs=1e-13)
    assert copula_density(gc, u) == pytest.approx(1.0)


def test_cdf_against_monte_carlo():
    gc = GaussianCopula(R3)
    u = np.array([0.4, 0.6, 0.5])
    mc = brute_orthant(special.ndtri(u), R3, 400_000, 1)
    se = np.sqrt(mc * (1 - mc) / 400_000)
    assert abs(copula_cdf(gc, u) - mc) < 4 * se


def test_density_matches_scipy():
    u = np.array([0.2, 0.55, 0.9])
    z = special.ndtri(u)
    ref = stats.multivariate_normal(cov=R3).pdf(z) / np.prod(stats.norm.pdf(z))
    assert copula_density(GaussianCopula(R3), u) == pytest.approx(ref, rel=1e-12)


def test_radial_symmetry():
    gc = GaussianCopula(R3)
    v = np.array([0.3, 0.8, 0.6])
    # P(U > 1 - v) computed from the cdf by inclusion-exclusion
    total = 0.0
    for mask in range(8):
        w = np.array([(1 - v[i]) if mask >> i & 1 else 1.0 for i in range(3)])
        total += (-1) ** bin(mask).count("1") * copula_cdf(gc, w)
    assert survival_restricted(gc, [0, 1, 2], v) == pytest.approx(total, abs=1e-12)


def test_survival_restricted_single_index_is_identity():
    gc = GaussianCopula(R3)
    assert survival_restricted(gc, [1], [0.37]) == pytest.approx(0.37, abs=1e-15)
    with pytest.raises(DomainError):
        survival_restricted(gc, [], [])


@pytest.mark.parametrize("d", [2, 3, 4])
def test_mixed_partial_finite_differences(d):
    rng = np.random.default_rng(10 + d)
    for _ in range(4):
        gc = GaussianCopula(random_correlation(d, rng))
        s = int(rng.integers(1, d + 1))
        S = sorted(int(i) for i in rng.choice(d, s, replace=False))
        u = rng.uniform(0.1, 0.9, d)
        assert abs(mixed_partial(gc, S, u) - fd_mixed_partial(gc, S, u)) < 1e-5


def test_mixed_partial_full_set_is_density():
    gc = GaussianCopula(R3)
    u = np.array([0.3, 0.6, 0.2])
    assert mixed_partial(gc, [0, 1, 2], u) == pytest.approx(copula_density(gc, u), rel=1e-12)


def test_mixed_partial_single_index_is_conditional_cdf():
    # dC/du_1 for d=2 equals P(U_2 <= u_2 | U_1 = u_1)
    r = 0.6
    gc = GaussianCopula(np.array([[1.0, r], [r, 1.0]]))
    u = np.array([0.3, 0.7])
    z = special.ndtri(u)
    ref = special.ndtr((z[1] - r * z[0]) / np.sqrt(1 - r * r))
    assert mixed_partial(gc, [0], u) == pytest.approx(ref, abs=1e-14)


def test_mixed_partial_rejects_bad_input():
    gc = GaussianCopula(R3)
    with pytest.raises(DomainError):
        mixed_partial(gc, [], [0.5, 0.5, 0.5])
    with pytest.raises(DomainError):
        mixed_partial(gc, [0], [0.0, 0.5, 0.5])
    with pytest.raises(DomainError):
        mixed_partial(gc, [5], [0.5, 0.5, 0.5])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.02, 0.98), min_size=3, max_size=3))
def test_cdf_frechet_bounds(u):
    u = np.array(u)
    c = copula_cdf(GaussianCopula(R3), u)
    assert max(0.0, u.sum() - 2) - 1e-12 <= c <= u.min() + 1e-12


def test_sample_deterministic_and_uniform():
    gc = GaussianCopula(R3)
    a, b = sample(gc, 5000, 3), sample(gc, 5000, 3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, sample(gc, 5000, 4))
    for j in range(3):
        assert stats.kstest(a[:, j], "uniform").pvalue > 1e-3
    z = special.ndtri(a)
    np.testing.assert_allclose(np.corrcoef(z.T), R3, atol=0.04)


def test_student_t_sampler():
    u = sample_student_t(R3, 4.0, 20000, 9)
    for j in range(3):
        assert stats.kstest(u[:, j], "uniform").pvalue > 1e-3
    y = student_t_scores(R3, 4.0, 20000, 9)
    assert stats.kstest(y[:, 0], stats.t(4).cdf).pvalue > 1e-3
    # Kendall's tau of an elliptical copula is (2 / pi) arcsin(r)
    tau = stats.kendalltau(u[:4000, 0], u[:4000, 1]).statistic
    assert tau == pytest.approx(2 / np.pi * np.arcsin(0.5), abs=0.03)
