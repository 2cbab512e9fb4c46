import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from combfit.errors import DomainError, ShapeError
from combfit.spearman import (
    spearman_bounds,
    spearman_from_correlation,
    spearman_midrank,
    spearman_transform,
)


def _admissible_ranks(v: np.ndarray) -> np.ndarray:
    """Every distinct rank vector consistent with the order of ``v``."""
    n = v.size
    order = np.argsort(v, kind="stable")
    blocks = []
    start = 0
    while start < n:
        stop = start
        while stop < n and v[order[stop]] == v[order[start]]:
            stop += 1
        blocks.append(order[start:stop])
        start = stop
    out = []
    for perms in itertools.product(*(itertools.permutations(b) for b in blocks)):
        r = np.empty(n, dtype=float)
        r[np.concatenate(perms)] = np.arange(1, n + 1)
        out.append(r)
    return np.array(out)


def _oracle(x, y):
    R, S = _admissible_ranks(np.asarray(x, float)), _admissible_ranks(np.asarray(y, float))
    n = len(x)
    cross = R @ S.T
    # rho = 1 - 6 sum (r - s)^2 / (n(n^2-1)) with sum r^2 = sum s^2 fixed
    ss = n * (n + 1) * (2 * n + 1) / 6
    rho = 1 - 6 * (2 * ss - 2 * cross) / (n * (n * n - 1))
    return rho.min(), rho.max()


class TestTransform:
    def test_examples(self):
        assert spearman_transform(0.0) == 0.0
        assert spearman_transform(1.0) == pytest.approx(1.0, abs=1e-15)
        assert spearman_transform(0.5) == pytest.approx(0.5176381, abs=1e-7)

    @given(st.floats(-1, 1))
    def test_inverse(self, r):
        assert spearman_from_correlation(spearman_transform(r)) == pytest.approx(r, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            spearman_transform(1.5)


class TestBounds:
    def test_untied(self):
        rng = np.random.default_rng(0)
        x, y = rng.normal(size=(2, 50))
        b = spearman_bounds(x, y)
        assert b.rho_min == pytest.approx(b.rho_max, abs=1e-12)
        assert b.rho_max == pytest.approx(spearman_midrank(x, y), abs=1e-12)

    def test_small_enumeration(self):
        b = spearman_bounds([0, 0, 1], [0, 0, 1])
        assert (b.rho_min, b.rho_max) == pytest.approx(_oracle([0, 0, 1], [0, 0, 1]))
        assert (b.rho_min, b.rho_max) == pytest.approx((0.5, 1.0))

    def test_degenerate(self):
        b = spearman_bounds([1, 1, 1, 1], [0, 1, 2, 3])
        assert b.degenerate and (b.rho_min, b.rho_max) == (-1.0, 1.0)

    def test_shapes(self):
        with pytest.raises(ShapeError):
            spearman_bounds([1, 2, 3], [1, 2])
        with pytest.raises(ShapeError):
            spearman_bounds([1, 2], [1, 2])

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
    def test_exhaustive_ternary(self, n):
        # bounds depend on the multiset of (x_i, y_i) pairs only, so every
        # multiset of size n over {0,1,2}^2 covers every vector pair of length n
        cells = [(a, b) for a in range(3) for b in range(3)]
        checked = 0
        for combo in itertools.combinations_with_replacement(cells, n):
            x = np.array([c[0] for c in combo], float)
            y = np.array([c[1] for c in combo], float)
            if np.all(x == x[0]) or np.all(y == y[0]):
                continue
            b = spearman_bounds(x, y)
            lo, hi = _oracle(x, y)
            assert b.rho_min == pytest.approx(lo, abs=1e-12), (x, y)
            assert b.rho_max == pytest.approx(hi, abs=1e-12), (x, y)
            checked += 1
        assert checked > 0

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=3, max_size=8))
    def test_row_permutation_invariant(self, pairs):
        x = np.array([p[0] for p in pairs], float)
        y = np.array([p[1] for p in pairs], float)
        perm = np.random.default_rng(len(pairs)).permutation(len(pairs))
        a, b = spearman_bounds(x, y), spearman_bounds(x[perm], y[perm])
        assert (a.rho_min, a.rho_max) == pytest.approx((b.rho_min, b.rho_max), abs=1e-12)
        if not a.degenerate:
            assert a.rho_min <= spearman_midrank(x, y) + 1e-12 <= a.rho_max + 2e-12

    def test_r_scale(self):
        b = spearman_bounds([0, 0, 1, 2], [0, 1, 1, 2])
        lo, hi = b.r_scale
        assert lo == pytest.approx(2 * math.sin(math.pi * b.rho_min / 6))
        assert hi == pytest.approx(2 * math.sin(math.pi * b.rho_max / 6))


def test_consistency_with_gaussian_copula():
    # continuous Gaussian-copula data: transformed sample Spearman recovers R
    n = 10_000
    for r in (0.2, 0.5, 0.8):
        rng = np.random.default_rng(int(r * 100))
        z = rng.multivariate_normal([0, 0], [[1, r], [r, 1]], size=n)
        est = spearman_transform(spearman_midrank(z[:, 0], z[:, 1]))
        assert abs(est - r) < 4 * (1 - r * r) / math.sqrt(n)
