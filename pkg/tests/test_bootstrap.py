import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from combfit.bootstrap import (
    BootstrapOptions,
    nearest_rank_quantile,
    parameter_names,
    parametric_bootstrap,
    percentile_intervals,
    replica_seed,
)
from combfit.errors import BootstrapUnstable, DomainError
from combfit.estimation import FitOptions
from combfit.comb_bernoulli import CombBernoulliModel

MODEL = CombBernoulliModel.from_params(
    [0.5, 0.4, 0.3], [0.2, -0.1, 0.0], [0.9, 1.1, 1.0], [[1, 0.6, 0.4], [0.6, 1, 0.5], [0.4, 0.5, 1]]
)
FAST = BootstrapOptions(fit=FitOptions(restarts=1, tol=1e-4))


def test_nearest_rank_convention():
    v = np.arange(1.0, 11.0)  # B = 10
    assert nearest_rank_quantile(v, 0.025) == 1.0  # ceil(0.25) = 1
    assert nearest_rank_quantile(v, 0.975) == 10.0  # ceil(9.75) = 10
    assert nearest_rank_quantile(v, 0.5) == 5.0
    assert nearest_rank_quantile(v, 0.3) == 3.0  # exact multiple stays put
    assert nearest_rank_quantile(v[::-1], 0.5) == 5.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=50), st.floats(0.001, 0.999))
def test_nearest_rank_is_an_order_statistic(vals, q):
    v = np.array(vals)
    x = nearest_rank_quantile(v, q)
    assert x in v
    assert np.mean(v <= x) >= q - 1e-12


def test_bonferroni_widens():
    rng = np.random.default_rng(0)
    reps = rng.normal(size=(1000, 3))
    raw = percentile_intervals(reps, 0.05, 1)
    adj = percentile_intervals(reps, 0.05, 3)
    for (a, b), (c, d) in zip(raw, adj):
        assert c <= a and d >= b


def test_replica_seeds_distinct():
    seeds = {replica_seed(7, b) for b in range(1000)}
    assert len(seeds) == 1000
    assert replica_seed(7, 3) == replica_seed(7, 3)


def test_parameter_names():
    assert parameter_names(MODEL) == ["rho[x1,x2]", "rho[x1,x3]", "rho[x2,x3]"]
    assert len(parameter_names(MODEL, include_marginals=True)) == 12


def test_single_replica_is_degenerate():
    res = parametric_bootstrap(MODEL, 400, 1, 0.05, 3, FAST)
    for (lo, hi), val in zip(res.intervals, res.replicas[0]):
        assert lo == hi == val


def test_deterministic_and_thread_independent():
    a = parametric_bootstrap(MODEL, 400, 6, 0.05, 11, FAST)
    b = parametric_bootstrap(MODEL, 400, 6, 0.05, 11, BootstrapOptions(fit=FAST.fit, threads=3))
    np.testing.assert_array_equal(a.replicas, b.replicas)
    assert a.intervals == b.intervals


def test_intervals_bracket_truth():
    res = parametric_bootstrap(MODEL, 1500, 40, 0.05, 2, FAST)
    truth = [0.6, 0.4, 0.5]
    for (lo, hi), t in zip(res.intervals, truth):
        assert lo < t < hi
    assert res.bonferroni and res.intervals == res.intervals_bonferroni
    unadj = parametric_bootstrap(MODEL, 1500, 40, 0.05, 2, BootstrapOptions(bonferroni=False, fit=FAST.fit))
    assert unadj.intervals == res.intervals_unadjusted
    doc = res.to_dict()
    assert doc["B"] == 40 and len(doc["intervals"]) == 3


def test_include_marginals():
    res = parametric_bootstrap(MODEL, 500, 3, 0.1, 1, BootstrapOptions(include_marginals=True, fit=FAST.fit))
    assert res.replicas.shape == (3, 12)


def test_bad_arguments():
    with pytest.raises(DomainError):
        parametric_bootstrap(MODEL, 100, 0)
    with pytest.raises(DomainError):
        parametric_bootstrap(MODEL, 100, 5, alpha=1.5)


def test_unstable_when_refits_fail():
    # three rows cannot be refitted (fewer than d + 2), so every replica fails
    with pytest.raises(BootstrapUnstable):
        parametric_bootstrap(MODEL, 3, 4, 0.05, 0, FAST)


def test_interval_width_shrinks_with_B():
    # replica seeds are counter-based, so B=100 and B=400 are prefixes of B=1600
    m = CombBernoulliModel.from_params([0.5, 0.4], [0, 0], [1, 1], [[1, 0.5], [0.5, 1]])
    opts = BootstrapOptions(fit=FitOptions(restarts=1, tol=1e-3))
    widths = np.zeros((10, 3))
    for s in range(10):
        reps = parametric_bootstrap(m, 100, 1600, 0.05, s, opts).replicas
        for k, B in enumerate((100, 400, 1600)):
            (lo, hi), = percentile_intervals(reps[:B], 0.05, 1)
            widths[s, k] = hi - lo
    mean = widths.mean(axis=0)
    assert mean[0] > mean[1] > mean[2], f"mean widths {mean}"
