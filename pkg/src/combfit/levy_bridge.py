"""Continuous-time side of the model.

* Poisson scaling of exact-active-set probabilities into intensities.
* A subset-process simulator: one Poisson process for every non-empty
  subset of components (2^d - 1 of them), used to show the exponential
  cost of that construction.
* The bivariate continuous-time log-likelihood under a Clayton Levy
  copula, plus its discrete-time counterpart for small periods.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import special

from .gaussian_copula import sample_normal_scores, student_t_scores
from .errors import DomainError, ParameterError, SamplerStarved, ShapeError
from .marginals import LognormalSeverity
from .comb_bernoulli import CombBernoulliModel, active_set_probabilities, all_subsets, claims_from_uniforms

MAX_LEVY_DIM = 16
MIN_ACCEPTANCE = 1e-4


@dataclass(frozen=True)
class IntensitySet:
    """Intensities of the subset processes over a horizon ``T``.

    ``lambda_perp[I]`` is the rate at which exactly the components in I
    jump together; ``dt`` is the period used for Poisson scaling.
    """

    horizon_T: float
    lambda_perp: dict[tuple[int, ...], float]
    dt: float = 1.0

    def __post_init__(self):
        if not self.horizon_T > 0 or not self.dt > 0:
            raise DomainError("horizon and period must be positive")
        if any(v < 0 for v in self.lambda_perp.values()):
            raise ParameterError("intensities must be non-negative")

    @property
    def d(self) -> int:
        return 1 + max(max(I) for I in self.lambda_perp)

    def marginal(self, i: int) -> float:
        """Total jump rate of component ``i``."""
        return sum(v for I, v in self.lambda_perp.items() if i in I)

    def total(self) -> float:
        return sum(self.lambda_perp.values())


def intensities_from_model(
    model: CombBernoulliModel, dt: float = 1.0, horizon_T: float = 1.0, probabilities=None
) -> IntensitySet:
    """lambda_I = P(active set is exactly I) / dt for every non-empty I.

    ``probabilities`` may supply precomputed exact-set probabilities (for
    example Monte-Carlo frequencies for a non-Gaussian copula).
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    probs = probabilities if probabilities is not None else active_set_probabilities(model)
    # tiny negative values are inclusion-exclusion rounding noise
    lam = {I: max(float(probs[I]), 0.0) / dt for I in all_subsets(model.d, include_empty=False)}
    return IntensitySet(horizon_T, lam, dt)


def empirical_set_probabilities(
    model: CombBernoulliModel, n: int, seed, nu: float | None = None
) -> dict[tuple[int, ...], float]:
    """Exact-active-set frequencies from ``n`` simulated rows."""
    U = _uniforms(model, n, seed, nu)[0]
    keys = (U > 1.0 - model.p) @ (1 << np.arange(model.d))
    counts = np.bincount(keys, minlength=1 << model.d)
    return {I: counts[sum(1 << i for i in I)] / n for I in all_subsets(model.d)}


def _uniforms(model: CombBernoulliModel, n: int, seed, nu: float | None):
    if nu is None:
        z = sample_normal_scores(model.copula, n, seed)
        return special.ndtr(z), special.ndtr(-z)
    t = student_t_scores(model.R, nu, n, seed)
    return special.stdtr(nu, t), special.stdtr(nu, -t)


@dataclass
class EventList:
    """Merged jump events: times in (0, T] and loss vectors (zeros off the active set)."""

    times: np.ndarray
    losses: np.ndarray
    subsets: list[tuple[int, ...]]
    n_processes: int

    def __len__(self) -> int:
        return self.times.size


def simulate_levy(
    intensities: IntensitySet,
    model: CombBernoulliModel,
    seed,
    nu: float | None = None,
    batch: int = 4096,
) -> EventList:
    """Simulate every subset process independently and merge by time.

    For subset I the event count is Poisson(lambda_I T) with uniform event
    times; jump sizes come from rejection sampling: rows drawn as in the
    discrete model are kept when their active set is exactly I.
    """
    d = model.d
    if d > MAX_LEVY_DIM:
        raise DomainError(f"subset-process simulation is limited to d <= {MAX_LEVY_DIM} (2^d - 1 processes)")
    rng = np.random.default_rng(seed)
    T, dt = intensities.horizon_T, intensities.dt
    thresholds = 1.0 - model.p
    weights = 1 << np.arange(d)
    times, losses, subsets = [], [], []
    subs = all_subsets(d, include_empty=False)
    for I in subs:
        lam = intensities.lambda_perp.get(I, 0.0)
        count = int(rng.poisson(lam * T))
        if count == 0:
            continue
        acc = lam * dt
        if acc < MIN_ACCEPTANCE:
            raise SamplerStarved(f"acceptance {acc:.2e} for subset {I} is below {MIN_ACCEPTANCE}", subset=I)
        key = sum(1 << i for i in I)
        got = []
        need = count
        while need > 0:
            m = max(batch, int(math.ceil(1.5 * need / acc)))
            U, V = _uniforms(model, m, rng, nu)
            hit = ((U > thresholds) @ weights) == key
            if np.any(hit):
                rows = claims_from_uniforms(model.marginals, U[hit][:need], V[hit][:need])
                got.append(rows)
                need -= rows.shape[0]
        times.append(rng.uniform(0.0, T, size=count))
        losses.append(np.vstack(got))
        subsets.extend([I] * count)
    if not times:
        return EventList(np.zeros(0), np.zeros((0, d)), [], len(subs))
    t = np.concatenate(times)
    x = np.vstack(losses)
    rank_of = {I: k for k, I in enumerate(subs)}
    ranks = np.array([rank_of[I] for I in subsets])
    order = np.lexsort((ranks, t))
    return EventList(t[order], x[order], [subsets[k] for k in order], len(subs))


def write_events_csv(path, events: EventList) -> None:
    """CSV with columns time, x_1..x_d."""
    d = events.losses.shape[1]
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["time"] + [f"x_{i + 1}" for i in range(d)])
        for t, row in zip(events.times, events.losses):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def read_events_csv(path) -> EventList:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "time":
        raise ShapeError("event file must start with a 'time' column")
    data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(rows[0]))
    x = data[:, 1:]
    subsets = [tuple(int(i) for i in np.flatnonzero(r > 0)) for r in x]
    return EventList(data[:, 0], x, subsets, (1 << x.shape[1]) - 1)


# ---------------------------------------------------------------------------
# bivariate Clayton Levy copula
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClaytonLevyCopula:
    """F(u, v) = (u^-delta + v^-delta)^(-1/delta) on [0, inf)^2."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError("Clayton parameter must be positive")

    def __call__(self, u, v):
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        d = self.delta
        with np.errstate(divide="ignore", over="ignore"):
            s = u ** (-d) + v ** (-d)
            out = s ** (-1.0 / d)
        return np.where((u == 0) | (v == 0), 0.0, out)

    def du(self, u, v):
        """dF/du."""
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        d = self.delta
        # (1 + (u/v)^d)^(-1/d - 1): stable form of s^(-1/d-1) u^(-d-1)
        return (1.0 + (u / v) ** d) ** (-1.0 / d - 1.0)

    def du_complement(self, u, v):
        """1 - dF/du, accurate when u is small relative to v."""
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        d = self.delta
        return -np.expm1((-1.0 / d - 1.0) * np.log1p((u / v) ** d))

    def duv(self, u, v):
        """d^2 F / du dv."""
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        d = self.delta
        s = u ** (-d) + v ** (-d)
        return (1.0 + d) * s ** (-1.0 / d - 2.0) * u ** (-d - 1.0) * v ** (-d - 1.0)


def _split_events(events) -> np.ndarray:
    x = events.losses if isinstance(events, EventList) else np.asarray(events, dtype=float)
    x = np.atleast_2d(x)
    if x.shape[1] != 2:
        raise ShapeError("bivariate likelihood needs two loss columns")
    if np.any(x < 0) or np.any(np.all(x == 0, axis=1)):
        raise DomainError("events must have non-negative losses with at least one positive entry")
    return x


def clayton_intensities(lambda1: float, lambda2: float, clayton: ClaytonLevyCopula) -> dict[tuple[int, ...], float]:
    both = float(clayton(lambda1, lambda2))
    lam = {(0,): lambda1 - both, (1,): lambda2 - both, (0, 1): both}
    neg = [I for I, v in lam.items() if v < 0]
    if neg:
        raise ParameterError(f"negative induced intensity for subset {neg[0]}")
    return lam


def continuous_time_loglik_2d(
    events,
    lambda1: float,
    lambda2: float,
    severities: Sequence[LognormalSeverity],
    clayton: ClaytonLevyCopula,
    T: float,
) -> float:
    """Log-likelihood of a bivariate compound-Poisson path.

    Jump sizes enter through the tail integrals lambda_i * survival_i(x_i);
    co-jumps use the mixed second partial of the Levy copula, single jumps
    use one minus its first partial against the other full intensity.
    """
    x = _split_events(events)
    lam = clayton_intensities(lambda1, lambda2, clayton)
    s1, s2 = severities
    total = 0.0
    both = (x[:, 0] > 0) & (x[:, 1] > 0)
    only1 = (x[:, 0] > 0) & (x[:, 1] == 0)
    only2 = (x[:, 0] == 0) & (x[:, 1] > 0)
    if np.any(both):
        a, b = x[both, 0], x[both, 1]
        zeta = clayton.duv(lambda1 * s1.survival(a), lambda2 * s2.survival(b))
        total += np.sum(np.log(zeta) + math.log(lambda1) + s1.logpdf(a) + math.log(lambda2) + s2.logpdf(b))
    if np.any(only1):
        a = x[only1, 0]
        zeta = clayton.du_complement(lambda1 * s1.survival(a), lambda2)
        total += np.sum(np.log(zeta) + math.log(lambda1) + s1.logpdf(a))
    if np.any(only2):
        b = x[only2, 1]
        zeta = clayton.du_complement(lambda2 * s2.survival(b), lambda1)
        total += np.sum(np.log(zeta) + math.log(lambda2) + s2.logpdf(b))
    return float(total - T * sum(lam.values()))


def clayton_survival_copula(delta: float):
    """Clayton copula C(a, b) = (a^-delta + b^-delta - 1)^(-1/delta) and its partials."""

    def C(a, b):
        return (a ** (-delta) + b ** (-delta) - 1.0) ** (-1.0 / delta)

    def Ca(a, b):
        return (a ** (-delta) + b ** (-delta) - 1.0) ** (-1.0 / delta - 1.0) * a ** (-delta - 1.0)

    def Cab(a, b):
        s = a ** (-delta) + b ** (-delta) - 1.0
        return (1.0 + delta) * s ** (-1.0 / delta - 2.0) * a ** (-delta - 1.0) * b ** (-delta - 1.0)

    return C, Ca, Cab


def discrete_loglik_2d(
    events,
    times,
    lambda1: float,
    lambda2: float,
    severities: Sequence[LognormalSeverity],
    delta: float,
    T: float,
    dt: float,
) -> float:
    """Discrete-time log-likelihood of an event path binned into periods of length dt.

    The bivariate model has occurrence probabilities p_i = lambda_i dt and a
    Clayton survival copula.  Each event contributes the mixed-marginal
    density of its period; the ln dt factor per event (the size of a time
    slot) is removed so the value is comparable with
    :func:`continuous_time_loglik_2d`.  Two events in one period raise
    DomainError.
    """
    x = _split_events(events)
    times = np.asarray(times, dtype=float)
    n_slots = int(round(T / dt))
    if abs(n_slots * dt - T) > 1e-9 * T:
        raise DomainError("T must be a multiple of dt")
    slots = np.ceil(times / dt - 1e-12).astype(int)
    if np.unique(slots).size != slots.size:
        raise DomainError("two events fall into the same period")
    p1, p2 = lambda1 * dt, lambda2 * dt
    if p1 >= 1 or p2 >= 1:
        raise DomainError("lambda * dt must be below 1")
    C, Ca, Cab = clayton_survival_copula(delta)
    s1, s2 = severities
    total = 0.0
    both = (x[:, 0] > 0) & (x[:, 1] > 0)
    only1 = (x[:, 0] > 0) & (x[:, 1] == 0)
    only2 = (x[:, 0] == 0) & (x[:, 1] > 0)
    if np.any(both):
        a, b = x[both, 0], x[both, 1]
        dens = Cab(p1 * s1.survival(a), p2 * s2.survival(b))
        total += np.sum(np.log(dens) + math.log(p1) + s1.logpdf(a) + math.log(p2) + s2.logpdf(b))
    if np.any(only1):
        a = x[only1, 0]
        total += np.sum(np.log(1.0 - Ca(p1 * s1.survival(a), p2)) + math.log(p1) + s1.logpdf(a))
    if np.any(only2):
        b = x[only2, 1]
        total += np.sum(np.log(1.0 - Ca(p2 * s2.survival(b), p1)) + math.log(p2) + s2.logpdf(b))
    empty = 1.0 - p1 - p2 + C(p1, p2)
    total += (n_slots - x.shape[0]) * math.log(empty)
    return float(total - x.shape[0] * math.log(dt))
