"""Event studies: abnormal returns, CARs and bootstrap percentile bands."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from .errors import IndexMismatch, WindowOutOfRange
from .series import ReturnPanel, as_period

EXACT_MAX_EVENTS = 5


@dataclass(frozen=True)
class EventSpec:
    """Event at t = 0 with an event window [-lead, lag] and a pre-window
    estimation window of ``estimation_window`` months ending right before it.

    ``event_period`` is a calendar month, or an integer row position when the
    returns carry no calendar.
    """

    event_period: Union[pd.Period, str, int]
    estimation_window: int = 24
    lead: int = 3
    lag: int = 3

    def __post_init__(self):
        if self.estimation_window < 12:
            raise ValueError("estimation window must be at least 12 months")
        if self.lead < 0 or self.lag < 0:
            raise ValueError("event window must contain t = 0")
        if isinstance(self.event_period, str):
            object.__setattr__(self, "event_period", as_period(self.event_period))

    @property
    def taus(self) -> np.ndarray:
        return np.arange(-self.lead, self.lag + 1)

    def position(self, start_period: Optional[pd.Period] = None) -> int:
        if isinstance(self.event_period, (int, np.integer)):
            return int(self.event_period)
        if start_period is None:
            raise ValueError("start_period is needed to place a calendar event")
        return (as_period(self.event_period) - as_period(start_period)).n


def abnormal_returns(returns, spec: EventSpec, start_period=None) -> np.ndarray:
    """Returns minus their estimation-window mean over the event window."""
    r = np.asarray(returns, dtype=float).ravel()
    pos = spec.position(start_period)
    est_start = pos - spec.lead - spec.estimation_window
    end = pos + spec.lag
    if est_start < 0 or end >= r.size:
        raise WindowOutOfRange(
            f"windows need rows {est_start}..{end}, returns cover 0..{r.size - 1}"
        )
    normal = r[est_start:pos - spec.lead].mean()
    return r[pos - spec.lead:end + 1] - normal


def cumulative_ar(ar) -> np.ndarray:
    ar = np.asarray(ar, dtype=float).ravel()
    if ar.size == 0:
        raise ValueError("empty abnormal-return series")
    return np.cumsum(ar)


@dataclass(frozen=True, eq=False)
class EventStudyResult:
    taus: np.ndarray
    per_event_car: np.ndarray = field(repr=False)
    mean_car: np.ndarray = field(repr=False)
    band_lower: np.ndarray = field(repr=False)
    band_upper: np.ndarray = field(repr=False)
    replications: int
    level: float
    exact: bool
    significant_at_event: bool
    labels: tuple = ()

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "tau": self.taus,
                "mean_car": self.mean_car,
                "band_lower": self.band_lower,
                "band_upper": self.band_upper,
            }
        )


def _weighted_quantile(values: np.ndarray, weights: np.ndarray, q: float) -> np.ndarray:
    """Inverse-CDF quantile of a discrete distribution, column-wise."""
    order = np.argsort(values, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(values, order, axis=0)
    cum = np.cumsum(weights[order], axis=0)
    idx = np.argmax(cum >= q - 1e-12, axis=0)
    return sorted_vals[idx, np.arange(values.shape[1])]


def _exact_resamples(n: int):
    """All multisets of size n from n events with their multinomial probabilities."""
    denom = n**n
    for combo in itertools.combinations_with_replacement(range(n), n):
        counts = np.bincount(combo, minlength=n)
        ways = math.factorial(n) // math.prod(math.factorial(c) for c in counts)
        yield counts / n, ways / denom


def bootstrap_car(
    events: Sequence,
    replications: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    taus: Optional[Sequence[int]] = None,
    labels: Sequence[str] = (),
) -> EventStudyResult:
    """Percentile bands for the average CAR path.

    Each bootstrap sample draws N of the N event CAR series with replacement
    and averages them. For N <= 5 the resampling distribution is enumerated
    exactly, so ``replications`` is recorded but no draws are made. The event
    counts as significant when the band at tau = 0 excludes zero.
    """
    if len(events) == 0:
        raise IndexMismatch("no events")
    lengths = {len(np.ravel(e)) for e in events}
    if len(lengths) != 1:
        raise IndexMismatch(f"CAR series lengths differ: {sorted(lengths)}")
    cars = np.vstack([np.asarray(e, dtype=float).ravel() for e in events])
    n, length = cars.shape
    if taus is None:
        if length % 2 == 0:
            raise IndexMismatch("pass taus for an asymmetric event window")
        taus = np.arange(length) - length // 2
    taus = np.asarray(taus)
    if taus.size != length or 0 not in taus:
        raise IndexMismatch("taus must match the CAR length and contain 0")

    alpha = 1.0 - level
    exact = n <= EXACT_MAX_EVENTS
    if exact:
        shares, probs = zip(*_exact_resamples(n))
        means = np.array(shares) @ cars
        probs = np.array(probs)
        lower = _weighted_quantile(means, probs, alpha / 2)
        upper = _weighted_quantile(means, probs, 1 - alpha / 2)
    else:
        rng = np.random.default_rng(seed)
        draws = rng.integers(0, n, size=(replications, n))
        means = cars[draws].mean(axis=1)
        lower, upper = np.quantile(means, [alpha / 2, 1 - alpha / 2], axis=0)

    at0 = int(np.flatnonzero(taus == 0)[0])
    significant = bool(lower[at0] > 0 or upper[at0] < 0)
    return EventStudyResult(
        taus=taus,
        per_event_car=cars,
        mean_car=cars.mean(axis=0),
        band_lower=lower,
        band_upper=upper,
        replications=int(replications),
        level=level,
        exact=exact,
        significant_at_event=significant,
        labels=tuple(labels),
    )


def event_study(
    panel: ReturnPanel,
    spec: EventSpec,
    replications: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> EventStudyResult:
    """One intervention across all markets of the panel (N = k event series)."""
    cars = [
        cumulative_ar(abnormal_returns(panel.matrix[:, j], spec, panel.start_period))
        for j in range(panel.k)
    ]
    return bootstrap_car(
        cars, replications=replications, level=level, seed=seed, taus=spec.taus, labels=panel.markets
    )
