"""Monthly price series, log returns and gap imputation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import pandas as pd

from .errors import GapTooLong, HasGaps, InsufficientData, MalformedInput, NoOverlap

MIN_PRESENT = 24
MIN_PANEL_RETURNS = 25

PeriodLike = Union[pd.Period, str]


def as_period(value: PeriodLike) -> pd.Period:
    """Coerce ``value`` to a monthly :class:`pandas.Period`."""
    if isinstance(value, pd.Period):
        return value.asfreq("M")
    return pd.Period(value, freq="M")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Monthly price levels for one market.

    Absent observations are stored as NaN. Leading and trailing absences are
    trimmed on construction, so every gap lies strictly inside the observed
    span.
    """

    market_id: str
    start_period: pd.Period
    values: np.ndarray

    def __post_init__(self):
        start = as_period(self.start_period)
        vals = np.array(self.values, dtype=float, copy=True).ravel()
        present = ~np.isnan(vals)
        if not present.any():
            raise InsufficientData(f"{self.market_id}: no observations")
        first = int(np.argmax(present))
        last = len(vals) - int(np.argmax(present[::-1]))
        vals = vals[first:last]
        start = start + first
        obs = vals[~np.isnan(vals)]
        if not np.all(np.isfinite(obs)) or np.any(obs <= 0):
            raise MalformedInput(f"{self.market_id}: prices must be finite and positive")
        if obs.size < MIN_PRESENT:
            raise InsufficientData(
                f"{self.market_id}: {obs.size} observations, need at least {MIN_PRESENT}"
            )
        object.__setattr__(self, "start_period", start)
        object.__setattr__(self, "values", _frozen(vals))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end_period(self) -> pd.Period:
        return self.start_period + (len(self.values) - 1)

    @property
    def periods(self) -> pd.PeriodIndex:
        return pd.period_range(self.start_period, periods=len(self.values), freq="M")

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    @property
    def has_gaps(self) -> bool:
        return bool(self.missing.any())

    def gap_runs(self) -> list[tuple[int, int]]:
        """Return ``(start_index, length)`` for every run of absent values."""
        runs = []
        miss = self.missing
        i = 0
        while i < len(miss):
            if miss[i]:
                j = i
                while j < len(miss) and miss[j]:
                    j += 1
                runs.append((i, j - i))
                i = j
            else:
                i += 1
        return runs

    def with_values(self, values) -> "PriceSeries":
        return PriceSeries(self.market_id, self.start_period, values)

    def to_series(self) -> pd.Series:
        return pd.Series(np.array(self.values), index=self.periods, name=self.market_id)


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """Aligned T x k matrix of monthly log returns.

    ``start_period`` labels the first row; a return is labelled with the
    month of the later of the two prices it is computed from.
    """

    markets: tuple
    start_period: pd.Period
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float, copy=True)
        if mat.ndim == 1:
            mat = mat[:, None]
        markets = tuple(str(m) for m in self.markets)
        if mat.ndim != 2 or mat.shape[1] != len(markets):
            raise MalformedInput("matrix columns must match the market list")
        if not np.all(np.isfinite(mat)):
            raise HasGaps("return panel contains absent or non-finite entries")
        object.__setattr__(self, "markets", markets)
        object.__setattr__(self, "start_period", as_period(self.start_period))
        object.__setattr__(self, "matrix", _frozen(mat))

    @classmethod
    def from_array(cls, matrix, markets=None, start_period: PeriodLike = "1900-01"):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        if markets is None:
            markets = [f"m{i + 1}" for i in range(matrix.shape[1])]
        return cls(tuple(markets), as_period(start_period), matrix)

    @property
    def T(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> int:
        return self.matrix.shape[1]

    @property
    def periods(self) -> pd.PeriodIndex:
        return pd.period_range(self.start_period, periods=self.T, freq="M")

    def column(self, market: str) -> np.ndarray:
        return self.matrix[:, self.markets.index(market)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(np.array(self.matrix), index=self.periods, columns=list(self.markets))


def _fit_structural(target: np.ndarray, seasonal_period: int) -> np.ndarray:
    # local import keeps statsmodels off the import path of the lighter modules
    from statsmodels.tsa.statespace.structural import UnobservedComponents

    model = UnobservedComponents(target, level="llevel", seasonal=seasonal_period)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = model.fit(method="lbfgs", maxiter=500, pgtol=1e-8, disp=False)
    return np.asarray(res.smoother_results.smoothed_forecasts[0], dtype=float)


def impute_gaps(series: PriceSeries, seasonal_period: int = 12, log: bool = True) -> PriceSeries:
    """Fill interior gaps from a smoothed local-level + seasonal model.

    The structural model (local level plus stochastic dummy seasonal, Gaussian
    disturbances) is fitted by maximum likelihood on log prices, or on levels
    when ``log`` is false. Observed values are copied through untouched; only
    the absent months receive the smoothed signal.

    Raises
    ------
    GapTooLong
        If a run of absent values is longer than ``seasonal_period``.
    InsufficientData
        If fewer than two seasonal cycles of observations are present.
    """
    if seasonal_period < 1:
        raise ValueError("seasonal_period must be positive")
    if not series.has_gaps:
        return series
    longest = max(length for _, length in series.gap_runs())
    if longest > seasonal_period:
        raise GapTooLong(
            f"{series.market_id}: gap of {longest} months exceeds seasonal period {seasonal_period}"
        )
    miss = series.missing
    n_present = int((~miss).sum())
    if n_present < 2 * seasonal_period:
        raise InsufficientData(
            f"{series.market_id}: {n_present} observations, need {2 * seasonal_period}"
        )

    values = np.array(series.values)
    target = np.log(values) if log else values.copy()
    observed = target[~miss]
    if np.ptp(observed) == 0.0:
        # flat series: the likelihood is degenerate, the answer is not
        signal = np.full_like(target, observed[0])
    else:
        signal = _fit_structural(target, seasonal_period)
    filled = np.exp(signal[miss]) if log else signal[miss]
    values[miss] = filled
    return series.with_values(values)


def log_returns(series: Union[PriceSeries, Sequence[float], np.ndarray]) -> np.ndarray:
    """First difference of log prices; element t is ln(p[t+1]) - ln(p[t])."""
    values = series.values if isinstance(series, PriceSeries) else np.asarray(series, dtype=float)
    if np.isnan(values).any():
        raise HasGaps("impute gaps before computing returns")
    return np.diff(np.log(values))


def align_panel(series_list: Sequence[PriceSeries]) -> ReturnPanel:
    """Build a return panel on the common span of gap-free series.

    Columns keep the order of ``series_list``.
    """
    if not series_list:
        raise InsufficientData("no series given")
    ids = [s.market_id for s in series_list]
    if len(set(ids)) != len(ids):
        raise MalformedInput(f"duplicate market ids: {ids}")
    for s in series_list:
        if s.has_gaps:
            raise HasGaps(f"{s.market_id}: impute gaps before aligning")
    start = max(s.start_period for s in series_list)
    end = min(s.end_period for s in series_list)
    n_months = (end - start).n + 1 if end >= start else 0
    n_returns = n_months - 1
    if n_returns < MIN_PANEL_RETURNS:
        raise NoOverlap(
            f"common span yields {max(n_returns, 0)} returns, need at least {MIN_PANEL_RETURNS}"
        )
    cols = []
    for s in series_list:
        offset = (start - s.start_period).n
        cols.append(log_returns(s.values[offset:offset + n_months]))
    return ReturnPanel(tuple(ids), start + 1, np.column_stack(cols))


def describe(panel: ReturnPanel) -> dict:
    """Mean, sample SD, max, min and count per market."""
    out = {}
    for j, name in enumerate(panel.markets):
        x = panel.matrix[:, j]
        out[name] = {
            "mean": float(np.mean(x)),
            "sd": float(np.std(x, ddof=1)),
            "max": float(np.max(x)),
            "min": float(np.min(x)),
            "n": int(x.size),
        }
    return out
