"""Non-Bayesian time-varying VAR and the per-period efficiency degree.

Coefficients follow a random walk, beta_t = beta_{t-1} + v_t, and are estimated
by penalized least squares on the stacked system

    [ y ]   [  Z  ]
    [ 0 ] = [ w D ] beta

where Z is block diagonal in the per-period regressors and D takes first
differences of adjacent periods' coefficients. The normal equations are block
tridiagonal, so they are solved with a banded Cholesky factorization; all k
equations share the factorization.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import linalg

from .errors import (
    BandFailure,
    InsufficientData,
    NonPositiveWeight,
    RankDeficient,
    TvEffError,
    UnstablePeriod,
)
from .series import ReturnPanel
from .var import (
    STABILITY_MARGIN,
    _as_matrix,
    _check_degenerate,
    efficiency_degree,
    lag_design,
    longrun_sum,
    spectral_radius,
)

DEFAULT_WEIGHT_GRID = (0.1, 1.0, 10.0, 100.0)


def solve_stacked(X: np.ndarray, Y: np.ndarray, weight: float) -> np.ndarray:
    """Penalized path solution, shape (n, m, k).

    ``weight`` may be zero here (pure per-period fits); the public entry point
    insists on a positive value.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, m = X.shape
    k = Y.shape[1]
    w2 = float(weight) ** 2
    size = n * m

    # upper banded storage: ab[m + i - j, j] = M[i, j]
    ab = np.zeros((m + 1, size))
    for d in range(m):
        for a in range(m - d):
            b = a + d
            ab[m - d, b::m] = X[:, a] * X[:, b]
    if n > 1 and w2 > 0:
        degree = np.full(n, 2.0)
        degree[0] = degree[-1] = 1.0
        ab[m] += w2 * np.repeat(degree, m)
        ab[0, m:] = -w2
    rhs = (X[:, :, None] * Y[:, None, :]).reshape(size, k)
    try:
        chol = linalg.cholesky_banded(ab, lower=False, check_finite=False)
    except linalg.LinAlgError as exc:
        raise RankDeficient("stacked normal equations are singular") from exc
    beta = linalg.cho_solve_banded((chol, False), rhs, check_finite=False)
    # the penalty can dwarf the data block by ~1e12; refinement recovers the digits
    for _ in range(2):
        resid = rhs - _normal_matvec(X, w2, beta.reshape(n, m, k)).reshape(size, k)
        beta = beta + linalg.cho_solve_banded((chol, False), resid, check_finite=False)
    return beta.reshape(n, m, k)


def _normal_matvec(X: np.ndarray, w2: float, beta: np.ndarray) -> np.ndarray:
    """(Z'Z + w^2 D'D) applied to a path of shape (n, m, k)."""
    fitted = np.einsum("tm,tmk->tk", X, beta)
    out = X[:, :, None] * fitted[:, None, :]
    if w2 > 0 and beta.shape[0] > 1:
        diff = np.diff(beta, axis=0)
        out[:-1] -= w2 * diff
        out[1:] += w2 * diff
    return out


def filtered_coefficients(X: np.ndarray, Y: np.ndarray, weight: float) -> np.ndarray:
    """One-sided estimates beta_{t|t} using data up to t only, shape (n, m, k).

    Equal to the last-period coefficients of :func:`solve_stacked` run on the
    first t + 1 rows. Computed in information form; NaN until identified.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, m = X.shape
    k = Y.shape[1]
    w2 = float(weight) ** 2
    eye = np.eye(m)
    info = np.zeros((m, m))
    eta = np.zeros((m, k))
    out = np.full((n, m, k), np.nan)
    for t in range(n):
        if t > 0:
            shrink = np.linalg.inv(eye + info / w2)
            info = info @ shrink
            info = 0.5 * (info + info.T)
            eta = shrink @ eta
        x = X[t]
        info = info + np.outer(x, x)
        eta = eta + np.outer(x, Y[t])
        if t + 1 >= m and np.linalg.cond(info) < 1e12:
            out[t] = np.linalg.solve(info, eta)
    return out


@dataclass(frozen=True, eq=False)
class TvVarFit:
    k: int
    p: int
    coef: np.ndarray = field(repr=False)
    smoothness_weight: float
    residuals: np.ndarray = field(repr=False)
    markets: tuple = ()
    start_period: Optional[pd.Period] = None

    @property
    def nobs(self) -> int:
        return self.coef.shape[0]

    @property
    def A(self) -> np.ndarray:
        """Per-period lag matrices, shape (n, p, k, k)."""
        n, k, p = self.nobs, self.k, self.p
        return self.coef[:, 1:, :].reshape(n, p, k, k).transpose(0, 1, 3, 2)

    @property
    def nu(self) -> np.ndarray:
        return self.coef[:, 0, :]

    @property
    def periods(self):
        if self.start_period is None:
            return pd.RangeIndex(self.nobs)
        return pd.period_range(self.start_period, periods=self.nobs, freq="M")


def fit_tvvar(panel, p: int, smoothness_weight: float) -> TvVarFit:
    """Fit the random-walk-coefficient VAR(p) by stacked penalized least squares.

    Large weights pull every period toward the time-invariant OLS fit.
    """
    if not smoothness_weight > 0:
        raise NonPositiveWeight(f"smoothness weight must be positive, got {smoothness_weight}")
    y, markets = _as_matrix(panel)
    T, k = y.shape
    if p < 1:
        raise ValueError("lag order must be positive")
    m = k * p + 1
    if T - p < 3 * m:
        raise InsufficientData(f"{T - p} periods for {m} coefficients per period, need {3 * m}")
    _check_degenerate(y)
    Y, X = lag_design(y, p)
    coef = solve_stacked(X, Y, smoothness_weight)
    if not np.all(np.isfinite(coef)):
        raise RankDeficient("non-finite coefficient path")
    resid = Y - np.einsum("tm,tmk->tk", X, coef)
    start = panel.start_period + p if isinstance(panel, ReturnPanel) else None
    return TvVarFit(
        k=k,
        p=p,
        coef=coef,
        smoothness_weight=float(smoothness_weight),
        residuals=resid,
        markets=markets,
        start_period=start,
    )


@dataclass(frozen=True)
class WeightChoice:
    weight: float
    grid: tuple
    forecast_mse: tuple

    def to_dict(self) -> dict:
        return {"weight": self.weight, "grid": list(self.grid), "forecast_mse": list(self.forecast_mse)}


def select_weight(panel, p: int, grid: Sequence[float] = DEFAULT_WEIGHT_GRID) -> WeightChoice:
    """Pick the smoothness weight with the lowest one-step-ahead forecast MSE.

    Forecasts use only data available at the forecast origin; scoring starts
    once 2(kp+1) periods have been seen.
    """
    y, _ = _as_matrix(panel)
    Y, X = lag_design(y, p)
    n, m = X.shape
    start = min(2 * m, n - 1)
    scores = []
    for w in grid:
        if not w > 0:
            raise NonPositiveWeight(f"grid weight {w} is not positive")
        filt = filtered_coefficients(X, Y, w)
        pred = np.einsum("tm,tmk->tk", X[start:], filt[start - 1:-1])
        err = Y[start:] - pred
        ok = np.all(np.isfinite(err), axis=1)
        scores.append(float(np.mean(err[ok] ** 2)) if ok.any() else float("inf"))
    best = int(np.argmin(scores))
    return WeightChoice(weight=float(grid[best]), grid=tuple(float(g) for g in grid), forecast_mse=tuple(scores))


def stable_periods(fit: TvVarFit) -> np.ndarray:
    return np.asarray(spectral_radius(fit.A)) < 1.0 - STABILITY_MARGIN


def efficiency_path(fit: TvVarFit, strict: bool = True) -> np.ndarray:
    """Per-period spectral norm of (I - sum_j A_{j,t})^{-1} - I.

    Periods whose companion matrix is not stable get ``inf``. With ``strict``
    they raise :class:`UnstablePeriod` listing the offending period indices.
    """
    stable = stable_periods(fit)
    zeta = np.full(fit.nobs, np.inf)
    if stable.any():
        zeta[stable] = efficiency_degree(longrun_sum(fit.A[stable]))
    if strict and not stable.all():
        raise UnstablePeriod(np.flatnonzero(~stable).tolist(), zeta)
    return zeta


@dataclass(frozen=True, eq=False)
class EfficiencyPath:
    zeta: np.ndarray
    band_lower: np.ndarray
    band_upper: np.ndarray
    replications: int
    level: float
    stable: np.ndarray
    periods: object = None
    smoothness_weight: float = float("nan")
    p: int = 0
    attempts: int = 0

    def exceedance_rate(self) -> float:
        """Share of stable periods where zeta is above the upper band."""
        s = self.stable
        if not s.any():
            return float("nan")
        return float(np.mean(self.zeta[s] > self.band_upper[s]))

    def to_frame(self) -> pd.DataFrame:
        idx = self.periods if self.periods is not None else pd.RangeIndex(len(self.zeta))
        return pd.DataFrame(
            {
                "period": [str(x) for x in idx],
                "zeta": self.zeta,
                "band_lower": self.band_lower,
                "band_upper": self.band_upper,
                "stable_flag": self.stable.astype(int),
            }
        )


def thread_count(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get("TVEFF_THREADS")
        threads = int(env) if env else min(os.cpu_count() or 1, 8)
    return max(1, int(threads))


def null_bands(
    panel,
    p: int,
    smoothness_weight: float,
    replications: int = 5000,
    level: float = 0.95,
    seed: int = 0,
    threads: Optional[int] = None,
) -> EfficiencyPath:
    """Pointwise bands for zeta_t under i.i.d. (efficient) returns.

    Each replication resamples rows of the demeaned panel with replacement,
    refits the time-varying VAR with the same lag order and weight, and
    records the efficiency path. Replication ``i`` draws from a generator
    seeded with ``seed + i``, so results do not depend on scheduling. Failed
    replications (singular fits, unstable periods) are redrawn from the same
    generator while the total number of attempts stays within
    ``3 * replications``.
    """
    if replications < 100:
        raise ValueError("need at least 100 replications")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    y, _ = _as_matrix(panel)
    fit = fit_tvvar(panel, p, smoothness_weight)
    zeta = efficiency_path(fit, strict=False)
    stable = np.isfinite(zeta)

    centred = y - y.mean(axis=0)
    T = centred.shape[0]
    rngs = [np.random.default_rng(seed + i) for i in range(replications)]

    def attempt(i: int):
        idx = rngs[i].integers(0, T, T)
        try:
            return efficiency_path(fit_tvvar(centred[idx], p, smoothness_weight))
        except TvEffError:
            return None

    draws: list = [None] * replications
    pending = list(range(replications))
    attempts = 0
    budget = 3 * replications
    n_threads = thread_count(threads)
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        while pending:
            if attempts + len(pending) > budget:
                raise BandFailure(f"{len(pending)} replications still failing after {attempts} attempts")
            results = list(pool.map(attempt, pending)) if n_threads > 1 else [attempt(i) for i in pending]
            attempts += len(pending)
            for i, r in zip(pending, results):
                draws[i] = r
            pending = [i for i in pending if draws[i] is None]

    sims = np.vstack(draws)
    alpha = 1.0 - level
    lower, upper = np.quantile(sims, [alpha / 2, 1 - alpha / 2], axis=0)
    return EfficiencyPath(
        zeta=zeta,
        band_lower=lower,
        band_upper=upper,
        replications=replications,
        level=level,
        stable=stable,
        periods=fit.periods,
        smoothness_weight=float(smoothness_weight),
        p=p,
        attempts=attempts,
    )
