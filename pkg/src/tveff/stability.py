"""Hansen (1992) joint parameter-constancy test for a fitted VAR."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from . import critical_values
from .errors import InsufficientData, SingularScoreCovariance
from .var import MAX_CONDITION, VarFit


@dataclass(frozen=True)
class ConstancyReport:
    l_c: float
    n_params: int
    nobs: int
    critical_value_1pct: float
    decision_at_1pct: bool

    def to_dict(self) -> dict:
        return {
            "l_c": self.l_c,
            "n_params": self.n_params,
            "nobs": self.nobs,
            "critical_value_1pct": self.critical_value_1pct,
            "reject_1pct": self.decision_at_1pct,
        }


def score_matrix(fit: VarFit) -> np.ndarray:
    """Per-observation scores: x_t e_it for every regressor and equation,
    then e_it^2 - sigma_i^2 for every equation."""
    X, E = fit.design, fit.residuals
    n, m = X.shape
    coef_scores = (X[:, :, None] * E[:, None, :]).transpose(0, 2, 1).reshape(n, m * fit.k)
    var_scores = E**2 - np.mean(E**2, axis=0)
    return np.hstack([coef_scores, var_scores])


def lc_statistic(scores: np.ndarray) -> float:
    f = np.asarray(scores, dtype=float)
    n = f.shape[0]
    V = f.T @ f
    if not np.any(V) or np.linalg.cond(V) > MAX_CONDITION:
        raise SingularScoreCovariance("score covariance is singular")
    S = np.cumsum(f, axis=0)
    return float(np.trace(np.linalg.solve(V, S.T @ S)) / n)


def hansen_lc(fit: VarFit) -> ConstancyReport:
    """Joint L_C statistic over all regression coefficients and error variances.

    Rejecting constancy points to random-walk parameter variation.
    """
    f = score_matrix(fit)
    n, n_params = f.shape
    if n < 10 * n_params:
        raise InsufficientData(f"{n} observations for {n_params} parameters, need {10 * n_params}")
    stat = lc_statistic(f)
    cv = lc_critical_value(n_params, 0.01)
    return ConstancyReport(
        l_c=stat,
        n_params=n_params,
        nobs=n,
        critical_value_1pct=cv,
        decision_at_1pct=bool(stat > cv),
    )


def lc_critical_value(n_params: int, level: float = 0.01) -> float:
    """Tabulated critical value, falling back to the exact asymptotic quantile."""
    if level in critical_values.HANSEN_LEVELS and n_params in critical_values.HANSEN_LC:
        return critical_values.HANSEN_LC[n_params][critical_values.HANSEN_LEVELS.index(level)]
    return lc_asymptotic_quantile(1.0 - level, n_params)


# The limit law is sum_j chi2(n)/(j pi)^2, whose characteristic function is
# (sin z / z)^(-n/2) with z = sqrt(2iu). Invert it on a u = v^2 grid.
_V = np.linspace(1e-6, 120.0, 400_001)
_U = _V * _V


@lru_cache(maxsize=1)
def _log_sinc() -> np.ndarray:
    z = np.sqrt(2j * _U)
    return -1j * z + np.log1p(-np.exp(2j * z)) - np.log(-2j * z)


def lc_asymptotic_cdf(x: float, n_params: int) -> float:
    integrand = np.exp(-(n_params / 2) * _log_sinc() - 1j * _U * x).imag / _U * 2 * _V
    return float(0.5 - np.trapezoid(integrand, _V) / np.pi)


def lc_asymptotic_quantile(prob: float, n_params: int) -> float:
    return float(
        optimize.brentq(lambda x: lc_asymptotic_cdf(x, n_params) - prob, 1e-3, 20.0 + n_params, xtol=1e-6)
    )
