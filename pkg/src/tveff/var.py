"""Time-invariant VAR: estimation, lag choice, HAC errors and long-run multipliers.

Coefficient arrays use the layout ``A[j]`` = lag ``j + 1`` matrix, so that
``y_t = nu + sum_j A[j] @ y_{t-j-1} + u_t``. Functions working on coefficient
arrays accept any leading batch shape, ``(..., p, k, k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, RankDeficient, Unstable
from .series import ReturnPanel

STABILITY_MARGIN = 1e-8
MAX_CONDITION = 1e12


def _as_matrix(panel) -> tuple[np.ndarray, tuple]:
    if isinstance(panel, ReturnPanel):
        return np.asarray(panel.matrix), panel.markets
    y = np.asarray(panel, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    return y, tuple(f"m{i + 1}" for i in range(y.shape[1]))


def lag_design(y: np.ndarray, p: int, first: int | None = None):
    """Response block and ``[1, y_{t-1}', ..., y_{t-p}']`` regressors.

    Rows start at observation ``first`` (default ``p``), which lets several
    lag orders share one estimation sample.
    """
    first = p if first is None else first
    n = y.shape[0]
    cols = [np.ones((n - first, 1))]
    for j in range(1, p + 1):
        cols.append(y[first - j:n - j])
    return y[first:], np.hstack(cols)


def default_hac_lags(nobs: int) -> int:
    return int(math.floor(4 * (nobs / 100) ** (2 / 9)))


def hac_covariance(x: np.ndarray, resid: np.ndarray, lags: int) -> np.ndarray:
    """Newey-West sandwich covariance with Bartlett weights, no df correction."""
    scores = x * resid[:, None]
    s = scores.T @ scores
    for j in range(1, lags + 1):
        w = 1.0 - j / (lags + 1.0)
        g = scores[j:].T @ scores[:-j]
        s += w * (g + g.T)
    bread = np.linalg.inv(x.T @ x)
    return bread @ s @ bread


@dataclass(frozen=True, eq=False)
class VarFit:
    k: int
    p: int
    nu: np.ndarray
    A: np.ndarray
    residuals: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    hac_se: np.ndarray = field(repr=False)
    bic: float
    adj_r2: np.ndarray = field(repr=False)
    hac_lags: int
    design: np.ndarray = field(repr=False)
    endog: np.ndarray = field(repr=False)
    markets: tuple = ()

    @property
    def nobs(self) -> int:
        return self.residuals.shape[0]

    @property
    def coef(self) -> np.ndarray:
        """(1 + k*p) x k coefficients, one column per equation."""
        return np.vstack([self.nu[None, :], self.A.transpose(0, 2, 1).reshape(-1, self.k)])

    def coef_names(self) -> list[str]:
        names = ["const"]
        for j in range(1, self.p + 1):
            names += [f"{m}.L{j}" for m in self.markets]
        return names

    def to_dict(self) -> dict:
        names = self.coef_names()
        eqs = {}
        for i, m in enumerate(self.markets):
            eqs[m] = {
                "coefficients": {n: float(c) for n, c in zip(names, self.coef[:, i])},
                "hac_se": {n: float(s) for n, s in zip(names, self.hac_se[:, i])},
                "adj_r2": float(self.adj_r2[i]),
            }
        return {
            "k": self.k,
            "p": self.p,
            "nobs": self.nobs,
            "hac_lags": self.hac_lags,
            "bic": self.bic,
            "equations": eqs,
            "sigma": self.sigma.tolist(),
        }


def _check_degenerate(y: np.ndarray) -> None:
    if np.any(np.ptp(y, axis=0) == 0.0):
        raise DegenerateInput("a series has zero variance")


def _check_design(x: np.ndarray) -> None:
    if np.linalg.cond(x) > MAX_CONDITION:
        raise RankDeficient("regressor matrix is numerically singular")


def fit_var(panel, p: int, hac_lags: int | None = None) -> VarFit:
    """Equation-by-equation OLS fit of a VAR(p) with intercept.

    Standard errors are Newey-West (Bartlett) with truncation
    ``floor(4 (n/100)^(2/9))`` unless ``hac_lags`` is given.
    """
    y, markets = _as_matrix(panel)
    T, k = y.shape
    if p < 1:
        raise ValueError("lag order must be positive")
    if T - p <= k * p + 1:
        raise RankDeficient(f"T - p = {T - p} leaves no degrees of freedom for {k * p + 1} regressors")
    _check_degenerate(y)
    Y, X = lag_design(y, p)
    _check_design(X)
    n, m = X.shape

    beta = np.linalg.lstsq(X, Y, rcond=None)[0]
    resid = Y - X @ beta
    sigma = resid.T @ resid / (n - m)
    sigma_ml = resid.T @ resid / n
    bic = float(np.linalg.slogdet(sigma_ml)[1] + math.log(n) / n * p * k * k)

    lags = default_hac_lags(n) if hac_lags is None else int(hac_lags)
    se = np.empty((m, k))
    for i in range(k):
        se[:, i] = np.sqrt(np.diag(hac_covariance(X, resid[:, i], lags)))

    ssr = np.sum(resid**2, axis=0)
    sst = np.sum((Y - Y.mean(axis=0)) ** 2, axis=0)
    adj_r2 = 1.0 - (ssr / (n - m)) / (sst / (n - 1))

    A = beta[1:].reshape(p, k, k).transpose(0, 2, 1)
    return VarFit(
        k=k,
        p=p,
        nu=beta[0].copy(),
        A=A.copy(),
        residuals=resid,
        sigma=sigma,
        hac_se=se,
        bic=bic,
        adj_r2=adj_r2,
        hac_lags=lags,
        design=X,
        endog=Y,
        markets=markets,
    )


def bic_values(panel, p_max: int) -> np.ndarray:
    """BIC for p = 1..p_max on the common sample that drops p_max rows."""
    y, _ = _as_matrix(panel)
    T, k = y.shape
    if p_max < 1:
        raise ValueError("p_max must be positive")
    if T - p_max <= k * p_max + 1:
        raise RankDeficient(f"sample too short for p_max = {p_max}")
    _check_degenerate(y)
    n = T - p_max
    out = np.empty(p_max)
    for p in range(1, p_max + 1):
        Y, X = lag_design(y, p, first=p_max)
        _check_design(X)
        beta = np.linalg.lstsq(X, Y, rcond=None)[0]
        resid = Y - X @ beta
        logdet = np.linalg.slogdet(resid.T @ resid / n)[1]
        out[p - 1] = logdet + math.log(n) / n * p * k * k
    return out


def select_lag_bic(panel, p_max: int) -> int:
    return int(np.argmin(bic_values(panel, p_max))) + 1


def _coef_array(obj) -> np.ndarray:
    A = obj.A if isinstance(obj, VarFit) else np.asarray(obj, dtype=float)
    if A.ndim == 2:
        A = A[None]
    return A


def companion(A) -> np.ndarray:
    """Companion matrix (batched) of lag matrices with shape (..., p, k, k)."""
    A = _coef_array(A)
    *batch, p, k, _ = A.shape
    top = np.concatenate([A[..., j, :, :] for j in range(p)], axis=-1)
    if p == 1:
        return top
    lower = np.zeros((*batch, k * (p - 1), k * p))
    lower[..., :, : k * (p - 1)] = np.eye(k * (p - 1))
    return np.concatenate([top, lower], axis=-2)


def spectral_radius(A) -> np.ndarray | float:
    rad = np.max(np.abs(np.linalg.eigvals(companion(A))), axis=-1)
    return float(rad) if np.ndim(rad) == 0 else rad


def vma_coefficients(fit, horizon: int) -> np.ndarray:
    """Impulse-response matrices Phi_0..Phi_horizon, shape (horizon+1, k, k).

    Uses Phi_0 = I and Phi_s = sum_{j<=min(s,p)} Phi_{s-j} A_j.
    """
    A = _coef_array(fit)
    p, k, _ = A.shape
    phi = np.zeros((horizon + 1, k, k))
    phi[0] = np.eye(k)
    for s in range(1, horizon + 1):
        for j in range(1, min(s, p) + 1):
            phi[s] += phi[s - j] @ A[j - 1]
    return phi


def longrun_sum(fit) -> np.ndarray:
    """(I - sum_j A_j)^{-1}; batched over leading axes of the coefficient array.

    Raises :class:`Unstable` if any companion spectral radius reaches
    ``1 - STABILITY_MARGIN``.
    """
    A = _coef_array(fit)
    rad = np.atleast_1d(spectral_radius(A))
    if np.any(rad >= 1.0 - STABILITY_MARGIN):
        raise Unstable(f"companion spectral radius {rad.max():.6g} is not below one")
    k = A.shape[-1]
    return np.linalg.inv(np.eye(k) - A.sum(axis=-3))


def efficiency_degree(longrun) -> np.ndarray | float:
    """Largest singular value of (longrun - I); zero for jointly efficient markets."""
    L = np.asarray(longrun, dtype=float)
    k = L.shape[-1]
    zeta = np.linalg.norm(L - np.eye(k), ord=2, axis=(-2, -1))
    return float(zeta) if np.ndim(zeta) == 0 else zeta
