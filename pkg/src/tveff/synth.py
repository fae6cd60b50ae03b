"""Synthetic scenarios with known efficiency paths, and gap masking.

The true efficiency degree is computed here by brute force, summing companion
matrix powers out to a long horizon. It deliberately shares no code with the
closed-form route in :mod:`tveff.var`, so either can check the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .errors import GapAtBoundary, UnstableSpec
from .series import PriceSeries, as_period

MAX_RADIUS = 0.95
ORACLE_HORIZON = 1000
BURN_IN = 200
BASE_PRICE = 100.0
MAX_MASK_LENGTH = 3


def _regime_coefs(coefs, k: int) -> np.ndarray:
    A = np.asarray(coefs, dtype=float)
    if A.ndim == 0:
        A = np.full((1, k, k), float(A))
    elif A.ndim == 2:
        A = A[None]
    if A.ndim != 3 or A.shape[1:] != (k, k):
        raise ValueError(f"regime coefficients must have shape (p, {k}, {k}), got {A.shape}")
    return A


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """A piecewise-constant VAR scenario.

    ``coefficient_path`` is a sequence of ``(first, last, coefs)`` regimes over
    return periods ``1..T`` (inclusive, 1-based); ``coefs`` has shape
    ``(p, k, k)`` or ``(k, k)``. Regimes with fewer lags are zero-padded.
    ``planted_events`` holds ``(period, jump)`` pairs: ``jump`` is added to
    every market's return in that period.
    """

    k: int
    T: int
    coefficient_path: tuple
    noise_sd: float = 0.06
    seasonal_amplitude: float = 0.0
    planted_events: tuple = ()
    seed: int = 0
    start_period: pd.Period = field(default_factory=lambda: pd.Period("1900-01", freq="M"))
    markets: tuple = ()
    seasonal_period: int = 12

    def __post_init__(self):
        if self.k < 1 or self.T < 1:
            raise ValueError("k and T must be positive")
        if not self.noise_sd > 0:
            raise ValueError("noise_sd must be positive")
        if self.seasonal_amplitude < 0:
            raise ValueError("seasonal_amplitude must be nonnegative")
        regimes = sorted(
            ((int(a), int(b), _regime_coefs(c, self.k)) for a, b, c in self.coefficient_path),
            key=lambda r: r[0],
        )
        expected = 1
        for first, last, _ in regimes:
            if first != expected or last < first:
                raise ValueError("coefficient regimes must partition periods 1..T")
            expected = last + 1
        if expected != self.T + 1:
            raise ValueError("coefficient regimes must partition periods 1..T")
        markets = tuple(self.markets) or tuple(f"m{i + 1}" for i in range(self.k))
        if len(markets) != self.k:
            raise ValueError("need one market id per variable")
        events = tuple((int(t), float(j)) for t, j in self.planted_events)
        for t, _ in events:
            if not 1 <= t <= self.T:
                raise ValueError(f"planted event period {t} outside 1..{self.T}")
        object.__setattr__(self, "coefficient_path", tuple(regimes))
        object.__setattr__(self, "planted_events", events)
        object.__setattr__(self, "markets", markets)
        object.__setattr__(self, "start_period", as_period(self.start_period))

    @property
    def p(self) -> int:
        return max(c.shape[0] for _, _, c in self.coefficient_path)

    def coefficients(self) -> np.ndarray:
        """Lag matrices for every return period, shape (T, p, k, k)."""
        out = np.zeros((self.T, self.p, self.k, self.k))
        for first, last, c in self.coefficient_path:
            out[first - 1:last, : c.shape[0]] = c
        return out

    def event_period(self, t: int) -> pd.Period:
        """Calendar month of return period ``t`` (prices start one month earlier)."""
        return self.start_period + t

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "T": self.T,
            "coefficient_path": [
                {"first": a, "last": b, "coefs": c.tolist()} for a, b, c in self.coefficient_path
            ],
            "noise_sd": self.noise_sd,
            "seasonal_amplitude": self.seasonal_amplitude,
            "planted_events": [{"period": t, "jump": j} for t, j in self.planted_events],
            "seed": self.seed,
            "start_period": str(self.start_period),
            "markets": list(self.markets),
            "seasonal_period": self.seasonal_period,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        path = [
            (r["first"], r["last"], r["coefs"]) if isinstance(r, dict) else tuple(r)
            for r in d["coefficient_path"]
        ]
        events = [
            (e["period"], e["jump"]) if isinstance(e, dict) else tuple(e)
            for e in d.get("planted_events", ())
        ]
        return cls(
            k=int(d["k"]),
            T=int(d["T"]),
            coefficient_path=tuple(path),
            noise_sd=float(d.get("noise_sd", 0.06)),
            seasonal_amplitude=float(d.get("seasonal_amplitude", 0.0)),
            planted_events=tuple(events),
            seed=int(d.get("seed", 0)),
            start_period=d.get("start_period", "1900-01"),
            markets=tuple(d.get("markets", ())),
            seasonal_period=int(d.get("seasonal_period", 12)),
        )


def _companion(A: np.ndarray) -> np.ndarray:
    p, k, _ = A.shape
    C = np.zeros((k * p, k * p))
    for j in range(p):
        C[:k, j * k:(j + 1) * k] = A[j]
    C[k:, : k * (p - 1)] = np.eye(k * (p - 1))
    return C


def truncated_vma_zeta(A, horizon: int = ORACLE_HORIZON) -> float:
    """Spectral norm of sum_{s=1..horizon} Phi_s, with Phi_s = J C^s J'.

    ``A`` has shape (p, k, k) or (k, k). The top-left k x k block of the
    companion power C^s is the impulse response at horizon s.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 2:
        A = A[None]
    k = A.shape[1]
    C = _companion(A)
    power = np.eye(C.shape[0])
    total = np.zeros((k, k))
    for _ in range(horizon):
        power = power @ C
        total += power[:k, :k]
    return float(np.sqrt(max(np.linalg.eigvalsh(total.T @ total)[-1], 0.0)))


def generate(spec: ScenarioSpec) -> tuple[list[PriceSeries], np.ndarray]:
    """Simulate prices and return them with the true per-period zeta path.

    Returns follow the regime's VAR with N(0, noise_sd^2) innovations after a
    burn-in under the first regime. Planted jumps are added to the simulated
    returns, and prices are ``100 exp(cumsum(returns))`` times an optional
    sinusoidal seasonal factor. The T + 1 prices yield a T-row return panel whose
    rows line up with the returned zeta path.
    """
    regime_zeta = {}
    for first, last, c in spec.coefficient_path:
        radius = float(np.max(np.abs(np.linalg.eigvals(_companion(c)))))
        if radius >= MAX_RADIUS:
            raise UnstableSpec(
                f"regime {first}..{last} has companion spectral radius {radius:.4f} >= {MAX_RADIUS}"
            )
        regime_zeta[first] = truncated_vma_zeta(c)
    zeta = np.empty(spec.T)
    for first, last, _ in spec.coefficient_path:
        zeta[first - 1:last] = regime_zeta[first]

    rng = np.random.default_rng(spec.seed)
    A = spec.coefficients()
    p, k = spec.p, spec.k
    total = BURN_IN + spec.T
    shocks = rng.normal(0.0, spec.noise_sd, size=(total, k))
    y = np.zeros((total + p, k))
    for t in range(total):
        coefs = A[max(t - BURN_IN, 0)]
        acc = shocks[t].copy()
        for j in range(p):
            acc += coefs[j] @ y[p + t - 1 - j]
        y[p + t] = acc
    returns = y[p + BURN_IN:].copy()
    for t, jump in spec.planted_events:
        returns[t - 1] += jump

    log_prices = np.vstack([np.zeros((1, k)), np.cumsum(returns, axis=0)])
    if spec.seasonal_amplitude > 0:
        month = np.arange(spec.T + 1)
        log_prices += spec.seasonal_amplitude * np.sin(2 * np.pi * month / spec.seasonal_period)[:, None]
    prices = BASE_PRICE * np.exp(log_prices)
    series = [PriceSeries(m, spec.start_period, prices[:, j]) for j, m in enumerate(spec.markets)]
    return series, zeta


@dataclass(frozen=True, eq=False)
class MaskedSeries:
    series: PriceSeries
    original: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)

    @property
    def truth(self) -> np.ndarray:
        """Original values at the masked positions."""
        return self.original[self.mask]


def mask_gaps(
    series: PriceSeries,
    gap_spec: Sequence[tuple[Optional[int], int]],
    seed: int = 0,
) -> MaskedSeries:
    """Blank out runs of observations, keeping the originals for scoring.

    ``gap_spec`` lists ``(start_index, length)`` pairs. A ``None`` start draws
    an interior position from ``seed``. Every run must leave at least one
    present value on each side and be at most three months long.
    """
    values = np.array(series.values, dtype=float)
    n = values.size
    rng = np.random.default_rng(seed)
    mask = np.zeros(n, dtype=bool)
    for start, length in gap_spec:
        length = int(length)
        if not 1 <= length <= MAX_MASK_LENGTH:
            raise ValueError(f"gap length must be 1..{MAX_MASK_LENGTH}, got {length}")
        if start is None:
            start = int(rng.integers(1, n - length))
        start = int(start)
        if start < 1 or start + length > n - 1:
            raise GapAtBoundary(f"gap {start}..{start + length - 1} touches the ends of 0..{n - 1}")
        mask[start:start + length] = True
    masked = values.copy()
    masked[mask] = np.nan
    original = values
    original.setflags(write=False)
    return MaskedSeries(series.with_values(masked), original, mask)
