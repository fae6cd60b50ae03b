import numpy as np

from tveff.series import PriceSeries


def make_series(values, market="m1", start="1900-01"):
    return PriceSeries(market, start, np.asarray(values, dtype=float))


def seasonal_prices(n, amplitude=0.1, level=100.0, period=12, shape="sine"):
    t = np.arange(n)
    if shape == "sine":
        season = amplitude * np.sin(2 * np.pi * t / period)
    else:
        season = amplitude * ((t % period) / (period - 1) - 0.5)
    season = season - season[:period].mean()
    return level * np.exp(season)
