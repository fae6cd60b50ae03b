import json

import numpy as np
import pandas as pd
import pytest

from tveff import io
from tveff.errors import MalformedInput, NonMonotonePeriods

from .helpers import make_series, seasonal_prices


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def price_rows(n, start="1900-01"):
    periods = pd.period_range(start, periods=n, freq="M")
    return "".join(f"{p},{100 + i},{50 + i}\n" for i, p in enumerate(periods))


class TestPrices:
    def test_reads_markets_and_gaps(self, tmp_path):
        text = "period,tokyo,osaka\n" + price_rows(30).replace("1900-05,104,", "1900-05,,")
        series = io.read_prices(write(tmp_path / "p.csv", text))
        assert [s.market_id for s in series] == ["tokyo", "osaka"]
        assert np.isnan(series[0].values[4]) and series[1].values[4] == 54.0

    def test_skipped_months_become_gaps(self, tmp_path):
        rows = price_rows(30).splitlines()
        del rows[10]
        series = io.read_prices(write(tmp_path / "p.csv", "period,a,b\n" + "\n".join(rows) + "\n"))
        assert len(series[0]) == 30 and series[0].gap_runs() == [(10, 1)]

    def test_non_monotone(self, tmp_path):
        rows = price_rows(30).splitlines()
        rows[5], rows[6] = rows[6], rows[5]
        with pytest.raises(NonMonotonePeriods):
            io.read_prices(write(tmp_path / "p.csv", "period,a,b\n" + "\n".join(rows)))

    def test_duplicate_period(self, tmp_path):
        rows = price_rows(30).splitlines()
        rows[6] = rows[5]
        with pytest.raises(NonMonotonePeriods):
            io.read_prices(write(tmp_path / "p.csv", "period,a,b\n" + "\n".join(rows)))

    @pytest.mark.parametrize(
        "text",
        ["", "date,a\n1900-01,1\n", "period,a\n1900/01,1\n", "period,a\n1900-01,abc\n", "period,a,b\n1900-01,1\n"],
    )
    def test_malformed(self, tmp_path, text):
        with pytest.raises(MalformedInput):
            io.read_prices(write(tmp_path / "p.csv", text))

    def test_round_trip_is_exact(self, tmp_path, rng):
        vals = seasonal_prices(40) * np.exp(rng.normal(0, 0.05, 40))
        vals[12] = np.nan
        a = make_series(vals, "a")
        b = make_series(np.linspace(1, 2, 30), "b", start="1900-06")
        io.write_prices(tmp_path / "p.csv", [a, b])
        back = io.read_prices(tmp_path / "p.csv")
        np.testing.assert_array_equal(back[0].values, a.values)
        np.testing.assert_array_equal(back[1].values, b.values)
        assert back[1].start_period == b.start_period


class TestEvents:
    def test_round_trip(self, tmp_path):
        events = [("rice_act", pd.Period("1921-04", freq="M")), ("e2", pd.Period("1933-11", freq="M"))]
        io.write_events(tmp_path / "e.csv", events)
        assert (tmp_path / "e.csv").read_text() == "event_id,period\nrice_act,1921-04\ne2,1933-11\n"
        assert io.read_events(tmp_path / "e.csv") == events

    def test_bad_header(self, tmp_path):
        with pytest.raises(MalformedInput):
            io.read_events(write(tmp_path / "e.csv", "id,month\na,1900-01\n"))


class TestJson:
    def test_stable_and_strict(self):
        text = io.dumps({"b": np.float64(0.1), "a": [np.int64(2), float("inf")], "c": pd.Period("1900-01", "M")})
        assert text == io.dumps(json.loads(text))
        assert json.loads(text) == {"b": 0.1, "a": [2, None], "c": "1900-01"}

    def test_float_format(self):
        assert io.fmt(0.1) == "0.1" and io.fmt(float("nan")) == "" and io.fmt(True) == "1"
