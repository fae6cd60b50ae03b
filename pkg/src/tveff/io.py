"""CSV and JSON readers and writers.

Floats are written with ``repr`` so output files round-trip exactly and are
byte-identical across runs.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .errors import MalformedInput, NonMonotonePeriods
from .series import PriceSeries, as_period


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return "" if math.isnan(x) else repr(x)
    return str(value)


def _parse_period(text: str, row: int) -> pd.Period:
    text = text.strip()
    if len(text) != 7 or text[4] != "-":
        raise MalformedInput(f"row {row}: period {text!r} is not YYYY-MM")
    try:
        return pd.Period(text, freq="M")
    except (ValueError, TypeError) as exc:
        raise MalformedInput(f"row {row}: period {text!r} is not YYYY-MM") from exc


def _parse_value(text: str, row: int) -> float:
    text = text.strip()
    if text == "":
        return float("nan")
    try:
        return float(text)
    except ValueError as exc:
        raise MalformedInput(f"row {row}: value {text!r} is not a number") from exc


def read_prices(path) -> list[PriceSeries]:
    """Read ``period,<market_1>,...`` price CSV into one series per market.

    Periods must increase strictly; skipped months become absent values.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedInput("empty price file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "period":
        raise MalformedInput("header must be period,<market_id>,...")
    markets = header[1:]
    if len(set(markets)) != len(markets) or any(m == "" for m in markets):
        raise MalformedInput("market ids must be unique and nonempty")
    periods, values = [], []
    for i, row in enumerate(rows[1:], start=2):
        if not row or all(c.strip() == "" for c in row):
            continue
        if len(row) != len(header):
            raise MalformedInput(f"row {i}: expected {len(header)} fields, got {len(row)}")
        period = _parse_period(row[0], i)
        if periods and period <= periods[-1]:
            raise NonMonotonePeriods(f"row {i}: {period} does not follow {periods[-1]}")
        periods.append(period)
        values.append([_parse_value(c, i) for c in row[1:]])
    if not periods:
        raise MalformedInput("price file has no data rows")
    start = periods[0]
    n = (periods[-1] - start).n + 1
    grid = np.full((n, len(markets)), np.nan)
    for period, vals in zip(periods, values):
        grid[(period - start).n] = vals
    return [PriceSeries(m, start, grid[:, j]) for j, m in enumerate(markets)]


def write_prices(path, series_list: Sequence[PriceSeries]) -> None:
    start = min(s.start_period for s in series_list)
    end = max(s.end_period for s in series_list)
    n = (end - start).n + 1
    rows = []
    for i in range(n):
        period = start + i
        row = [str(period)]
        for s in series_list:
            j = (period - s.start_period).n
            row.append(fmt(s.values[j]) if 0 <= j < len(s) else "")
        rows.append(row)
    write_rows(path, ["period", *[s.market_id for s in series_list]], rows)


def read_events(path) -> list[tuple[str, pd.Period]]:
    """Read an ``event_id,period`` CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["event_id", "period"]:
        raise MalformedInput("event file header must be event_id,period")
    events = []
    for i, row in enumerate(rows[1:], start=2):
        if not row or all(c.strip() == "" for c in row):
            continue
        if len(row) != 2 or row[0].strip() == "":
            raise MalformedInput(f"row {i}: expected event_id,period")
        events.append((row[0].strip(), _parse_period(row[1], i)))
    ids = [e for e, _ in events]
    if len(set(ids)) != len(ids):
        raise MalformedInput("event ids must be unique")
    return events


def write_events(path, events: Iterable[tuple[str, pd.Period]]) -> None:
    write_rows(path, ["event_id", "period"], [[e, str(as_period(p))] for e, p in events])


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_frame(path, frame: pd.DataFrame) -> None:
    write_rows(path, list(frame.columns), frame.itertuples(index=False, name=None))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (pd.Period, Path)):
        return str(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text; non-finite floats become null."""
    return json.dumps(_plain(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
