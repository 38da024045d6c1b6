"""Price ingestion, log returns and report files."""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from gvar.backtest import SCHEMA, BacktestReport
from gvar.errors import GVarError, IngestionError, RangeError
from gvar.estimation import CalibrationResult

log = logging.getLogger(__name__)

TABLE_COLUMNS = (
    "model",
    "alpha",
    "W",
    "W0",
    "n_forecasts",
    "m1",
    "viol_pct",
    "lr_stat",
    "p_value",
    "mean_var_x100",
)


@dataclass(frozen=True)
class PriceSeries:
    dates: tuple[dt.date, ...]
    closes: tuple[float, ...]
    n_dropped: int = field(default=0, compare=False)
    n_duplicates: int = field(default=0, compare=False)

    def __post_init__(self):
        if len(self.dates) != len(self.closes):
            raise IngestionError("dates and closes differ in length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise IngestionError("dates must be strictly increasing")
        if any(not (math.isfinite(c) and c > 0) for c in self.closes):
            raise IngestionError("closes must be positive and finite")

    def __len__(self) -> int:
        return len(self.closes)


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Percent log returns; ``values[i]`` is the return realized on ``dates[i]``."""

    dates: tuple[dt.date, ...]
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


def load_prices(path) -> PriceSeries:
    """Read a ``date,close`` CSV with ISO-8601 dates.

    Rows with an unparseable date or a non-positive / unparseable close are
    dropped; for duplicate dates the last row wins.  Both are logged and
    counted on the result.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise IngestionError(f"{path}: empty file")
            cols = [h.strip().lower() for h in header]
            if "date" not in cols or "close" not in cols:
                raise IngestionError(f"{path}: header must contain 'date,close', got {header}")
            i_date, i_close = cols.index("date"), cols.index("close")
            rows = list(reader)
    except OSError as exc:
        raise IngestionError(f"{path}: {exc.strerror or exc}") from exc

    by_date: dict[dt.date, float] = {}
    dropped = duplicates = 0
    bad_lines = []
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            day = dt.date.fromisoformat(row[i_date].strip())
            close = float(row[i_close])
        except (ValueError, IndexError):
            dropped += 1
            bad_lines.append(lineno)
            continue
        if not (math.isfinite(close) and close > 0):
            dropped += 1
            bad_lines.append(lineno)
            continue
        if day in by_date:
            duplicates += 1
        by_date[day] = close
    if dropped:
        log.warning("%s: dropped %d unusable row(s), first at line(s) %s", path, dropped, bad_lines[:5])
    if duplicates:
        log.warning("%s: %d duplicate date(s); kept the last occurrence", path, duplicates)
    if not by_date:
        raise IngestionError(f"{path}: no usable rows ({dropped} dropped, lines {bad_lines[:5]})")
    days = sorted(by_date)
    return PriceSeries(tuple(days), tuple(by_date[d] for d in days), dropped, duplicates)


def write_prices(series: PriceSeries, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "close"])
        for d, c in zip(series.dates, series.closes):
            w.writerow([d.isoformat(), repr(c)])
    return path


def log_returns(prices: PriceSeries) -> ReturnSeries:
    """``100 * (ln Z_t - ln Z_{t-1})`` dated at the later day."""
    if len(prices) < 2:
        raise RangeError("need at least two prices for a return")
    logs = np.log(np.asarray(prices.closes, dtype=float))
    return ReturnSeries(prices.dates[1:], 100.0 * np.diff(logs))


# -- reports -----------------------------------------------------------------


def _dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _slug(model: str, alpha: float) -> str:
    return f"{model}_a{alpha:g}".replace(".", "p")


def table_rows(reports: Sequence[BacktestReport]) -> list[dict]:
    return [
        {
            "model": r.model_id,
            "alpha": r.alpha,
            "W": r.W,
            "W0": "" if r.W0 is None else r.W0,
            "n_forecasts": r.n_forecasts,
            "m1": r.m1,
            "viol_pct": 100.0 * r.viol_rate,
            "lr_stat": r.lr_stat,
            "p_value": r.p_value,
            "mean_var_x100": r.mean_var_x100,
        }
        for r in reports
    ]


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_report(report, out_dir, extra: dict | None = None) -> list[Path]:
    """Persist a backtest or calibration result under ``out_dir``.

    ``report`` is a :class:`BacktestReport`, a sequence of them (one per
    (model, alpha) cell, kept in the given order), a
    :class:`CalibrationResult` or a sequence of those.  Always writes
    ``report.json``; backtests add ``table.csv`` and running-rate series,
    calibrations add ``w0_grid.csv``.  With several cells the series files
    carry a ``_<model>_a<alpha>`` suffix.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        items = list(report) if isinstance(report, (list, tuple)) else [report]
        if not items:
            raise GVarError("nothing to write")
        written = []
        if isinstance(items[0], BacktestReport):
            payload = {"schema": SCHEMA, "kind": "backtest", "reports": [r.as_dict() for r in items]}
            if extra:
                payload["meta"] = extra
            (out / "report.json").write_text(_dumps(payload))
            written.append(out / "report.json")
            rows = table_rows(items)
            _write_csv(out / "table.csv", TABLE_COLUMNS, ([row[c] for c in TABLE_COLUMNS] for row in rows))
            written.append(out / "table.csv")
            for r in items:
                name = "running_rate.csv" if len(items) == 1 else f"running_rate_{_slug(r.model_id, r.alpha)}.csv"
                _write_csv(out / name, ("n", "rate"), r.running_rate)
                written.append(out / name)
        else:
            payload = {"schema": SCHEMA, "kind": "calibration", "results": [c.as_dict() for c in items]}
            if extra:
                payload["meta"] = extra
            (out / "report.json").write_text(_dumps(payload))
            written.append(out / "report.json")
            for c in items:
                name = "w0_grid.csv" if len(items) == 1 else f"w0_grid_{_slug('g_var', c.alpha_target)}.csv"
                _write_csv(out / name, ("w0", "viol_rate"), c.grid)
                written.append(out / name)
        return written
    except OSError as exc:
        raise GVarError(f"cannot write report under {out}: {exc}") from exc


def read_report(path):
    """Inverse of :func:`write_report` for ``report.json``; a single cell comes back unwrapped."""
    payload = json.loads(Path(path).read_text())
    if payload.get("schema") != SCHEMA:
        raise GVarError(f"{path}: unsupported schema {payload.get('schema')!r}")
    if payload["kind"] == "backtest":
        items = [BacktestReport.from_dict(d) for d in payload["reports"]]
    else:
        items = [CalibrationResult.from_dict(d) for d in payload["results"]]
    return items[0] if len(items) == 1 else items
