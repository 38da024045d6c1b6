"""Violation accounting, the Kupiec unconditional-coverage test and backtest reports."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from gvar.errors import AlignmentError, DomainError

SCHEMA = "gvar-report/1"


@dataclass(frozen=True)
class BacktestReport:
    alpha: float
    W: int
    W0: int | None
    model_id: str
    n_forecasts: int
    m1: int
    viol_rate: float
    lr_stat: float
    p_value: float
    mean_var_x100: float
    running_rate: tuple[tuple[int, float], ...]
    rate_mean_tail: float | None = None
    rate_std_tail: float | None = None
    tail_start: int = 3000
    flags: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["running_rate"] = [list(p) for p in self.running_rate]
        d["schema"] = SCHEMA
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BacktestReport":
        d = {k: v for k, v in d.items() if k != "schema"}
        d["running_rate"] = tuple((int(n), float(r)) for n, r in d["running_rate"])
        return cls(**d)


def _var_values(forecasts) -> tuple[np.ndarray, np.ndarray]:
    origins = np.array([f.t_index for f in forecasts], dtype=int)
    values = np.array([f.var_value for f in forecasts], dtype=float)
    return origins, values


def violations(returns, forecasts: Sequence) -> tuple[np.ndarray, int]:
    """Indicator ``r[t+1] < -VaR_t`` for each forecast made at origin ``t``."""
    r = np.asarray(getattr(returns, "values", returns), dtype=float)
    if len(forecasts) == 0:
        raise AlignmentError("no forecasts to score")
    origins, values = _var_values(forecasts)
    if origins.min() < 0 or origins.max() + 1 >= len(r):
        raise AlignmentError(
            f"forecast origins [{origins.min()}, {origins.max()}] need realized returns "
            f"up to index {origins.max() + 1}, series has {len(r)}"
        )
    hits = (r[origins + 1] < -values).astype(int)
    return hits, int(hits.sum())


def running_violation_rate(indicators) -> np.ndarray:
    """Cumulative violation frequency after each forecast."""
    hits = np.asarray(indicators, dtype=float)
    if hits.size == 0:
        raise DomainError("indicator sequence is empty")
    return np.cumsum(hits) / np.arange(1, hits.size + 1)


def tail_summary(rates: np.ndarray, tail_start: int = 3000) -> tuple[float | None, float | None]:
    """Mean and standard deviation of the running rate over ``n > tail_start``."""
    tail = np.asarray(rates)[tail_start:]
    if tail.size == 0:
        return None, None
    return float(tail.mean()), float(tail.std())


def _xlogy(x: float, y: float) -> float:
    return 0.0 if x == 0 else x * math.log(y)


def kupiec_lr_uc(m0: int, m1: int, alpha: float) -> tuple[float, float]:
    """Likelihood-ratio statistic for ``P(violation) = alpha`` and its chi2(1) p-value."""
    if m0 < 0 or m1 < 0 or m0 + m1 < 1:
        raise DomainError(f"need non-negative counts with m0 + m1 >= 1, got ({m0}, {m1})")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    rate = m1 / (m0 + m1)
    stat = 2.0 * (_xlogy(m1, rate / alpha) + _xlogy(m0, (1.0 - rate) / (1.0 - alpha)))
    stat = max(stat, 0.0)
    # chi2(1) survival: P(Z^2 > s) = erfc(sqrt(s/2))
    return stat, math.erfc(math.sqrt(stat / 2.0))


def summarize(
    returns,
    forecasts: Sequence,
    alpha: float,
    meta: dict | None = None,
    *,
    tail_start: int = 3000,
    return_scale: float = 1.0,
) -> BacktestReport:
    """Assemble a :class:`BacktestReport`.

    ``mean_var_x100`` is ``100 * mean(VaR) / return_scale``; pass
    ``return_scale=100`` when returns are already in percent so the column
    reads as VaR in percent.
    """
    meta = dict(meta or {})
    hits, m1 = violations(returns, forecasts)
    n = len(hits)
    stat, p = kupiec_lr_uc(n - m1, m1, alpha)
    rates = running_violation_rate(hits)
    mean_tail, std_tail = tail_summary(rates, tail_start)
    _, values = _var_values(forecasts)
    model_id = meta.pop("model_id", forecasts[0].model_id)
    W = int(meta.pop("W", 0))
    W0 = meta.pop("W0", None)
    flags = dict(meta)
    flags["return_scale"] = return_scale
    return BacktestReport(
        alpha=alpha,
        W=W,
        W0=None if W0 is None else int(W0),
        model_id=model_id,
        n_forecasts=n,
        m1=m1,
        viol_rate=m1 / n,
        lr_stat=stat,
        p_value=p,
        mean_var_x100=100.0 * float(values.mean()) / return_scale,
        running_rate=tuple((i + 1, float(r)) for i, r in enumerate(rates)),
        rate_mean_tail=mean_tail,
        rate_std_tail=std_tail,
        tail_start=tail_start,
        flags=flags,
    )
