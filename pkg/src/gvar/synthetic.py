"""Seeded synthetic series for tests, fixtures and experiment scripts."""

from __future__ import annotations

import datetime as dt

import numpy as np

from gvar.data import PriceSeries


def regime_switching_returns(
    n: int,
    sigmas=(0.5, 1.0),
    block: int = 250,
    seed: int = 0,
) -> np.ndarray:
    """Gaussian returns whose volatility cycles through ``sigmas`` every ``block`` steps."""
    rng = np.random.default_rng(seed)
    levels = np.asarray(sigmas, dtype=float)
    scale = levels[(np.arange(n) // block) % len(levels)]
    return scale * rng.standard_normal(n)


def business_days(start: dt.date, n: int) -> list[dt.date]:
    days, d = [], start
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def prices_from_returns(returns, start_level: float = 100.0, start: dt.date = dt.date(2000, 1, 3)) -> PriceSeries:
    """Closing levels whose percent log returns are ``returns``."""
    r = np.asarray(returns, dtype=float)
    levels = start_level * np.exp(np.concatenate([[0.0], np.cumsum(r) / 100.0]))
    return PriceSeries(tuple(business_days(start, len(levels))), tuple(float(c) for c in levels))


def trend_prices(n: int, growth_pct: float = 0.05, start_level: float = 100.0) -> PriceSeries:
    """Deterministic exponential trend: every return equals ``growth_pct``."""
    return prices_from_returns(np.full(n - 1, growth_pct), start_level)
