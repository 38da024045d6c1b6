"""One-step-ahead G-VaR forecasts and rolling forecast assembly.

Two modes are offered.  ``raw`` treats the returns themselves as G-normal.
``ar1`` first removes a no-intercept AR(1) mean ``r_t = a r_{t-1} + e_t``
fitted on the trailing window, estimates the interval on the residuals and
adds the conditional mean back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from gvar.errors import ConfigurationError, DegenerateInputError, DomainError, RangeError
from gvar.estimation import (
    DEGENERATE_EPS,
    SigmaBounds,
    overlapping_bounds_path,
    sigma_bounds_overlapping,
)
from gvar.gnormal import GNormalParams, quantile, quantile_from_bounds

MODEL_IDS = ("g_var", "hs", "garch_n", "garch_t", "garch_st", "garch_st_evt")
MODES = ("raw", "ar1")


@dataclass(frozen=True)
class VarForecast:
    t_index: int
    alpha: float
    var_value: float
    model_id: str
    params_snapshot: Any = None
    ar1_coef: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.var_value):
            raise DomainError(f"non-finite VaR at origin {self.t_index}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class ModelSpec:
    """What to forecast with; only the fields relevant to ``model_id`` are read."""

    model_id: str = "g_var"
    W0: int | None = None
    mode: str = "raw"
    tail_frac: float = 0.10
    refit_cadence: int = 25
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model_id not in MODEL_IDS:
            raise ConfigurationError(f"unknown model {self.model_id!r}; choose from {MODEL_IDS}")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.model_id == "g_var" and self.W0 is None:
            raise ConfigurationError("g_var needs an estimation window W0")
        if self.refit_cadence < 1:
            raise ConfigurationError("refit cadence must be >= 1")


def fit_ar1(window, min_length: int = 30) -> float:
    """Least-squares slope of ``r_t`` on ``r_{t-1}`` without intercept."""
    x = np.asarray(window, dtype=float)
    if len(x) < min_length:
        raise RangeError(f"AR(1) fit needs at least {min_length} points, got {len(x)}")
    lagged = x[:-1]
    denom = float(np.dot(lagged, lagged))
    if denom <= 0.0 or np.ptp(x) == 0.0:
        raise DegenerateInputError("AR(1) fit on a window without variation")
    return float(np.dot(x[1:], lagged) / denom)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def g_var_forecast(returns, t: int, W: int, W0: int, alpha: float, mode: str = "raw") -> VarForecast:
    """G-VaR for ``returns[t + 1]`` from the trailing ``W`` observations.

    In ``ar1`` mode the residual window has ``W - 1`` points (the first
    return of the window has no in-window lag), and ``W0`` is capped at ``W - 1``.
    """
    _check_alpha(alpha)
    x = np.asarray(getattr(returns, "values", returns), dtype=float)
    if mode == "raw":
        bounds = sigma_bounds_overlapping(x, t, W, W0)
        q = quantile(alpha, GNormalParams(bounds.sigma_lo, bounds.sigma_hi))
        return VarForecast(t, alpha, -q + 0.0, "g_var", bounds)
    if mode != "ar1":
        raise ConfigurationError(f"mode must be one of {MODES}, got {mode!r}")
    if t < W - 1 or t >= len(x):
        raise RangeError(f"origin {t} needs {W} observations of history (n={len(x)})")
    window = x[t - W + 1 : t + 1]
    a = fit_ar1(window)
    resid = window[1:] - a * window[:-1]
    w_res = W - 1
    bounds = sigma_bounds_overlapping(resid, w_res - 1, w_res, min(W0, w_res))
    bounds = SigmaBounds(bounds.sigma2_lo, bounds.sigma2_hi, t, W, W0, bounds.method)
    q = quantile(alpha, GNormalParams(bounds.sigma_lo, bounds.sigma_hi))
    return VarForecast(t, alpha, -(a * x[t] + q) + 0.0, "g_var", bounds, ar1_coef=a)


def _ar1_path(x: np.ndarray, W: int, W0: int, chunk: int = 512):
    """Per-origin AR(1) slope and residual-window variance bounds, vectorised."""
    n = len(x)
    w_res = W - 1
    w0 = min(W0, w_res)
    prod = x[1:] * x[:-1]  # prod[j] pairs x[j+1] with x[j]
    lag_sq = x[:-1] ** 2
    # origin t uses pairs j = t-W+1 .. t-1
    num = sliding_window_view(prod, w_res).sum(axis=1)
    den = sliding_window_view(lag_sq, w_res).sum(axis=1)
    if np.any(den <= 0.0):
        raise DegenerateInputError("AR(1) fit on a window without variation")
    slopes = num / den  # slopes[k] for origin W-1+k
    # sub-window sums over residual positions s (residual e_s = x_s - a x_{s-1}, s >= 1)
    sq = sliding_window_view(x[1:] ** 2, w0).sum(axis=1)
    cross = sliding_window_view(prod, w0).sum(axis=1)
    lag = sliding_window_view(lag_sq, w0).sum(axis=1)
    # sub-window ending at residual position s sits at index s - w0 in these arrays
    n_shift = w_res - w0 + 1
    lo = np.empty(n - W + 1)
    hi = np.empty(n - W + 1)
    for start in range(0, n - W + 1, chunk):
        stop = min(start + chunk, n - W + 1)
        t = np.arange(start, stop) + W - 1
        a = slopes[start:stop, None]
        ends = t[:, None] - np.arange(n_shift)[None, :]  # residual positions
        idx = ends - w0
        v = (sq[idx] - 2.0 * a * cross[idx] + a * a * lag[idx]) / w0
        lo[start:stop] = v.min(axis=1)
        hi[start:stop] = v.max(axis=1)
    return slopes, lo, hi


def g_var_path(returns, W: int, W0: int, alpha: float, mode: str = "raw") -> np.ndarray:
    """G-VaR at every origin ``t = W-1 .. n-2`` (those with a realized next return).

    Element ``k`` is the forecast made at origin ``W - 1 + k``.  Matches
    :func:`g_var_forecast` origin by origin up to rounding.
    """
    _check_alpha(alpha)
    x = np.asarray(getattr(returns, "values", returns), dtype=float)
    if len(x) < W + 1:
        raise RangeError(f"need at least W+1={W + 1} returns, got {len(x)}")
    body = x[:-1]
    if mode == "raw":
        lo, hi = overlapping_bounds_path(body, W, W0)
        mean_part = 0.0
    elif mode == "ar1":
        slopes, lo, hi = _ar1_path(body, W, W0)
        mean_part = slopes * body[W - 1 :]
    else:
        raise ConfigurationError(f"mode must be one of {MODES}, got {mode!r}")
    if np.min(lo) < DEGENERATE_EPS:
        k = int(np.argmin(lo))
        raise DegenerateInputError(f"flat estimation window at origin {W - 1 + k}")
    q = quantile_from_bounds(alpha, np.sqrt(lo), np.sqrt(hi))
    return -(mean_part + q) + 0.0


def rolling_forecast(series, W: int, alpha: float, spec: ModelSpec) -> list[VarForecast]:
    """Forecasts for every origin ``t = W-1 .. n-2``, in origin order."""
    _check_alpha(alpha)
    x = np.asarray(getattr(series, "values", series), dtype=float)
    if len(x) < W + 1:
        raise RangeError(f"need at least W+1={W + 1} returns, got {len(x)}")
    origins = range(W - 1, len(x) - 1)
    if spec.model_id == "g_var":
        path = g_var_path(x, W, spec.W0, alpha, mode=spec.mode)
        snapshot = {"W": W, "W0": spec.W0, "mode": spec.mode}
        return [VarForecast(t, alpha, float(v), "g_var", snapshot) for t, v in zip(origins, path)]

    from gvar.benchmarks import rolling_benchmark

    path, snapshots, coefs = rolling_benchmark(x, W, alpha, spec)
    return [
        VarForecast(t, alpha, float(v), spec.model_id, snap, coef)
        for t, v, snap, coef in zip(origins, path, snapshots, coefs)
    ]
