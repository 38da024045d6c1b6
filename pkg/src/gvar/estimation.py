"""Volatility-interval estimation and adaptive-window calibration.

At a forecast origin ``t`` the trailing ``W`` returns are cut into
sub-windows of length ``W0``; the zero-mean variance of each sub-window is a
draw from a maximal distribution on ``[sigma_lo^2, sigma_hi^2]``, so the
min and max over sub-windows estimate the interval ends.

Indices are 0-based positions in the return array.  An origin ``t`` uses
``returns[t - W + 1 : t + 1]`` and predicts ``returns[t + 1]``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from gvar.errors import CalibrationError, ConfigurationError, DegenerateInputError, RangeError

DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class SigmaBounds:
    sigma2_lo: float
    sigma2_hi: float
    t_index: int
    W: int
    W0: int
    method: str  # "overlapping" | "disjoint"

    @property
    def sigma_lo(self) -> float:
        return math.sqrt(self.sigma2_lo)

    @property
    def sigma_hi(self) -> float:
        return math.sqrt(self.sigma2_hi)


@dataclass(frozen=True)
class CalibrationResult:
    w0_star: int
    alpha_target: float
    grid: tuple[tuple[int, float], ...]
    deviation: float
    span: tuple[int, int]
    W: int = 0
    mode: str = "raw"
    split: float | None = None
    holdout_rate: float | None = None
    accepted: bool = True
    band: float = field(default=0.0)

    def as_dict(self) -> dict:
        return {
            "w0_star": self.w0_star,
            "alpha_target": self.alpha_target,
            "grid": [list(g) for g in self.grid],
            "deviation": self.deviation,
            "span": list(self.span),
            "W": self.W,
            "mode": self.mode,
            "split": self.split,
            "holdout_rate": self.holdout_rate,
            "accepted": self.accepted,
            "band": self.band,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationResult":
        d = dict(d)
        d["grid"] = tuple((int(w), float(r)) for w, r in d["grid"])
        d["span"] = tuple(d["span"])
        return cls(**d)


def worker_count() -> int:
    """Thread cap from ``GVAR_THREADS`` (0 or unset = one per CPU)."""
    raw = os.environ.get("GVAR_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"GVAR_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigurationError("GVAR_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _as_array(returns) -> np.ndarray:
    values = getattr(returns, "values", returns)
    return np.asarray(values, dtype=float)


def rolling_variance(returns, s: int, W0: int) -> float:
    """Uncentered mean of squares of ``returns[s - W0 + 1 : s + 1]``."""
    x = _as_array(returns)
    if W0 < 1:
        raise RangeError(f"W0 must be >= 1, got {W0}")
    if s < W0 - 1 or s >= len(x):
        raise RangeError(f"index {s} has no complete window of length {W0} (n={len(x)})")
    return float(rolling_variances(x[s - W0 + 1 : s + 1], W0)[0])


def rolling_variances(returns, W0: int) -> np.ndarray:
    """All trailing ``W0``-window variances; element ``j`` ends at index ``j + W0 - 1``."""
    x = _as_array(returns)
    if len(x) < W0:
        raise RangeError(f"series of length {len(x)} is shorter than W0={W0}")
    return sliding_window_view(x * x, W0).sum(axis=1) / W0


def _check_window(n: int, t: int, W: int, W0: int) -> None:
    if not 1 <= W0 <= W:
        raise RangeError(f"need 1 <= W0 <= W, got W0={W0}, W={W}")
    if t < W - 1 or t >= n:
        raise RangeError(f"origin {t} needs {W} observations of history (n={n})")


def _bounds(values: np.ndarray, t: int, W: int, W0: int, method: str, eps: float) -> SigmaBounds:
    lo, hi = float(values.min()), float(values.max())
    if lo < eps:
        raise DegenerateInputError(
            f"lower variance {lo:.3g} < {eps:g} at origin {t}: a flat window cannot define a G-normal law"
        )
    return SigmaBounds(lo, hi, t, W, W0, method)


def sigma_bounds_overlapping(returns, t: int, W: int, W0: int, eps: float = DEGENERATE_EPS) -> SigmaBounds:
    """Min/max of ``rolling_variance(t - s, W0)`` over every shift ``0 <= s <= W - W0``."""
    x = _as_array(returns)
    _check_window(len(x), t, W, W0)
    v = rolling_variances(x[t - W + 1 : t + 1], W0)
    return _bounds(v, t, W, W0, "overlapping", eps)


def sigma_bounds_disjoint(returns, t: int, W: int, W0: int, eps: float = DEGENERATE_EPS) -> SigmaBounds:
    """Min/max over the ``k = W // W0`` non-overlapping sub-windows ending at ``t, t - W0, ...``."""
    x = _as_array(returns)
    _check_window(len(x), t, W, W0)
    # same array as the overlapping estimator, so the disjoint values are an exact subset
    v = rolling_variances(x[t - W + 1 : t + 1], W0)[::-1][::W0]
    return _bounds(v, t, W, W0, "disjoint", eps)


def overlapping_bounds_path(returns, W: int, W0: int) -> tuple[np.ndarray, np.ndarray]:
    """Overlapping (lo, hi) variance bounds at every origin ``t = W-1 .. n-1``.

    Vectorised equivalent of :func:`sigma_bounds_overlapping`; no degeneracy check.
    """
    x = _as_array(returns)
    if not 1 <= W0 <= W:
        raise RangeError(f"need 1 <= W0 <= W, got W0={W0}, W={W}")
    if len(x) < W:
        raise RangeError(f"series of length {len(x)} is shorter than W={W}")
    v = rolling_variances(x, W0)
    windows = sliding_window_view(v, W - W0 + 1)
    return windows.min(axis=1), windows.max(axis=1)


# -- calibration -------------------------------------------------------------

Forecaster = Callable[[np.ndarray, int, int, float], np.ndarray]


def default_candidates(W: int, alpha: float, step: int = 5) -> list[int]:
    grid = list(range(step, W + 1, step))
    if alpha <= 0.01:
        grid = [w for w in grid if w >= 20]
    return grid


def violation_rate_path(returns, var_path: np.ndarray, W: int, span: tuple[int, int]) -> float:
    """Violation rate of a rolling VaR path over forecast positions ``span`` (half-open).

    ``var_path[k]`` is the forecast made at origin ``W - 1 + k``.
    """
    x = _as_array(returns)
    realized = x[W:]
    a, b = span
    hits = realized[a:b] < -var_path[a:b]
    return float(np.mean(hits))


def calibrate_w0(
    returns,
    W: int,
    alpha: float,
    candidates: Sequence[int] | None = None,
    span: tuple[int, int] | None = None,
    forecaster: Forecaster | None = None,
    *,
    min_span: int = 500,
    band: float | None = None,
    split: float | None = None,
    mode: str = "raw",
    threads: int | None = None,
) -> CalibrationResult:
    """Pick the estimation window whose realized violation rate is closest to ``alpha``.

    ``span`` is a half-open range of forecast positions (0 = origin ``W - 1``);
    by default every forecastable date is used, which looks ahead.  With
    ``split=f`` the first fraction ``f`` of the span calibrates and the rest is
    reported as ``holdout_rate``.  Ties go to the smaller window.  Raises
    :class:`CalibrationError` when even the best candidate misses ``alpha`` by
    more than ``band`` (default ``alpha / 2``).
    """
    from gvar.forecast import g_var_path

    x = _as_array(returns)
    n_fc = len(x) - W
    if n_fc <= 0:
        raise RangeError(f"need more than W={W} returns, got {len(x)}")
    if span is None:
        span = (0, n_fc)
    a, b = int(span[0]), int(span[1])
    if not 0 <= a < b <= n_fc:
        raise ConfigurationError(f"span {span} outside forecastable range [0, {n_fc})")
    fit_span = (a, b)
    holdout_span = None
    if split is not None:
        if not 0.0 < split < 1.0:
            raise ConfigurationError("split fraction must lie in (0, 1)")
        cut = a + int(math.floor(split * (b - a)))
        fit_span, holdout_span = (a, cut), (cut, b)
    if fit_span[1] - fit_span[0] < min_span:
        raise ConfigurationError(
            f"calibration span holds {fit_span[1] - fit_span[0]} dates, fewer than {min_span}"
        )
    if candidates is None:
        candidates = default_candidates(W, alpha)
    candidates = sorted({int(c) for c in candidates})
    if not candidates or candidates[0] < 1 or candidates[-1] > W:
        raise ConfigurationError(f"candidate windows must lie in [1, {W}]")
    band = 0.5 * alpha if band is None else band
    if forecaster is None:
        def forecaster(r, W_, W0_, alpha_):
            return g_var_path(r, W_, W0_, alpha_, mode=mode)

    def rate_for(w0: int) -> float:
        return violation_rate_path(x, forecaster(x, W, w0, alpha), W, fit_span)

    n_workers = worker_count() if threads is None else max(1, threads)
    if n_workers > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rates = list(pool.map(rate_for, candidates))
    else:
        rates = [rate_for(w) for w in candidates]

    deviations = [abs(r - alpha) for r in rates]
    best = min(range(len(candidates)), key=lambda i: (deviations[i], candidates[i]))
    w0_star = candidates[best]
    holdout_rate = None
    if holdout_span is not None:
        holdout_rate = violation_rate_path(x, forecaster(x, W, w0_star, alpha), W, holdout_span)
    result = CalibrationResult(
        w0_star=w0_star,
        alpha_target=alpha,
        grid=tuple(zip(candidates, rates)),
        deviation=deviations[best],
        span=fit_span,
        W=W,
        mode=mode,
        split=split,
        holdout_rate=holdout_rate,
        accepted=deviations[best] <= band,
        band=band,
    )
    if not result.accepted:
        raise CalibrationError(
            f"no adaptive W0 for W={W}, alpha={alpha}: best candidate {w0_star} "
            f"misses by {deviations[best]:.4g} > {band:.4g}",
            result=result,
        )
    return result
