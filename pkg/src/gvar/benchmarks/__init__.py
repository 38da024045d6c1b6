"""Benchmark VaR predictors: historical simulation and AR(1)-GARCH(1,1) variants."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from gvar.benchmarks.evt import GpdFit, evt_tail_quantile, fit_gpd_pot
from gvar.benchmarks.garch import (
    GarchFit,
    fit_garch,
    garch_var_forecast,
    one_step,
    simulate_garch,
    standardized_residuals,
)
from gvar.benchmarks.innovations import innovation_quantile
from gvar.errors import DomainError, FitError, RangeError

__all__ = [
    "GarchFit",
    "GpdFit",
    "MODEL_FAMILIES",
    "evt_tail_quantile",
    "fit_garch",
    "fit_gpd_pot",
    "garch_st_evt_forecast",
    "garch_var_forecast",
    "historical_simulation_var",
    "innovation_quantile",
    "rolling_benchmark",
    "simulate_garch",
]

# model id -> innovation family of the underlying AR(1)-GARCH(1,1)
MODEL_FAMILIES = {
    "garch_n": "normal",
    "garch_t": "student_t",
    "garch_st": "skewed_t",
    "garch_st_evt": "skewed_t",
}


def historical_simulation_var(window, alpha: float) -> float:
    """Negated ``ceil(alpha * n)``-th smallest return of the window."""
    x = np.asarray(window, dtype=float)
    n = len(x)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if alpha * n < 1.0 - 1e-9:
        raise RangeError(f"window of {n} points has no order statistic below alpha={alpha}")
    k = math.ceil(alpha * n - 1e-9)
    return -float(np.partition(x, k - 1)[k - 1])


def _fit_or_best(window, dist: str, seed: int) -> GarchFit:
    try:
        return fit_garch(window, dist, seed=seed)
    except FitError as exc:
        if exc.best is None:
            raise
        return exc.best


def garch_st_evt_forecast(
    window,
    alpha: float,
    tail_frac: float = 0.10,
    *,
    fit: GarchFit | None = None,
    gpd: GpdFit | None = None,
    seed: int = 0,
) -> float:
    """Skewed-t AR-GARCH VaR with a GPD tail on the standardized residuals.

    ``fit``/``gpd`` may be passed to reuse earlier estimates on a new window.
    """
    r = np.asarray(window, dtype=float)
    if fit is None:
        fit = _fit_or_best(r, "skewed_t", seed)
    if gpd is None:
        gpd = fit_gpd_pot(-standardized_residuals(fit, r), tail_frac)
    x_alpha = evt_tail_quantile(gpd, alpha)
    mu, sigma = one_step(fit, r)
    return -(mu - sigma * x_alpha)


def _hs_path(x: np.ndarray, W: int, alpha: float) -> np.ndarray:
    return np.array([historical_simulation_var(x[t - W + 1 : t + 1], alpha) for t in range(W - 1, len(x) - 1)])


def rolling_benchmark(x, W: int, alpha: float, spec, threads: int | None = None):
    """Benchmark forecasts at origins ``W-1 .. n-2``.

    GARCH models are refit every ``spec.refit_cadence`` origins on the
    trailing window; in between, the last fit filters the current window.
    Returns ``(var_path, snapshots, ar_coefs)``.
    """
    from gvar.estimation import worker_count

    x = np.asarray(x, dtype=float)
    origins = list(range(W - 1, len(x) - 1))
    if spec.model_id == "hs":
        path = _hs_path(x, W, alpha)
        snap = {"W": W}
        return path, [snap] * len(origins), [None] * len(origins)

    dist = MODEL_FAMILIES[spec.model_id]
    evt = spec.model_id == "garch_st_evt"
    if evt and alpha > spec.tail_frac:
        raise DomainError(f"alpha={alpha} exceeds the EVT tail fraction {spec.tail_frac}")
    cadence = spec.refit_cadence
    blocks = [origins[i : i + cadence] for i in range(0, len(origins), cadence)]

    def run_block(block):
        t0 = block[0]
        window = x[t0 - W + 1 : t0 + 1]
        fit = _fit_or_best(window, dist, spec.seed)
        gpd = fit_gpd_pot(-standardized_residuals(fit, window), spec.tail_frac) if evt else None
        snap = {"garch": fit.as_dict(), "refit_origin": t0}
        if gpd is not None:
            snap["gpd"] = gpd.as_dict()
        values = []
        for t in block:
            w = x[t - W + 1 : t + 1]
            if evt:
                values.append(garch_st_evt_forecast(w, alpha, spec.tail_frac, fit=fit, gpd=gpd))
            else:
                values.append(garch_var_forecast(fit, w, alpha))
        return values, snap, fit.ar_coef

    n_workers = worker_count() if threads is None else max(1, threads)
    if n_workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run_block, blocks))
    else:
        results = [run_block(b) for b in blocks]

    path, snapshots, coefs = [], [], []
    for block, (values, snap, coef) in zip(blocks, results):
        path.extend(values)
        snapshots.extend([snap] * len(block))
        coefs.extend([coef] * len(block))
    return np.array(path), snapshots, coefs
