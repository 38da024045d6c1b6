"""Peaks-over-threshold tail estimation with a generalized Pareto fit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from gvar.errors import DataError, DomainError

_XI_ZERO = 1e-8


@dataclass(frozen=True)
class GpdFit:
    xi: float
    beta: float
    u: float
    n_exceed: int
    n_total: int
    mle: bool = True  # False when the PWM fallback was used

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError("GPD scale must be positive")

    @property
    def tail_prob(self) -> float:
        return self.n_exceed / self.n_total

    def as_dict(self) -> dict:
        return {
            "xi": self.xi,
            "beta": self.beta,
            "u": self.u,
            "n_exceed": self.n_exceed,
            "n_total": self.n_total,
            "mle": self.mle,
        }


def gpd_negloglik(xi: float, beta: float, y: np.ndarray) -> float:
    if beta <= 0:
        return math.inf
    if abs(xi) < _XI_ZERO:
        return len(y) * math.log(beta) + float(y.sum()) / beta
    w = 1.0 + xi * y / beta
    if np.any(w <= 0):
        return math.inf
    return len(y) * math.log(beta) + (1.0 + 1.0 / xi) * float(np.log(w).sum())


def pwm_estimates(y: np.ndarray) -> tuple[float, float]:
    """Probability-weighted-moment (Hosking-Wallis) estimates of ``(xi, beta)``."""
    y = np.sort(y)
    n = len(y)
    b0 = y.mean()
    # b1 = E[Y (1 - F(Y))] with plotting positions (i - 0.35)/n
    p = (np.arange(1, n + 1) - 0.35) / n
    a1 = float(np.mean(y * (1.0 - p)))
    xi = 2.0 - b0 / (b0 - 2.0 * a1)
    beta = 2.0 * b0 * a1 / (b0 - 2.0 * a1)
    return float(xi), float(beta)


def fit_gpd(y, *, min_exceed: int = 30) -> tuple[float, float, bool]:
    """MLE of ``(xi, beta)`` for exceedances ``y > 0``; falls back to PWM on failure."""
    y = np.asarray(y, dtype=float)
    if len(y) < min_exceed:
        raise DataError(f"{len(y)} exceedances; at least {min_exceed} are needed")
    xi0, beta0 = pwm_estimates(y)
    if not (math.isfinite(xi0) and math.isfinite(beta0) and beta0 > 0):
        xi0, beta0 = 0.1, float(y.mean())
    # keep the start inside the support
    if xi0 < 0 and np.any(1.0 + xi0 * y / beta0 <= 0):
        xi0 = -0.9 * beta0 / float(y.max())

    def objective(theta):
        return gpd_negloglik(theta[0], math.exp(theta[1]), y)

    res = minimize(
        objective,
        np.array([xi0, math.log(beta0)]),
        method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 4000},
    )
    if res.success and math.isfinite(res.fun):
        return float(res.x[0]), math.exp(res.x[1]), True
    return xi0, beta0, False


def fit_gpd_pot(losses, tail_frac: float = 0.10, *, min_exceed: int = 30) -> GpdFit:
    """Fit a GPD to the losses above the empirical ``1 - tail_frac`` quantile.

    The threshold ``u`` is the ``(k+1)``-th largest loss with
    ``k = ceil(tail_frac * n)``, so the ``k`` largest losses are the exceedances
    and every ``alpha <= tail_frac`` lies inside the modelled tail.
    """
    x = np.asarray(losses, dtype=float)
    if not 0.0 < tail_frac < 1.0:
        raise DomainError("tail_frac must lie in (0, 1)")
    n = len(x)
    k = int(math.ceil(tail_frac * n - 1e-9))
    if k < min_exceed:
        raise DataError(f"{k} exceedances from {n} losses; at least {min_exceed} are needed")
    desc = np.sort(x)[::-1]
    u = float(desc[k])
    y = desc[:k] - u
    y = y[y > 0]
    if len(y) < min_exceed:
        raise DataError(f"only {len(y)} strict exceedances above a tied threshold")
    xi, beta, ok = fit_gpd(y, min_exceed=min_exceed)
    return GpdFit(xi=xi, beta=beta, u=u, n_exceed=k, n_total=n, mle=ok)


def evt_tail_quantile(fit: GpdFit, alpha: float) -> float:
    """Loss level exceeded with probability ``alpha`` (inside the modelled tail)."""
    if not 0.0 < alpha <= fit.tail_prob * (1 + 1e-12):
        raise DomainError(f"alpha={alpha} is outside the modelled tail (<= {fit.tail_prob:.4g})")
    ratio = alpha * fit.n_total / fit.n_exceed
    if abs(fit.xi) < _XI_ZERO:
        return fit.u - fit.beta * math.log(ratio)
    return fit.u + fit.beta / fit.xi * (ratio ** (-fit.xi) - 1.0)
