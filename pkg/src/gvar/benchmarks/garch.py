"""AR(1)-GARCH(1,1) by maximum likelihood.

Mean and variance::

    r_t = c r_{t-1} + e_t,   e_t = sigma_t z_t
    sigma_t^2 = omega + alpha1 e_{t-1}^2 + beta1 sigma_{t-1}^2

with ``z_t`` drawn from a unit-variance family in
:mod:`gvar.benchmarks.innovations`.  The recursion is seeded with the
window's uncentered variance.  Parameters are optimised by Nelder-Mead on an
unconstrained scale:

    c = tanh(th0), omega = exp(th1), alpha1 + beta1 = logistic(th2),
    alpha1 / (alpha1 + beta1) = logistic(th3), nu = 2 + exp(th4), gamma = exp(th5)

so every candidate the optimiser visits is covariance-stationary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.special import expit, logit

from gvar.benchmarks import innovations
from gvar.errors import DegenerateInputError, DomainError, FitError, RangeError

_MAX_PERSISTENCE = 1.0 - 1e-8
_LOG_NU_MAX = math.log(500.0)


@dataclass(frozen=True)
class GarchFit:
    omega: float
    alpha1: float
    beta1: float
    dist: str
    nu: float | None = None
    gamma: float | None = None
    ar_coef: float = 0.0
    loglik: float = float("nan")
    converged: bool = True
    n_obs: int = 0
    theta: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError("omega must be positive")
        if self.alpha1 < 0 or self.beta1 < 0 or not self.alpha1 + self.beta1 < 1:
            raise DomainError("need alpha1, beta1 >= 0 and alpha1 + beta1 < 1")
        if self.nu is not None and not self.nu > 2:
            raise DomainError("nu must exceed 2")
        if self.gamma is not None and not self.gamma > 0:
            raise DomainError("gamma must be positive")

    @property
    def shape_params(self) -> dict:
        out = {}
        if self.nu is not None:
            out["nu"] = self.nu
        if self.gamma is not None:
            out["gamma"] = self.gamma
        return out

    def as_dict(self) -> dict:
        return {
            "omega": self.omega,
            "alpha1": self.alpha1,
            "beta1": self.beta1,
            "dist": self.dist,
            "nu": self.nu,
            "gamma": self.gamma,
            "ar_coef": self.ar_coef,
            "loglik": self.loglik,
            "converged": self.converged,
            "n_obs": self.n_obs,
        }


def _n_params(dist: str) -> int:
    return {"normal": 4, "student_t": 5, "skewed_t": 6}[dist]


def _unpack(theta: np.ndarray, dist: str):
    c = math.tanh(theta[0])
    omega = math.exp(min(max(theta[1], -30.0), 50.0))  # floor keeps omega > 0 when the search drifts
    persistence = min(float(expit(theta[2])), _MAX_PERSISTENCE)
    alpha1 = persistence * float(expit(theta[3]))
    beta1 = persistence - alpha1
    nu = gamma = None
    if dist != "normal":
        nu = 2.0 + math.exp(min(max(theta[4], -6.0), _LOG_NU_MAX))
    if dist == "skewed_t":
        gamma = math.exp(min(max(theta[5], -3.0), 3.0))
    return c, omega, alpha1, beta1, nu, gamma


def _pack(c, omega, alpha1, beta1, nu, gamma, dist) -> np.ndarray:
    persistence = alpha1 + beta1
    share = alpha1 / persistence if persistence > 0 else 0.5
    theta = [
        math.atanh(max(min(c, 0.999), -0.999)),
        math.log(omega),
        float(logit(min(max(persistence, 1e-6), 1 - 1e-6))),
        float(logit(min(max(share, 1e-6), 1 - 1e-6))),
    ]
    if dist != "normal":
        theta.append(math.log(nu - 2.0))
    if dist == "skewed_t":
        theta.append(math.log(gamma))
    return np.array(theta)


def garch_filter(r: np.ndarray, c: float, omega: float, alpha1: float, beta1: float, presample: float):
    """Residuals ``e_1..e_{n-1}`` and conditional variances ``sigma^2_1..sigma^2_{n-1}``."""
    e = r[1:] - c * r[:-1]
    sigma2 = np.empty_like(e)
    sigma2[0] = presample
    if len(e) > 1:
        drive = omega + alpha1 * e[:-1] ** 2
        sigma2[1:] = lfilter([1.0], [1.0, -beta1], drive, zi=[beta1 * presample])[0]
    return e, sigma2


def _negloglik(theta, r, presample, dist) -> float:
    c, omega, alpha1, beta1, nu, gamma = _unpack(theta, dist)
    e, sigma2 = garch_filter(r, c, omega, alpha1, beta1, presample)
    if not np.all(sigma2 > 0) or not np.all(np.isfinite(sigma2)):
        return 1e300
    z = e / np.sqrt(sigma2)
    ll = innovations.logpdf(z, dist, nu=nu, gamma=gamma).sum() - 0.5 * np.log(sigma2).sum()
    return -ll if np.isfinite(ll) else 1e300


def _validate_window(window, min_length: int) -> np.ndarray:
    r = np.asarray(window, dtype=float)
    if len(r) < min_length:
        raise RangeError(f"GARCH fit needs at least {min_length} observations, got {len(r)}")
    if not np.all(np.isfinite(r)):
        raise DomainError("GARCH window contains non-finite values")
    if np.ptp(r) == 0.0:
        raise DegenerateInputError("GARCH fit on a flat window")
    return r


def _default_start(r: np.ndarray, dist: str) -> np.ndarray:
    s0 = float(np.mean(r * r))
    c0 = float(np.dot(r[1:], r[:-1]) / np.dot(r[:-1], r[:-1]))
    return _pack(c0, 0.05 * s0, 0.08, 0.90, 8.0, 1.0, dist)


def fit_garch(
    window,
    dist: str = "normal",
    *,
    start=None,
    restarts: int = 3,
    seed: int = 0,
    min_length: int = 250,
    maxiter: int | None = None,
) -> GarchFit:
    """Joint MLE of the AR(1) coefficient, GARCH(1,1) and shape parameters.

    ``start`` (an unconstrained parameter vector, e.g. ``previous.theta``)
    warm-starts the search.  A second simplex pass polishes the first; if
    that still fails the convergence test, up to ``restarts`` jittered
    restarts follow.  Raises :class:`FitError` (carrying the best fit) when
    none converges.
    """
    if dist not in innovations.FAMILIES:
        raise DomainError(f"unknown innovation family {dist!r}")
    r = _validate_window(window, min_length)
    presample = float(np.mean(r * r))
    k = _n_params(dist)
    theta0 = np.asarray(start, dtype=float) if start is not None and len(start) == k else _default_start(r, dist)
    options = {"maxiter": maxiter or 600 * k, "maxfev": maxiter or 600 * k, "xatol": 1e-6, "fatol": 1e-7}

    def run(theta):
        return minimize(_negloglik, theta, args=(r, presample, dist), method="Nelder-Mead", options=options)

    best = run(theta0)
    polished = run(best.x)
    if polished.fun <= best.fun:
        best = polished
    converged = bool(polished.success)
    rng = np.random.default_rng(seed)
    attempt = 0
    while not converged and attempt < restarts:
        attempt += 1
        trial = run(best.x + rng.normal(0.0, 0.3, size=k))
        if trial.fun < best.fun:
            best = trial
        converged = bool(trial.success)

    c, omega, alpha1, beta1, nu, gamma = _unpack(best.x, dist)
    fit = GarchFit(
        omega=omega,
        alpha1=alpha1,
        beta1=beta1,
        dist=dist,
        nu=nu,
        gamma=gamma,
        ar_coef=c,
        loglik=-float(best.fun),
        converged=converged,
        n_obs=len(r) - 1,
        theta=tuple(best.x),
    )
    if not converged:
        raise FitError(f"GARCH({dist}) likelihood search did not converge after {restarts} restarts", best=fit)
    return fit


def one_step(fit: GarchFit, window) -> tuple[float, float]:
    """Conditional mean and standard deviation of the return after ``window``."""
    r = np.asarray(window, dtype=float)
    if len(r) < 2:
        raise RangeError("need at least two observations to filter")
    presample = float(np.mean(r * r))
    e, sigma2 = garch_filter(r, fit.ar_coef, fit.omega, fit.alpha1, fit.beta1, presample)
    mu_next = fit.ar_coef * r[-1]
    var_next = fit.omega + fit.alpha1 * e[-1] ** 2 + fit.beta1 * sigma2[-1]
    return mu_next, math.sqrt(var_next)


def standardized_residuals(fit: GarchFit, window) -> np.ndarray:
    r = np.asarray(window, dtype=float)
    e, sigma2 = garch_filter(r, fit.ar_coef, fit.omega, fit.alpha1, fit.beta1, float(np.mean(r * r)))
    return e / np.sqrt(sigma2)


def garch_var_forecast(fit: GarchFit, window, alpha: float) -> float:
    """``-(mu_{t+1} + sigma_{t+1} Q_alpha)`` for the return following ``window``."""
    mu, sigma = one_step(fit, window)
    q = innovations.innovation_quantile(fit.dist, fit.shape_params, alpha)
    return -(mu + sigma * q)


def simulate_garch(
    n: int,
    omega: float,
    alpha1: float,
    beta1: float,
    *,
    dist: str = "normal",
    nu: float | None = None,
    gamma: float | None = None,
    ar_coef: float = 0.0,
    rng: np.random.Generator,
    burn: int = 500,
) -> np.ndarray:
    """Simulate an AR(1)-GARCH(1,1) path of length ``n`` after ``burn`` discarded steps."""
    total = n + burn
    z = innovations.sample(dist, total, rng, nu=nu, gamma=gamma)
    r = np.empty(total)
    sigma2 = omega / (1.0 - alpha1 - beta1)
    prev_r = 0.0
    prev_e = 0.0
    for t in range(total):
        sigma2 = omega + alpha1 * prev_e**2 + beta1 * sigma2
        prev_e = math.sqrt(sigma2) * z[t]
        prev_r = ar_coef * prev_r + prev_e
        r[t] = prev_r
    return r[burn:]
