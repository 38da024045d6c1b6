"""Unit-variance innovation families for the AR-GARCH benchmarks.

``skewed_t`` is the Fernandez-Steel skewed Student-t: a symmetric t with
``nu`` degrees of freedom whose positive half is stretched by ``gamma`` and
negative half shrunk by ``1/gamma``, then shifted and scaled to zero mean and
unit variance.  ``gamma > 1`` skews right, ``gamma = 1`` is the symmetric t.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats
from scipy.special import gammaln, ndtr, ndtri

from gvar.errors import DomainError

FAMILIES = ("normal", "student_t", "skewed_t")
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _check(dist: str, nu: float | None, gamma: float | None) -> None:
    if dist not in FAMILIES:
        raise DomainError(f"unknown innovation family {dist!r}")
    if dist in ("student_t", "skewed_t") and (nu is None or not nu > 2.0):
        raise DomainError(f"degrees of freedom must exceed 2, got {nu}")
    if dist == "skewed_t" and (gamma is None or not gamma > 0.0):
        raise DomainError(f"skewness parameter must be positive, got {gamma}")


def skew_t_moments(nu: float, gamma: float) -> tuple[float, float]:
    """Mean and standard deviation of the unstandardised Fernandez-Steel t."""
    m1 = 2.0 * math.sqrt(nu) * math.exp(gammaln((nu + 1) / 2) - gammaln(nu / 2)) / (
        math.sqrt(math.pi) * (nu - 1.0)
    )
    m2 = nu / (nu - 2.0)
    mu = m1 * (gamma - 1.0 / gamma)
    var = m2 * (gamma**2 - 1.0 + 1.0 / gamma**2) - mu**2
    return mu, math.sqrt(var)


def logpdf(z, dist: str, nu: float | None = None, gamma: float | None = None) -> np.ndarray:
    _check(dist, nu, gamma)
    z = np.asarray(z, dtype=float)
    if dist == "normal":
        return -_LOG_SQRT_2PI - 0.5 * z * z
    const = gammaln((nu + 1) / 2) - gammaln(nu / 2) - 0.5 * math.log(math.pi * nu)
    if dist == "student_t":
        scale = math.sqrt(nu / (nu - 2.0))  # t = scale * z
        t = z * scale
        return const + math.log(scale) - (nu + 1) / 2 * np.log1p(t * t / nu)
    mu, sd = skew_t_moments(nu, gamma)
    y = mu + sd * z
    arg = np.where(y >= 0.0, y / gamma, y * gamma)
    return (
        math.log(2.0 / (gamma + 1.0 / gamma))
        + math.log(sd)
        + const
        - (nu + 1) / 2 * np.log1p(arg * arg / nu)
    )


def cdf(z, dist: str, nu: float | None = None, gamma: float | None = None):
    _check(dist, nu, gamma)
    z = np.asarray(z, dtype=float)
    if dist == "normal":
        return ndtr(z)
    if dist == "student_t":
        return stats.t.cdf(z * math.sqrt(nu / (nu - 2.0)), nu)
    mu, sd = skew_t_moments(nu, gamma)
    y = mu + sd * z
    g2 = gamma * gamma
    left = 2.0 / (1.0 + g2) * stats.t.cdf(y * gamma, nu)
    right = 1.0 - 2.0 * g2 / (1.0 + g2) * stats.t.sf(y / gamma, nu)
    return np.where(y < 0.0, left, right)


def innovation_quantile(dist: str, params: dict | None, alpha):
    """``alpha``-quantile of the unit-variance innovation.

    ``params`` carries ``nu`` (t families) and ``gamma`` (skewed t).
    """
    params = params or {}
    nu, gamma = params.get("nu"), params.get("gamma")
    _check(dist, nu, gamma)
    a = np.asarray(alpha, dtype=float)
    if np.any(~((a > 0.0) & (a < 1.0))):
        raise DomainError("alpha must lie strictly inside (0, 1)")
    if dist == "normal":
        q = ndtri(a)
    elif dist == "student_t":
        q = stats.t.ppf(a, nu) * math.sqrt((nu - 2.0) / nu)
    else:
        mu, sd = skew_t_moments(nu, gamma)
        g2 = gamma * gamma
        split = 1.0 / (1.0 + g2)
        left = stats.t.ppf(np.clip(a * (1.0 + g2) / 2.0, 0.0, 0.5), nu) / gamma
        right = gamma * stats.t.isf(np.clip((1.0 - a) * (1.0 + g2) / (2.0 * g2), 0.0, 0.5), nu)
        y = np.where(a < split, left, right)
        q = (y - mu) / sd
    q = np.asarray(q, dtype=float)
    return q.item() if q.ndim == 0 else q


def sample(dist: str, size, rng: np.random.Generator, nu: float | None = None, gamma: float | None = None):
    """Draw unit-variance innovations."""
    _check(dist, nu, gamma)
    if dist == "normal":
        return rng.standard_normal(size)
    t = rng.standard_t(nu, size)
    if dist == "student_t":
        return t * math.sqrt((nu - 2.0) / nu)
    mu, sd = skew_t_moments(nu, gamma)
    positive = rng.random(size) < gamma**2 / (1.0 + gamma**2)
    mag = np.abs(t)
    y = np.where(positive, gamma * mag, -mag / gamma)
    return (y - mu) / sd
