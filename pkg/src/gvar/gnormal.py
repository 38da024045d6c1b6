"""One-dimensional G-normal distribution N(0, [sigma_lo^2, sigma_hi^2]).

Under a sublinear expectation the "distribution function" of a G-normal
variable is the worst case ``sup_theta P_theta(X <= x)``.  It solves the
nonlinear heat equation ``u_t = G(u_xx)`` and has the closed form used below.
All functions accept scalars or numpy arrays for ``x`` / ``alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from gvar.errors import DomainError, EvaluationError

_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class GNormalParams:
    """Volatility interval ``[sigma_lo, sigma_hi]`` (standard deviations)."""

    sigma_lo: float
    sigma_hi: float

    def __post_init__(self):
        lo, hi = float(self.sigma_lo), float(self.sigma_hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError(f"sigma bounds must be finite, got ({lo}, {hi})")
        if not 0.0 < lo <= hi:
            raise DomainError(f"need 0 < sigma_lo <= sigma_hi, got ({lo}, {hi})")
        object.__setattr__(self, "sigma_lo", lo)
        object.__setattr__(self, "sigma_hi", hi)

    @classmethod
    def from_variances(cls, var_lo: float, var_hi: float) -> "GNormalParams":
        return cls(math.sqrt(var_lo), math.sqrt(var_hi))

    @property
    def branch_point(self) -> float:
        """``cdf(0)``: levels below it give a positive G-VaR."""
        return self.sigma_hi / (self.sigma_hi + self.sigma_lo)


@dataclass(frozen=True)
class MaximalParams:
    mu_lo: float
    mu_hi: float

    def __post_init__(self):
        if not (math.isfinite(self.mu_lo) and math.isfinite(self.mu_hi)):
            raise DomainError("maximal bounds must be finite")
        if self.mu_lo > self.mu_hi:
            raise DomainError(f"need mu_lo <= mu_hi, got ({self.mu_lo}, {self.mu_hi})")


def _scalar_or_array(values):
    return values.item() if values.ndim == 0 else values


def g_function(a, p: GNormalParams):
    """``G(a) = (sigma_hi^2 a^+ - sigma_lo^2 a^-) / 2``."""
    a = np.asarray(a, dtype=float)
    out = 0.5 * (p.sigma_hi**2 * np.maximum(a, 0.0) - p.sigma_lo**2 * np.maximum(-a, 0.0))
    return _scalar_or_array(out)


def density(x, t: float, p: GNormalParams):
    """Density of the G-normal law at time ``t`` (variance scale ``t``)."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    norm = _SQRT2 / ((p.sigma_hi + p.sigma_lo) * math.sqrt(math.pi * t))
    scale = np.where(x <= 0.0, p.sigma_hi, p.sigma_lo)
    out = norm * np.exp(-(x * x) / (2.0 * scale * scale * t))
    return _scalar_or_array(out)


def cdf(x, p: GNormalParams):
    """Worst-case distribution function ``F(x) = sup_theta P_theta(X <= x)``.

    The left branch is used at ``x = 0``; both branches equal the branch point there.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = p.sigma_lo, p.sigma_hi
    total = hi + lo
    left = (2.0 * hi / total) * ndtr(x / hi)
    right = 1.0 - (2.0 * lo / total) * ndtr(-x / lo)
    return _scalar_or_array(np.where(x <= 0.0, left, right))


def quantile(alpha, p: GNormalParams):
    """Inverse of :func:`cdf` by closed-form branch inversion."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(~((alpha > 0.0) & (alpha < 1.0))):
        raise DomainError("alpha must lie strictly inside (0, 1)")
    return _scalar_or_array(quantile_from_bounds(alpha, p.sigma_lo, p.sigma_hi))


def quantile_from_bounds(alpha, sigma_lo, sigma_hi) -> np.ndarray:
    """:func:`quantile` broadcast over arrays of bounds; inputs are not validated."""
    lo = np.asarray(sigma_lo, dtype=float)
    hi = np.asarray(sigma_hi, dtype=float)
    total = hi + lo
    left_mask = alpha <= hi / total
    # both branches are evaluated, so clip their arguments to the valid half
    left_arg = np.clip(alpha * total / (2.0 * hi), 0.0, 0.5)
    right_arg = np.clip((1.0 - alpha) * total / (2.0 * lo), 0.0, 0.5)
    return np.where(left_mask, hi * ndtri(left_arg), -lo * ndtri(right_arg))


def g_var(alpha, p: GNormalParams):
    """G-VaR: the negated worst-case ``alpha``-quantile (positive = loss)."""
    return -quantile(alpha, p) + 0.0


def mean(p: GNormalParams) -> float:
    """First moment of the density, ``sqrt(2/pi) (sigma_lo - sigma_hi) <= 0``."""
    return _SQRT_2_OVER_PI * (p.sigma_lo - p.sigma_hi)


def maximal_expectation(
    phi: Callable[[float], float],
    m: MaximalParams,
    n_grid: int = 10_001,
    tol: float = 1e-12,
) -> float:
    """``max_{y in [mu_lo, mu_hi]} phi(y)``, the maximal-distribution expectation.

    A dense grid scan locates the best point, then golden-section search
    refines inside the two neighbouring cells.  Exact up to ~1e-10 for
    monotone, concave or convex ``phi``; for general ``phi`` the answer is as
    good as the grid resolution.
    """
    if m.mu_lo == m.mu_hi:
        value = float(phi(m.mu_lo))
        if not math.isfinite(value):
            raise EvaluationError(f"phi is not finite at {m.mu_lo}")
        return value

    grid = np.linspace(m.mu_lo, m.mu_hi, n_grid)
    values = np.array([float(phi(y)) for y in grid])
    if not np.all(np.isfinite(values)):
        bad = grid[~np.isfinite(values)][0]
        raise EvaluationError(f"phi is not finite at y={bad}")
    i = int(np.argmax(values))
    best = values[i]

    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n_grid - 1)]
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    fc, fd = float(phi(c)), float(phi(d))
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = float(phi(c))
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = float(phi(d))
    refined = max(fc, fd)
    if not math.isfinite(refined):
        raise EvaluationError("phi is not finite near its grid maximum")
    return max(best, refined)
