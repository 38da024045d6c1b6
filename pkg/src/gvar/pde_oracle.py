"""Explicit finite-difference solver for ``u_t = G(u_xx)`` with a step initial profile.

Used only as an independent numerical check of the closed-form G-normal
distribution function in :mod:`gvar.gnormal`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gvar.errors import ConfigurationError
from gvar.gnormal import GNormalParams, cdf


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -8.0
    x_max: float = 8.0
    dx: float = 0.01
    t_end: float = 1.0
    dt: float | None = None  # None: largest stable step times ``safety``
    safety: float = 0.45

    def __post_init__(self):
        if not self.x_min < 0.0 < self.x_max:
            raise ConfigurationError(f"need x_min < 0 < x_max, got [{self.x_min}, {self.x_max}]")
        if not self.dx > 0 or not self.t_end > 0:
            raise ConfigurationError("dx and t_end must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if not 0 < self.safety <= 1:
            raise ConfigurationError("safety must be in (0, 1]")

    @classmethod
    def default_for(cls, p: GNormalParams, dx: float = 0.01, t_end: float = 1.0) -> "GridSpec":
        """Domain of +-8 upper standard deviations at ``t_end``."""
        half = 8.0 * p.sigma_hi * math.sqrt(t_end)
        return cls(x_min=-half, x_max=half, dx=dx, t_end=t_end)

    def max_dt(self, p: GNormalParams) -> float:
        return self.safety * self.dx**2 / p.sigma_hi**2


@dataclass
class PdeSolution:
    x_nodes: np.ndarray
    u_values: np.ndarray
    grid: GridSpec
    dt: float
    n_steps: int
    min_value: float = 0.0
    max_value: float = 1.0
    monotone: bool = True
    checkpoints: list = field(default_factory=list)


@dataclass(frozen=True)
class VerificationReport:
    max_abs_error: float
    worst_x: float
    dx: float
    dt: float
    n_steps: int
    sigma_lo: float
    sigma_hi: float
    t_end: float

    def as_dict(self) -> dict:
        return {
            "max_abs_error": self.max_abs_error,
            "worst_x": self.worst_x,
            "dx": self.dx,
            "dt": self.dt,
            "n_steps": self.n_steps,
            "sigma_lo": self.sigma_lo,
            "sigma_hi": self.sigma_hi,
            "t_end": self.t_end,
        }


def _nodes(g: GridSpec) -> np.ndarray:
    # anchor the lattice at 0 so a node always sits on the discontinuity
    i_lo = math.ceil(g.x_min / g.dx - 1e-9)
    i_hi = math.floor(g.x_max / g.dx + 1e-9)
    return np.arange(i_lo, i_hi + 1) * g.dx


def solve_nonlinear_heat(p: GNormalParams, g: GridSpec, n_checkpoints: int = 10) -> PdeSolution:
    """March ``u^{n+1} = u^n + dt G(D2 u^n)`` from the smoothed unit step to ``t_end``.

    Dirichlet values 0 and 1 are held at the ends.  ``dt`` is shrunk so an
    integer number of steps lands exactly on ``t_end``.
    """
    limit = g.max_dt(p)
    if g.dt is not None and g.dt > limit:
        raise ConfigurationError(
            f"dt={g.dt:g} violates the stability bound; maximal admissible dt is {limit:g}"
        )
    target = limit if g.dt is None else g.dt
    n_steps = max(1, math.ceil(g.t_end / target - 1e-12))
    dt = g.t_end / n_steps

    x = _nodes(g)
    u = np.where(x >= 0.0, 1.0, 0.0)
    u[np.argmin(np.abs(x))] = 0.5

    hi2, lo2 = p.sigma_hi**2, p.sigma_lo**2
    coef = dt / g.dx**2
    every = max(1, n_steps // max(n_checkpoints, 1))
    u_min, u_max, monotone = 0.0, 1.0, True
    checkpoints = []
    for step in range(1, n_steps + 1):
        d2 = u[2:] - 2.0 * u[1:-1] + u[:-2]
        u[1:-1] += coef * 0.5 * np.where(d2 > 0.0, hi2 * d2, lo2 * d2)
        if step % every == 0 or step == n_steps:
            u_min = min(u_min, float(u.min()))
            u_max = max(u_max, float(u.max()))
            ok = bool(np.all(np.diff(u) >= -1e-14))
            monotone = monotone and ok
            checkpoints.append((step * dt, float(u.min()), float(u.max()), ok))
    return PdeSolution(
        x_nodes=x,
        u_values=u,
        grid=g,
        dt=dt,
        n_steps=n_steps,
        min_value=u_min,
        max_value=u_max,
        monotone=monotone,
        checkpoints=checkpoints,
    )


def verify_closed_form(p: GNormalParams, g: GridSpec) -> VerificationReport:
    """Max-abs gap between the PDE profile and ``cdf(x / sqrt(t_end))``."""
    sol = solve_nonlinear_heat(p, g)
    exact = cdf(sol.x_nodes / math.sqrt(g.t_end), p)
    err = np.abs(sol.u_values - exact)
    i = int(np.argmax(err))
    return VerificationReport(
        max_abs_error=float(err[i]),
        worst_x=float(sol.x_nodes[i]),
        dx=g.dx,
        dt=sol.dt,
        n_steps=sol.n_steps,
        sigma_lo=p.sigma_lo,
        sigma_hi=p.sigma_hi,
        t_end=g.t_end,
    )
