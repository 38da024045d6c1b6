"""Run configuration shared by the CLI and the experiment scripts."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from gvar.benchmarks import MODEL_FAMILIES
from gvar.errors import ConfigurationError
from gvar.forecast import MODEL_IDS, MODES


def parse_grid(text: str) -> list[int]:
    """``"20:500:5"`` (inclusive range) or ``"50,70,120"``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(5)
            start, stop, step = parts
            if step < 1:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigurationError(f"bad W0 grid {text!r}; use start:stop[:step] or a,b,c") from None


def parse_span(text: str) -> tuple[int, int]:
    try:
        a, b = (int(p) for p in text.split(":"))
    except ValueError:
        raise ConfigurationError(f"bad span {text!r}; use start:stop") from None
    return a, b


@dataclass
class RunConfig:
    data: Path | None
    models: list[str] = field(default_factory=lambda: ["g_var"])
    alphas: list[float] = field(default_factory=lambda: [0.01])
    W: int = 1000
    W0: int | None = None
    calibrate: bool = False
    w0_grid: list[int] | None = None
    span: tuple[int, int] | None = None
    split: float | None = None
    band: float | None = None
    min_span: int = 500
    mode: str = "raw"
    tail_frac: float = 0.10
    refit_cadence: int = 25
    seed: int | None = None
    out: Path = Path("out")
    format: str = "json"
    tail_start: int = 3000

    def validate(self) -> "RunConfig":
        for m in self.models:
            if m not in MODEL_IDS:
                raise ConfigurationError(f"unknown model {m!r}; choose from {', '.join(MODEL_IDS)}")
        if len(set(self.models)) != len(self.models):
            raise ConfigurationError("models listed more than once")
        if not self.alphas:
            raise ConfigurationError("at least one --alpha is required")
        for a in self.alphas:
            if not 0.0 < a < 1.0:
                raise ConfigurationError(f"alpha must lie in (0, 1), got {a}")
        if self.W < 2:
            raise ConfigurationError("W must be at least 2")
        if "g_var" in self.models:
            if self.calibrate and self.W0 is not None:
                raise ConfigurationError("give either --w0 or --calibrate, not both")
            if not self.calibrate and self.W0 is None:
                raise ConfigurationError("g_var needs --w0 or --calibrate")
        if self.W0 is not None and not 1 <= self.W0 <= self.W:
            raise ConfigurationError(f"W0 must lie in [1, W={self.W}]")
        if self.w0_grid is not None and any(not 1 <= w <= self.W for w in self.w0_grid):
            raise ConfigurationError(f"W0 grid values must lie in [1, W={self.W}]")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}")
        if not 0.0 < self.tail_frac < 1.0:
            raise ConfigurationError("tail fraction must lie in (0, 1)")
        if self.refit_cadence < 1:
            raise ConfigurationError("refit cadence must be >= 1")
        if self.split is not None and not 0.0 < self.split < 1.0:
            raise ConfigurationError("split fraction must lie in (0, 1)")
        if self.format not in ("json", "csv"):
            raise ConfigurationError("format must be json or csv")
        if any(m in MODEL_FAMILIES for m in self.models) and self.seed is None:
            raise ConfigurationError("GARCH benchmarks restart randomly; pass --seed")
        if "garch_st_evt" in self.models and any(a > self.tail_frac for a in self.alphas):
            raise ConfigurationError("garch_st_evt needs every alpha <= tail fraction")
        return self

    def meta(self) -> dict:
        return {
            "data": self.data.name if self.data else None,
            "mode": self.mode,
            "tail_frac": self.tail_frac,
            "refit_cadence": self.refit_cadence,
            "seed": self.seed,
            "calibrate": self.calibrate,
            "split": self.split,
        }
