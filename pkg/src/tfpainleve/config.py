"""Solver configuration and the key=value config-file reader."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .numerics import Grid

RIGHT_BCS = ("degenerate_robin", "algebraic_dirichlet")
LEFT_BCS = ("zero", "tail")

# y_max of the stand-alone Hastings-McLeod run
HM_Y_MAX = 28.0


@dataclass(frozen=True)
class SolverConfig:
    y_min: float = -20.0
    # None means eps**(-2/3) for coupled runs and HM_Y_MAX for the HM solve
    y_max: Optional[float] = None
    h: float = 0.01
    outer_tol: float = 1e-15
    outer_max: int = 50
    newton_tol: float = 1e-12
    newton_max: int = 100
    max_halvings: int = 30
    hm_tol: float = 1e-10
    right_bc: str = "degenerate_robin"
    left_bc: str = "zero"
    q: Optional[float] = None
    # Thomas-Fermi limit
    psi_h: float = 1e-4
    tf_n: int = 2001
    tf_delta: float = 1e-4
    # Hastings-McLeod shooting cross-check
    shoot_substeps: int = 10

    def __post_init__(self):
        if self.right_bc not in RIGHT_BCS:
            raise ValueError(f"right_bc must be one of {RIGHT_BCS}")
        if self.left_bc not in LEFT_BCS:
            raise ValueError(f"left_bc must be one of {LEFT_BCS}")
        for name in ("h", "outer_tol", "newton_tol", "hm_tol", "psi_h"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.outer_max < 1 or self.newton_max < 1:
            raise ValueError("iteration limits must be >= 1")

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def hm_grid(self) -> Grid:
        y_max = HM_Y_MAX if self.y_max is None else self.y_max
        return Grid.from_spacing(self.y_min, y_max, self.h)

    def coupled_grid(self, eps: float) -> Grid:
        """Grid on ``[y_min, y_max]`` ending at or below the degenerate point."""
        y_deg = eps ** (-2.0 / 3.0)
        y_max = y_deg if self.y_max is None else self.y_max
        if y_max > y_deg + self.h:
            raise ValueError(f"y_max={y_max} exceeds eps^(-2/3)+h={y_deg + self.h}")
        return Grid.from_spacing(self.y_min, y_max, self.h)


_FIELD_TYPES = {
    "y_min": float, "y_max": float, "h": float, "outer_tol": float,
    "outer_max": int, "newton_tol": float, "newton_max": int,
    "max_halvings": int, "hm_tol": float, "right_bc": str, "left_bc": str,
    "q": float, "psi_h": float, "tf_n": int, "tf_delta": float,
    "shoot_substeps": int,
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if value.lower() in ("none", "null", ""):
            out[key] = None
        else:
            out[key] = _FIELD_TYPES[key](value)
    return out


def load_config(path: str | Path | None = None, **overrides) -> SolverConfig:
    """Defaults, then the optional file, then non-None ``overrides``."""
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig(**values)
