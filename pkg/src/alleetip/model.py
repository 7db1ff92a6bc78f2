"""Core model parameters shared by every solver in the package."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ModelParams:
    """Growth rate, carrying capacity, and initial population.

    The state lives in [0, K]; r and K are fixed while the Allee
    threshold may move in time (see :mod:`alleetip.schedules`).
    """

    r: float
    K: float
    x0: float

    def __post_init__(self):
        if not (self.r > 0.0 and math.isfinite(self.r)):
            raise ValueError(f"growth rate r must be positive, got {self.r}")
        if not (self.K > 0.0 and math.isfinite(self.K)):
            raise ValueError(f"carrying capacity K must be positive, got {self.K}")
        if not (0.0 <= self.x0 <= self.K):
            raise ValueError(f"initial state x0 must lie in [0, K], got {self.x0}")

    def with_x0(self, x0: float) -> "ModelParams":
        return replace(self, x0=x0)
