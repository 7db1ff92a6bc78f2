"""Named parameter sets for one-command reproduction of the study tables."""

from __future__ import annotations

from dataclasses import dataclass

from .model import ModelParams
from .schedules import AlleeSchedule, Constant, Oscillatory, Sigmoid

__all__ = ["Scenario", "SCENARIOS", "get_scenario"]


@dataclass(frozen=True)
class Scenario:
    name: str
    r: float
    K: float
    schedule: AlleeSchedule
    table_x0: tuple
    horizon: float
    euler_sampling: str
    description: str

    def params(self, x0: float) -> ModelParams:
        return ModelParams(r=self.r, K=self.K, x0=x0)


def _grid(n: int) -> tuple:
    return tuple(round(0.04 * i, 10) for i in range(1, n + 1))


SCENARIOS = {
    "sigmoid-increasing": Scenario(
        name="sigmoid-increasing",
        r=1.0,
        K=1.0,
        schedule=Sigmoid(high=0.9, low=0.1, shift=1.0, width=0.1, direction="increasing"),
        table_x0=_grid(10),
        horizon=12.0,
        euler_sampling="step-end",
        description="threshold ramps 0.1 -> 0.9 around t=1",
    ),
    "sigmoid-decreasing": Scenario(
        name="sigmoid-decreasing",
        r=1.0,
        K=1.0,
        schedule=Sigmoid(high=0.9, low=0.1, shift=1.0, width=0.1, direction="decreasing"),
        table_x0=_grid(10),
        horizon=5.0,
        euler_sampling="step-end",
        description="threshold ramps 0.9 -> 0.1 around t=1",
    ),
    "oscillatory": Scenario(
        name="oscillatory",
        r=1.0,
        K=1.0,
        schedule=Oscillatory(amplitude=0.8, base=0.01, period=1.0),
        table_x0=_grid(6),
        horizon=5.0,
        euler_sampling="step-start",
        description="threshold sweeps most of (0, K) each half period",
    ),
    "constant-allee": Scenario(
        name="constant-allee",
        r=1.0,
        K=1.0,
        schedule=Constant(0.5),
        table_x0=(0.16, 0.32),
        horizon=3.0,
        euler_sampling="step-end",
        description="fixed threshold used for the convergence ladders",
    ),
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        known = ", ".join(sorted(SCENARIOS))
        raise ValueError(f"unknown scenario {name!r}; known: {known}") from None
