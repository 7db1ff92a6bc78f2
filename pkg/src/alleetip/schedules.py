"""Time-dependent Allee threshold laws and their evaluation.

Every schedule is an immutable value: construction checks the
schedule-local invariants, evaluation is a pure function of time, and
``validate`` checks the model-level requirement 0 < a_t < K on a
sampling grid over a working horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

__all__ = [
    "Constant",
    "Sigmoid",
    "LogSigmoid",
    "Oscillatory",
    "Tabulated",
    "AlleeSchedule",
    "ValidationReport",
    "evaluate",
    "log_ratio",
    "validate",
    "sup_after",
]

# exp argument beyond this is saturated; avoids overflow warnings in the tails
_EXP_CLIP = 700.0


def _stable_sigmoid(z):
    return 1.0 / (1.0 + np.exp(np.clip(z, -_EXP_CLIP, _EXP_CLIP)))


@dataclass(frozen=True)
class Constant:
    """Fixed threshold a(t) = value."""

    value: float

    def __post_init__(self):
        if not (self.value > 0.0 and math.isfinite(self.value)):
            raise ValueError(f"constant threshold must be positive, got {self.value}")

    def value_at(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.value)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Sigmoid:
    """Monotone transition between two levels.

    ``direction="increasing"`` ramps from ``low`` up to ``high`` around
    time ``shift`` over a characteristic ``width``; ``"decreasing"`` is
    the mirror image.
    """

    high: float
    low: float
    shift: float
    width: float
    direction: str = "increasing"

    def __post_init__(self):
        if not (0.0 < self.low < self.high):
            raise ValueError(
                f"need 0 < low < high, got low={self.low}, high={self.high}"
            )
        if not (self.width > 0.0):
            raise ValueError(f"width must be positive, got {self.width}")
        if self.direction not in ("increasing", "decreasing"):
            raise ValueError(f"direction must be increasing|decreasing, got {self.direction!r}")

    def _sign(self) -> float:
        # increasing uses exponent -(t-shift)/width, decreasing +(t-shift)/width
        return -1.0 if self.direction == "increasing" else 1.0

    def value_at(self, t):
        t = np.asarray(t, dtype=float)
        z = self._sign() * (t - self.shift) / self.width
        out = (self.high - self.low) * _stable_sigmoid(z) + self.low
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LogSigmoid:
    """Sigmoid transition applied to the logarithm of the threshold."""

    high: float
    low: float
    shift: float
    width: float
    direction: str = "increasing"

    def __post_init__(self):
        if not (0.0 < self.low < self.high):
            raise ValueError(
                f"need 0 < low < high, got low={self.low}, high={self.high}"
            )
        if not (self.width > 0.0):
            raise ValueError(f"width must be positive, got {self.width}")
        if self.direction not in ("increasing", "decreasing"):
            raise ValueError(f"direction must be increasing|decreasing, got {self.direction!r}")

    def _sign(self) -> float:
        return -1.0 if self.direction == "increasing" else 1.0

    def log_value_at(self, t):
        t = np.asarray(t, dtype=float)
        z = self._sign() * (t - self.shift) / self.width
        ln_hi, ln_lo = math.log(self.high), math.log(self.low)
        out = (ln_hi - ln_lo) * _stable_sigmoid(z) + ln_lo
        return float(out) if out.ndim == 0 else out

    def value_at(self, t):
        return np.exp(self.log_value_at(t))


@dataclass(frozen=True)
class Oscillatory:
    """Periodic threshold a(t) = amplitude * sin^2(2 pi t / period) + base."""

    amplitude: float
    base: float
    period: float

    def __post_init__(self):
        if self.amplitude < 0.0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if not (self.base > 0.0):
            raise ValueError(f"base must be positive, got {self.base}")
        if not (self.period > 0.0):
            raise ValueError(f"period must be positive, got {self.period}")

    def value_at(self, t):
        t = np.asarray(t, dtype=float)
        out = self.amplitude * np.sin(2.0 * math.pi * t / self.period) ** 2 + self.base
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear threshold through (time, value) knots.

    Outside the knot range the end values are held constant when
    ``clamp`` is true; otherwise out-of-range queries are an error.
    """

    times: tuple = field(default=())
    values: tuple = field(default=())
    clamp: bool = True

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if len(times) < 2 or len(times) != len(values):
            raise ValueError("need at least two (time, value) knots of equal length")
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("knot times must be strictly increasing")
        if any(v <= 0.0 for v in values):
            raise ValueError("knot values must be positive")

    def value_at(self, t):
        t = np.asarray(t, dtype=float)
        if not self.clamp:
            bad = (t < self.times[0]) | (t > self.times[-1])
            if np.any(bad):
                raise ValueError(
                    f"time {np.asarray(t)[bad].flat[0]} outside knot range "
                    f"[{self.times[0]}, {self.times[-1]}] and clamping is off"
                )
        out = np.interp(t, self.times, self.values)
        return float(out) if out.ndim == 0 else out


AlleeSchedule = Union[Constant, Sigmoid, LogSigmoid, Oscillatory, Tabulated]


def evaluate(schedule: AlleeSchedule, t):
    """Threshold value a(t); accepts scalars or arrays."""
    return schedule.value_at(t)


def log_ratio(schedule: AlleeSchedule, K: float, t):
    """ln(K) - ln(a(t)), the log-margin between capacity and threshold.

    Positive wherever the schedule respects a(t) < K; a nonpositive
    value indicates an invariant breach and raises.
    """
    a = np.asarray(schedule.value_at(t), dtype=float)
    out = math.log(K) - np.log(a)
    if np.any(out <= 0.0):
        t_bad = np.asarray(t, dtype=float).reshape(-1)[np.argmax(out.reshape(-1) <= 0.0)]
        raise ValueError(f"threshold reaches capacity K={K} at t={t_bad}")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    first_violation_time: float | None = None
    value: float | None = None
    reason: str | None = None


def validate(
    schedule: AlleeSchedule, K: float, horizon: float, grid: int = 10001
) -> ValidationReport:
    """Check 0 < a_t < K on a uniform sampling grid over [0, horizon]."""
    if not (horizon > 0.0):
        raise ValueError(f"horizon must be positive, got {horizon}")
    if grid < 2:
        raise ValueError(f"grid must have at least 2 samples, got {grid}")
    ts = np.linspace(0.0, horizon, grid)
    a = np.asarray(schedule.value_at(ts), dtype=float)
    bad = (a <= 0.0) | (a >= K)
    if np.any(bad):
        i = int(np.argmax(bad))
        reason = "a_t <= 0" if a[i] <= 0.0 else "a_t >= K"
        return ValidationReport(False, float(ts[i]), float(a[i]), reason)
    return ValidationReport(True)


def sup_after(schedule: AlleeSchedule, t: float) -> float:
    """Supremum of the threshold over [t, infinity).

    Used for truncation bounds: the tail of the cumulative-impact
    integral decays at least like exp(-r (ln K - ln sup) s).
    """
    if isinstance(schedule, Constant):
        return schedule.value
    if isinstance(schedule, (Sigmoid, LogSigmoid)):
        if schedule.direction == "increasing":
            return schedule.high
        return float(schedule.value_at(t))
    if isinstance(schedule, Oscillatory):
        return schedule.amplitude + schedule.base
    if isinstance(schedule, Tabulated):
        later = [v for tt, v in zip(schedule.times, schedule.values) if tt >= t]
        return max([float(schedule.value_at(t)), schedule.values[-1], *later])
    raise TypeError(f"unknown schedule type {type(schedule).__name__}")
