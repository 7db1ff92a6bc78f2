"""Fixed-step schemes: forward Euler and the cubature discretization.

Both schemes walk the uniform grid t_k = k*h and report the numerical
extinction time as k'*h, where k' is the first grid index at which the
scheme's positivity indicator fails (the state itself for Euler, the
survival margin I_k for the cubature scheme).  The cubature scheme
discretizes the integrals of the explicit solution instead of the
differential equation, which keeps every state inside [0, K] for any
step size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams
from .schedules import AlleeSchedule

__all__ = [
    "Trajectory",
    "StepSizeError",
    "rhs",
    "nominal_rhs",
    "euler_integrate",
    "cubature_integrate",
    "nominal_euler_integrate",
]


class StepSizeError(RuntimeError):
    """A step left the admissible state interval."""


def _w0(params: ModelParams) -> float:
    return 1.0 / (math.log(params.K) - math.log(params.x0))


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid numerical solution with optional extinction marker."""

    times: np.ndarray
    states: np.ndarray
    extinction_index: int | None
    extinction_time: float | None
    scheme: str

    @property
    def h(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @property
    def extinct(self) -> bool:
        return self.extinction_index is not None


def rhs(x: float, a: float, r: float, K: float) -> float:
    """Growth law r*x*(ln K - ln x)*(ln x - ln a), with 0 at x = 0.

    The boundary value follows the convention that x*(ln x)^n vanishes
    at x = 0, so zero is a genuine equilibrium.
    """
    if x < 0.0:
        raise ValueError(f"state must be nonnegative, got {x}")
    if not (0.0 < a < K):
        raise ValueError(f"threshold must satisfy 0 < a < K, got a={a}")
    if x == 0.0:
        return 0.0
    lx = math.log(x)
    return r * x * (math.log(K) - lx) * (lx - math.log(a))


def nominal_rhs(x: float, a: float, r: float, K: float) -> float:
    """Cubic baseline law r*x*((K-x)/K)*((x-a)/K)."""
    if x < 0.0:
        raise ValueError(f"state must be nonnegative, got {x}")
    return r * x * ((K - x) / K) * ((x - a) / K)


def _grid(h: float, horizon: float) -> int:
    if not (h > 0.0):
        raise ValueError(f"step size must be positive, got {h}")
    if horizon < h:
        raise ValueError(f"horizon {horizon} shorter than one step {h}")
    return int(math.floor(horizon / h + 1e-9))


def _sample_times(n: int, h: float, schedule_sampling: str) -> np.ndarray:
    # step k uses the threshold at the end of the step by default
    if schedule_sampling == "step-end":
        return np.arange(1, n + 1) * h
    if schedule_sampling == "step-start":
        return np.arange(0, n) * h
    raise ValueError(f"schedule_sampling must be step-end|step-start, got {schedule_sampling!r}")


def _zero_trajectory(n: int, h: float, scheme: str) -> Trajectory:
    return Trajectory(np.arange(n + 1) * h, np.zeros(n + 1), 0, 0.0, scheme)


def euler_integrate(
    params: ModelParams,
    schedule: AlleeSchedule,
    h: float,
    horizon: float,
    schedule_sampling: str = "step-end",
    refine_tau: bool = False,
) -> Trajectory:
    """Explicit Euler on the growth law.

    States are not clamped from above; the first step that lands at or
    below zero marks extinction, after which the state is held at zero.
    """
    n = _grid(h, horizon)
    if params.x0 == 0.0:
        return _zero_trajectory(n, h, "euler")
    ln_a = np.log(
        np.asarray(schedule.value_at(_sample_times(n, h, schedule_sampling)), dtype=float)
    ).tolist()
    r, lnK = params.r, math.log(params.K)
    x = params.x0
    states = [x]
    ext_idx = None
    overshoot = 0.0
    for k in range(n):
        lx = math.log(x)
        x = x + h * r * x * (lnK - lx) * (lx - ln_a[k])
        if x <= 0.0:
            ext_idx = k + 1
            overshoot = x
            break
        states.append(x)
    out = np.zeros(n + 1)
    out[: len(states)] = states
    ext_time = None
    if ext_idx is not None:
        ext_time = ext_idx * h
        if refine_tau:
            x_prev = states[-1]
            ext_time = (ext_idx - 1) * h + h * x_prev / (x_prev - overshoot)
    return Trajectory(np.arange(n + 1) * h, out, ext_idx, ext_time, "euler")


def cubature_integrate(
    params: ModelParams,
    schedule: AlleeSchedule,
    h: float,
    horizon: float,
    refine_tau: bool = False,
) -> Trajectory:
    """Quadrature-of-the-exact-solution scheme.

    The inner log-margin integral accumulates by trapezoid, the outer
    impact integral by a right-endpoint sum, and the state is recovered
    through the explicit formula, so states stay in [0, K] for any h.
    Running sums are carried in extended precision.
    """
    n = _grid(h, horizon)
    times = np.arange(n + 1) * h
    if params.x0 == 0.0:
        return _zero_trajectory(n, h, "cubature")
    if params.x0 == params.K:
        return Trajectory(times, np.full(n + 1, params.K), None, None, "cubature")
    r, K = params.r, params.K
    g = math.log(K) - np.log(np.asarray(schedule.value_at(times), dtype=float))
    inner = np.cumsum((0.5 * h) * (g[:-1] + g[1:]), dtype=np.longdouble)
    decay = np.exp(-r * inner)
    margin = np.longdouble(_w0(params)) - (r * h) * np.cumsum(decay, dtype=np.longdouble)
    alive = margin > 0.0
    states = np.zeros(n + 1)
    states[0] = params.x0
    d64 = decay.astype(float)
    m64 = margin.astype(float)
    states[1:][alive] = K * np.exp(-d64[alive] / m64[alive])
    ext_idx = None
    ext_time = None
    if not bool(alive.all()):
        ext_idx = int(np.argmax(~alive)) + 1
        ext_time = ext_idx * h
        if refine_tau:
            m_prev = _w0(params) if ext_idx == 1 else m64[ext_idx - 2]
            ext_time = (ext_idx - 1) * h + h * m_prev / (m_prev - m64[ext_idx - 1])
    return Trajectory(times, states, ext_idx, ext_time, "cubature")


def nominal_euler_integrate(
    params: ModelParams,
    schedule: AlleeSchedule,
    h: float,
    horizon: float,
    schedule_sampling: str = "step-end",
) -> Trajectory:
    """Euler on the cubic baseline law, for contrast with the log model.

    The baseline has no finite-time extinction; a step that leaves
    [0, K] is a step-size failure, not an extinction event.
    """
    n = _grid(h, horizon)
    if params.x0 == 0.0:
        return _zero_trajectory(n, h, "nominal-euler")
    a_vals = np.asarray(
        schedule.value_at(_sample_times(n, h, schedule_sampling)), dtype=float
    ).tolist()
    r, K = params.r, params.K
    x = params.x0
    states = [x]
    for k in range(n):
        x = x + h * r * x * ((K - x) / K) * ((x - a_vals[k]) / K)
        if x < 0.0 or x > K:
            raise StepSizeError(
                f"state {x} left [0, {K}] at step {k + 1}; reduce h={h}"
            )
        states.append(x)
    return Trajectory(np.arange(n + 1) * h, np.asarray(states), None, None, "nominal-euler")
