"""Classify trajectories against a moving Allee threshold.

A run is rate-tipped when the state crosses the threshold from above at
least once and then goes extinct.  The accumulated-impact test
(``threshold_check``) is the integral necessary condition: extinction
requires the cumulative impact L to exceed the initial reciprocal
log-margin 1 / (ln K - ln x0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exact import _grid_diagnostics, to_w
from .integrators import Trajectory, cubature_integrate
from .model import ModelParams
from .schedules import AlleeSchedule, Constant, sup_after

__all__ = [
    "Crossing",
    "ThresholdReport",
    "TippingVerdict",
    "detect_crossings",
    "threshold_check",
    "classify",
    "basin_scan",
]

PERSIST_TOLERANCE = 1e-3  # relative distance to K that counts as settled


@dataclass(frozen=True)
class Crossing:
    time: float
    direction: str  # "downward" | "upward"


@dataclass(frozen=True)
class ThresholdReport:
    """Outcome of the accumulated-impact inequality at a finite horizon."""

    satisfied: bool
    margin: float
    l_horizon: float
    tail_bound: float
    conclusive: bool


@dataclass(frozen=True)
class TippingVerdict:
    x0: float
    crossings: tuple
    outcome: str  # "extinct" | "persist-to-K" | "undecided-at-horizon"
    tau: float | None
    r_tipped: bool
    threshold_satisfied: bool
    threshold_margin: float


def detect_crossings(traj: Trajectory, schedule: AlleeSchedule) -> list[Crossing]:
    """Grid intervals where the state passes through the threshold.

    Crossing times are linearly interpolated inside the interval.
    Tangential contact without a sign change is not a crossing.
    """
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    d = traj.states - np.asarray(schedule.value_at(traj.times), dtype=float)
    sign = np.sign(d)
    # carry the previous nonzero sign through exact touches
    nz = sign != 0.0
    idx = np.where(nz, np.arange(len(sign)), -1)
    idx = np.maximum.accumulate(idx)
    eff = np.where(idx >= 0, sign[np.maximum(idx, 0)], 0.0)
    out: list[Crossing] = []
    flips = np.nonzero(eff[:-1] * eff[1:] < 0.0)[0]
    for i in flips:
        t0, t1 = traj.times[i], traj.times[i + 1]
        d0, d1 = d[i], d[i + 1]
        t_star = float(t0 + (t1 - t0) * d0 / (d0 - d1)) if d0 != d1 else float(t0)
        out.append(Crossing(t_star, "downward" if eff[i] > 0 else "upward"))
    return out


@lru_cache(maxsize=256)
def _impact_at_horizon(r: float, K: float, schedule: AlleeSchedule, horizon: float, qtol: float):
    if isinstance(schedule, Constant):
        g = math.log(K) - math.log(schedule.value)
        l_h = (1.0 - math.exp(-r * g * horizon)) / g
        tail = math.exp(-r * g * horizon) / g
        return l_h, tail
    ts, lam, L = _grid_diagnostics(r, K, schedule, horizon, qtol)
    tail_rate = math.log(K) - math.log(sup_after(schedule, horizon))
    if tail_rate <= 0.0:
        tail = math.inf
    else:
        tail = math.exp(-r * float(lam[-1])) / tail_rate
    return float(L[-1]), tail


def threshold_check(
    params: ModelParams, schedule: AlleeSchedule, horizon: float, tol: float = 1e-9
) -> ThresholdReport:
    """Does the cumulative impact at the horizon exceed 1/(ln K - ln x0)?

    The report carries a truncation bound on the neglected tail; when
    the horizon value plus the tail straddles the target the result is
    inconclusive (``conclusive`` is false).
    """
    if not (0.0 < params.x0 < params.K):
        raise ValueError(f"threshold check requires x0 in (0, K), got {params.x0}")
    w0 = to_w(params.x0, params.K)
    l_h, tail = _impact_at_horizon(params.r, params.K, schedule, horizon, tol)
    satisfied = l_h > w0
    conclusive = satisfied or (l_h + tail <= w0)
    return ThresholdReport(satisfied, l_h - w0, l_h, tail, conclusive)


def classify(
    params: ModelParams,
    schedule: AlleeSchedule,
    h: float,
    horizon: float = 10.0,
) -> TippingVerdict:
    """Run the cubature scheme and classify the outcome at the horizon."""
    if params.x0 == 0.0:
        return TippingVerdict(0.0, (), "extinct", 0.0, False, True, math.inf)
    traj = cubature_integrate(params, schedule, h, horizon)
    crossings = tuple(detect_crossings(traj, schedule))
    if params.x0 == params.K:
        return TippingVerdict(params.x0, crossings, "persist-to-K", None, False, False, -math.inf)
    report = threshold_check(params, schedule, horizon)
    if traj.extinct:
        outcome = "extinct"
        tau = traj.extinction_time
    elif abs(traj.states[-1] - params.K) <= PERSIST_TOLERANCE * params.K:
        outcome, tau = "persist-to-K", None
    else:
        outcome, tau = "undecided-at-horizon", None
    r_tipped = traj.extinct and any(c.direction == "downward" for c in crossings)
    return TippingVerdict(
        params.x0, crossings, outcome, tau, r_tipped, report.satisfied, report.margin
    )


def basin_scan(
    params: ModelParams,
    schedule: AlleeSchedule,
    x0_grid,
    h: float,
    horizon: float = 10.0,
) -> list[TippingVerdict]:
    """One verdict per initial condition; params supplies r and K."""
    out = []
    for x0 in x0_grid:
        if not (0.0 <= x0 <= params.K):
            raise ValueError(f"initial condition {x0} outside [0, K]")
        out.append(classify(params.with_x0(float(x0)), schedule, h, horizon))
    return out
