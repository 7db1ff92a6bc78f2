"""Least-squares calibration of the threshold model to time-series data.

The forward model is the cubature scheme driven by a log-domain sigmoid
threshold.  Seven quantities are fitted: the initial state, the growth
rate, the capacity, the log threshold floor and ceiling, and the
transition midpoint and width.  The search runs in an unconstrained
raw space whose transform enforces ``a_low <= K <= a_high`` by
construction, with a derivative-free simplex started from a
low-discrepancy batch of points.

All times in this module are measured from the first observation
(``time_origin``); callers convert back to calendar units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from . import exact, tipping
from .integrators import Trajectory, cubature_integrate
from .model import ModelParams
from .schedules import LogSigmoid

__all__ = [
    "Observations",
    "FitConfig",
    "FitResult",
    "PredictionResult",
    "objective",
    "fit",
    "predict",
]

_PENALTY = 1e30


@dataclass(frozen=True)
class Observations:
    """Time-stamped population records; absent values carry present=False."""

    times: np.ndarray
    values: np.ndarray
    present: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        present = np.asarray(self.present, dtype=bool)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "present", present)
        if not (len(times) == len(values) == len(present)):
            raise ValueError("times, values, present must have equal length")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("observation times must be strictly increasing")
        if int(present.sum()) < 3:
            raise ValueError("need at least 3 present records")
        if np.any(~(values[present] > 0.0)):
            raise ValueError("present values must be positive")

    @classmethod
    def from_records(cls, records) -> "Observations":
        """Build from (time, value-or-None) pairs in any order."""
        recs = sorted(records, key=lambda tv: tv[0])
        times = np.array([t for t, _ in recs], dtype=float)
        values = np.array([math.nan if v is None else float(v) for _, v in recs])
        return cls(times, values, ~np.isnan(values))

    @property
    def count_present(self) -> int:
        return int(self.present.sum())

    @property
    def scale(self) -> float:
        return float(np.max(self.values[self.present]))

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])


def objective(params: ModelParams, schedule: LogSigmoid, obs: Observations, h: float) -> float:
    """Mean squared misfit over present records.

    The forward run starts at the first observation; schedule times are
    interpreted relative to that origin.
    """
    if not (h > 0.0):
        raise ValueError(f"step size must be positive, got {h}")
    t_rel = obs.times - obs.times[0]
    traj = cubature_integrate(params, schedule, h, max(float(t_rel[-1]), h))
    idx = np.rint(t_rel / h).astype(int)
    theor = traj.states[np.minimum(idx, len(traj.states) - 1)]
    m = obs.present
    return float(np.mean((obs.values[m] - theor[m]) ** 2))


@dataclass(frozen=True)
class FitConfig:
    """Search budget and reproducibility knobs for :func:`fit`.

    ``bounds`` are raw-space start boxes (7 pairs); when omitted they
    are derived from the data scale.  The raw vector is
    (ln a_low, softplus-gap to ln K, softplus-gap to ln a_high,
    logit of x0/K, ln r, ln width, shift).
    """

    restarts: int = 16
    h: float = 1e-3
    prescreen_h: float = 0.05
    max_evals: int = 1500
    polish_evals: int = 2500
    simplex_scale: float = 0.15
    seed: int = 0
    bounds: tuple | None = None


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    schedule: LogSigmoid
    time_origin: float
    objective: float
    evaluations: int
    converged: bool
    rel_diff: np.ndarray
    theoretical: np.ndarray


@dataclass(frozen=True)
class PredictionResult:
    trajectory: Trajectory
    extinction: exact.ExtinctionReport
    crossings: tuple


def _softplus(z: float) -> float:
    return float(np.logaddexp(0.0, z))


def _inv_softplus(g: float) -> float:
    if g > 36.0:
        return g
    return math.log(math.expm1(g))


def _unpack(z: np.ndarray) -> tuple[ModelParams, LogSigmoid]:
    ln_lo = float(z[0])
    ln_K = ln_lo + _softplus(float(z[1]))
    ln_hi = ln_K + _softplus(float(z[2]))
    K = math.exp(ln_K)
    x0 = K / (1.0 + math.exp(-float(z[3])))
    params = ModelParams(r=math.exp(float(z[4])), K=K, x0=x0)
    schedule = LogSigmoid(
        high=math.exp(ln_hi),
        low=math.exp(ln_lo),
        shift=float(z[6]),
        width=math.exp(float(z[5])),
        direction="increasing",
    )
    return params, schedule


def _default_bounds(obs: Observations) -> tuple:
    vmin = float(np.min(obs.values[obs.present]))
    span = obs.span
    return (
        (math.log(vmin) - 7.0, math.log(vmin) + 1.0),
        (-1.0, 3.5),
        (-14.0, 0.0),
        (-3.0, 0.0),
        (math.log(0.003), math.log(0.5)),
        (math.log(span / 30.0), math.log(span / 2.0)),
        (0.0, span),
    )


def _penalized_objective(z: np.ndarray, obs: Observations, h: float) -> float:
    try:
        params, schedule = _unpack(z)
    except (ValueError, OverflowError):
        return _PENALTY
    # threshold must stay below capacity on the fit window; the fitted
    # law is increasing, so its window maximum sits at the last record
    viol = schedule.log_value_at(obs.span) - math.log(params.K)
    if viol >= -1e-12:
        return _PENALTY * (1.0 + max(viol, 0.0))
    return objective(params, schedule, obs, h)


def fit(obs: Observations, config: FitConfig = FitConfig()) -> FitResult:
    """Multi-start simplex minimization of the forward-model misfit.

    Starts are a scrambled Sobol batch in the raw-space box, prescreened
    with a coarse forward step; the best start is polished at the target
    step.  The reported optimum is the best point ever evaluated at the
    target step, so repeated calls with the same data and config are
    bit-identical.
    """
    bounds = config.bounds if config.bounds is not None else _default_bounds(obs)
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    sobol = qmc.Sobol(d=7, scramble=True, seed=config.seed)
    starts = lo + sobol.random(config.restarts) * (hi - lo)

    evals = 0

    def coarse(z):
        nonlocal evals
        evals += 1
        return _penalized_objective(z, obs, config.prescreen_h)

    best_start = None
    best_coarse = math.inf
    for z0 in starts:
        simplex = np.vstack([z0] + [z0 + config.simplex_scale * (hi - lo) * e for e in np.eye(7)])
        res = minimize(
            coarse,
            z0,
            method="Nelder-Mead",
            options=dict(
                adaptive=True,
                maxfev=config.max_evals,
                xatol=1e-8,
                fatol=1e-6,
                initial_simplex=simplex,
            ),
        )
        if res.fun < best_coarse:
            best_coarse, best_start = float(res.fun), res.x.copy()

    if best_start is None or best_coarse >= _PENALTY:
        raise ValueError("no feasible start found; widen the bounds")

    record = {"f": math.inf, "z": None}

    def fine(z):
        nonlocal evals
        evals += 1
        f = _penalized_objective(z, obs, config.h)
        if f < record["f"]:
            record["f"], record["z"] = f, np.array(z, dtype=float)
        return f

    res = minimize(
        fine,
        best_start,
        method="Nelder-Mead",
        options=dict(adaptive=True, maxfev=config.polish_evals, xatol=1e-10, fatol=1e-8),
    )
    converged = bool(res.success) or record["f"] < best_coarse
    params, schedule = _unpack(record["z"])

    t_rel = obs.times - obs.times[0]
    traj = cubature_integrate(params, schedule, config.h, max(float(t_rel[-1]), config.h))
    idx = np.minimum(np.rint(t_rel / config.h).astype(int), len(traj.states) - 1)
    theor = traj.states[idx]
    m = obs.present
    rel = np.abs(obs.values[m] - theor[m]) / obs.values[m]
    return FitResult(
        params=params,
        schedule=schedule,
        time_origin=float(obs.times[0]),
        objective=record["f"],
        evaluations=evals,
        converged=converged,
        rel_diff=rel,
        theoretical=theor,
    )


def predict(result: FitResult, horizon: float, h: float) -> PredictionResult:
    """Forward run past the data window with extinction and crossing events.

    ``horizon`` is measured from the fit's time origin.
    """
    if not result.converged:
        raise ValueError("refusing to extrapolate from a non-converged fit")
    traj = cubature_integrate(result.params, result.schedule, h, horizon)
    report = exact.extinction_time(
        result.params, result.schedule, tol=1e-6, horizon=horizon
    )
    crossings = tuple(tipping.detect_crossings(traj, result.schedule))
    return PredictionResult(traj, report, crossings)
