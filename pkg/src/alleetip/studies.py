"""Convergence studies and scheme-comparison tables.

Errors are measured against either the fixed-threshold closed form or
the adaptive exact engine; observed orders are reported as
log10(err_h / err_{h/10}) between adjacent grid refinements, attached
to the coarser step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import exact
from .integrators import cubature_integrate, euler_integrate
from .model import ModelParams
from .schedules import AlleeSchedule, Constant

__all__ = [
    "ConvergenceRow",
    "ExtinctionComparisonRow",
    "tau_convergence_study",
    "state_convergence_study",
    "extinction_table",
]


@dataclass(frozen=True)
class ConvergenceRow:
    scheme: str
    h: float
    error: float
    rate: float | None


@dataclass(frozen=True)
class ExtinctionComparisonRow:
    x0: float
    tau_euler: float
    tau_cubature: float
    difference: float  # euler minus cubature


def _check_h_list(h_list: Sequence[float]) -> list[float]:
    hs = [float(h) for h in h_list]
    if not hs:
        raise ValueError("h_list must not be empty")
    if any(h <= 0.0 for h in hs):
        raise ValueError("step sizes must be positive")
    if any(not (h1 < h0) for h0, h1 in zip(hs, hs[1:])):
        raise ValueError("h_list must be strictly decreasing")
    return hs


def _attach_rates(scheme: str, hs: list[float], errs: list[float]) -> list[ConvergenceRow]:
    rows = []
    for i, (h, e) in enumerate(zip(hs, errs)):
        rate = None
        if i + 1 < len(errs) and errs[i + 1] > 0.0 and e > 0.0:
            rate = math.log10(e / errs[i + 1])
        rows.append(ConvergenceRow(scheme, h, e, rate))
    return rows


def _reference_tau(
    params: ModelParams, schedule: AlleeSchedule, reference: str, horizon: float
) -> float:
    if reference == "closed-form":
        if not isinstance(schedule, Constant):
            raise ValueError("closed-form reference requires a constant schedule")
        return exact.closed_form_tau(params.r, params.K, schedule.value, params.x0)
    if reference == "exact-engine":
        report = exact.extinction_time(params, schedule, tol=1e-9, horizon=horizon)
        return report.tau
    raise ValueError(f"reference must be closed-form|exact-engine, got {reference!r}")


def tau_convergence_study(
    params: ModelParams,
    schedule: AlleeSchedule,
    h_list: Sequence[float],
    reference: str = "closed-form",
    horizon: float | None = None,
    euler_sampling: str = "step-end",
) -> dict[str, list[ConvergenceRow]]:
    """Extinction-time error of both schemes across a ladder of steps."""
    hs = _check_h_list(h_list)
    probe_horizon = horizon if horizon is not None else 50.0
    tau_ref = _reference_tau(params, schedule, reference, probe_horizon)
    if not math.isfinite(tau_ref):
        raise ValueError("reference extinction time is not finite; nothing to converge to")
    run_horizon = horizon if horizon is not None else 1.5 * tau_ref + 1.0
    out: dict[str, list[ConvergenceRow]] = {}
    for scheme in ("euler", "cubature"):
        errs = []
        for h in hs:
            if scheme == "euler":
                traj = euler_integrate(
                    params, schedule, h, run_horizon, schedule_sampling=euler_sampling
                )
            else:
                traj = cubature_integrate(params, schedule, h, run_horizon)
            if traj.extinction_time is None:
                raise ValueError(f"{scheme} run at h={h} did not reach extinction")
            errs.append(abs(traj.extinction_time - tau_ref))
        out[scheme] = _attach_rates(scheme, hs, errs)
    return out


def state_convergence_study(
    params: ModelParams,
    schedule: AlleeSchedule,
    h_list: Sequence[float],
    t_end: float = 10.0,
    metric: str = "max",
    euler_sampling: str = "step-end",
) -> dict[str, list[ConvergenceRow]]:
    """State error of both schemes over the grid points in (0, t_end].

    ``metric`` selects the worst-case ("max") or mean absolute error
    over the common grid; the worst case is what published comparison
    tables of this kind report.
    """
    if not (t_end > 0.0):
        raise ValueError(f"window end must be positive, got {t_end}")
    if metric not in ("max", "mean"):
        raise ValueError(f"metric must be max|mean, got {metric!r}")
    hs = _check_h_list(h_list)
    out: dict[str, list[ConvergenceRow]] = {}
    ref_cache: dict[float, np.ndarray] = {}

    def reference(h: float) -> np.ndarray:
        if h not in ref_cache:
            ts = np.arange(1, int(math.floor(t_end / h + 1e-9)) + 1) * h
            if isinstance(schedule, Constant):
                ref_cache[h] = exact.closed_form_state(
                    params.r, params.K, schedule.value, params.x0, ts
                )
            else:
                ref_cache[h] = exact.state_samples(params, schedule, ts, tol=1e-10)
        return ref_cache[h]

    for scheme in ("euler", "cubature"):
        errs = []
        for h in hs:
            if scheme == "euler":
                traj = euler_integrate(
                    params, schedule, h, t_end, schedule_sampling=euler_sampling
                )
            else:
                traj = cubature_integrate(params, schedule, h, t_end)
            err = np.abs(traj.states[1:] - reference(h))
            errs.append(float(err.max() if metric == "max" else err.mean()))
        out[scheme] = _attach_rates(scheme, hs, errs)
    return out


def extinction_table(
    params: ModelParams,
    schedule: AlleeSchedule,
    x0_grid: Sequence[float],
    h: float,
    horizon: float = 15.0,
    euler_sampling: str = "step-end",
) -> list[ExtinctionComparisonRow]:
    """Side-by-side numerical extinction times over an initial-condition grid.

    Rows that do not reach extinction within the horizon carry +inf.
    """
    rows = []
    for x0 in x0_grid:
        p = params.with_x0(float(x0))
        te = euler_integrate(p, schedule, h, horizon, schedule_sampling=euler_sampling)
        tc = cubature_integrate(p, schedule, h, horizon)
        tau_e = te.extinction_time if te.extinction_time is not None else math.inf
        tau_c = tc.extinction_time if tc.extinction_time is not None else math.inf
        diff = tau_e - tau_c if math.isfinite(tau_e) and math.isfinite(tau_c) else math.nan
        rows.append(ExtinctionComparisonRow(float(x0), tau_e, tau_c, diff))
    return rows
