"""Closed-form solution engine: diagnostics, states, and extinction times.

The solver rests on the reciprocal-log-margin transform
``w = 1 / (ln K - ln x)``, which turns the growth law into a linear
equation.  Two running integrals drive everything:

* ``lam(t)`` -- the cumulative log-margin  integral of ln(K / a_s) over [0, t],
* ``L(t)``   -- the cumulative impact      r * integral of exp(-r lam(s)) over [0, t].

The state is ``K * exp(-exp(-r lam(t)) / I(t))`` with
``I(t) = w(x0) - L(t)``; the population hits zero exactly when the
decreasing function ``I`` does.  All quadratures are composite
trapezoids refined by interval halving until successive estimates agree
to the requested tolerance, so this module serves as the accuracy
reference for the fixed-step integrators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams
from .schedules import AlleeSchedule, Constant

__all__ = [
    "ToleranceError",
    "ExtinctionReport",
    "to_w",
    "from_w",
    "cumulative_log_integral",
    "big_l",
    "big_i",
    "closed_form_tau",
    "closed_form_state",
    "exact_state",
    "state_samples",
    "extinction_time",
]

_MAX_PANELS = 1 << 24
_MIN_PANELS = 1024


class ToleranceError(RuntimeError):
    """Requested tolerance not reachable within the refinement cap."""


def to_w(x: float, K: float) -> float:
    """Reciprocal log-margin transform, defined for 0 < x < K."""
    if not (0.0 < x < K):
        raise ValueError(f"transform requires 0 < x < K, got x={x}, K={K}")
    return 1.0 / (math.log(K) - math.log(x))


def from_w(w: float, K: float) -> float:
    """Inverse transform K * exp(-1/w); w <= 0 means the state has died."""
    if not (w > 0.0):
        raise ValueError(f"inverse transform requires w > 0, got {w}")
    return K * math.exp(-1.0 / w)


def _grid_diagnostics(r, K, schedule, T, qtol):
    """Refine (ts, lam, L) on [0, T] until both endpoint integrals settle.

    Returns float64 node arrays; accumulation runs in extended precision
    so multi-million-panel grids do not drift.
    """
    lnK = math.log(K)
    n = _MIN_PANELS
    prev_lam = prev_L = None
    while True:
        ts = np.linspace(0.0, T, n + 1)
        h = T / n
        g = lnK - np.log(np.asarray(schedule.value_at(ts), dtype=float))
        lam = np.concatenate(
            ([0.0], np.cumsum((0.5 * h) * (g[:-1] + g[1:]), dtype=np.longdouble))
        )
        integrand = np.exp(-r * lam)
        L = r * np.concatenate(
            ([0.0], np.cumsum((0.5 * h) * (integrand[:-1] + integrand[1:]), dtype=np.longdouble))
        )
        lam_T, L_T = float(lam[-1]), float(L[-1])
        if prev_lam is not None and abs(lam_T - prev_lam) <= qtol and abs(L_T - prev_L) <= qtol:
            return ts, lam.astype(float), L.astype(float)
        if n >= _MAX_PANELS:
            raise ToleranceError(
                f"quadrature tolerance {qtol} unreachable at {n} panels over [0, {T}]"
            )
        prev_lam, prev_L = lam_T, L_T
        n *= 2


def _local_extend(r, K, schedule, t0, lam0, L0, t1, panels=64):
    """Carry (lam, L) from t0 to t1 > t0 with a fine local trapezoid."""
    if t1 <= t0:
        return lam0, L0
    ts = np.linspace(t0, t1, panels + 1)
    h = (t1 - t0) / panels
    g = math.log(K) - np.log(np.asarray(schedule.value_at(ts), dtype=float))
    lam = lam0 + np.concatenate(([0.0], np.cumsum((0.5 * h) * (g[:-1] + g[1:]))))
    integrand = np.exp(-r * lam)
    L1 = L0 + r * float(np.sum((0.5 * h) * (integrand[:-1] + integrand[1:])))
    return float(lam[-1]), L1


def cumulative_log_integral(schedule: AlleeSchedule, K: float, t: float, tol: float = 1e-10) -> float:
    """Integral of ln(K / a_s) over [0, t] to absolute tolerance tol."""
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if t == 0.0:
        return 0.0
    _, lam, _ = _grid_diagnostics(1.0, K, schedule, t, tol)
    return float(lam[-1])


def big_l(params: ModelParams, schedule: AlleeSchedule, t: float, tol: float = 1e-8) -> float:
    """Cumulative impact L(t); nonnegative and nondecreasing in t."""
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if t == 0.0:
        return 0.0
    _, _, L = _grid_diagnostics(params.r, params.K, schedule, t, tol)
    return float(L[-1])


def big_i(params: ModelParams, schedule: AlleeSchedule, t: float, tol: float = 1e-8) -> float:
    """Survival margin I(t) = w(x0) - L(t); +inf when x0 = K."""
    if params.x0 == 0.0:
        raise ValueError("survival margin undefined for x0 = 0 (zero solution applies)")
    if params.x0 == params.K:
        return math.inf
    return to_w(params.x0, params.K) - big_l(params, schedule, t, tol)


def closed_form_tau(r: float, K: float, a: float, x0: float) -> float:
    """Extinction time for a fixed threshold; +inf when x0 >= a."""
    if not (0.0 < a < K):
        raise ValueError(f"need 0 < a < K, got a={a}, K={K}")
    if not (x0 > 0.0):
        raise ValueError(f"need x0 > 0, got {x0}")
    if x0 >= a:
        return math.inf
    g = math.log(K) - math.log(a)
    return math.log((math.log(K) - math.log(x0)) / (math.log(a) - math.log(x0))) / (r * g)


def closed_form_state(r: float, K: float, a: float, x0: float, t):
    """Fully explicit state for a fixed threshold; zero at and past extinction."""
    if not (0.0 < a < K):
        raise ValueError(f"need 0 < a < K, got a={a}, K={K}")
    if not (0.0 <= x0 <= K):
        raise ValueError(f"need x0 in [0, K], got {x0}")
    t_arr = np.asarray(t, dtype=float)
    if x0 == 0.0:
        out = np.zeros_like(t_arr)
        return float(out) if out.ndim == 0 else out
    if x0 == K:
        out = np.full_like(t_arr, K)
        return float(out) if out.ndim == 0 else out
    g = math.log(K) - math.log(a)
    w0 = to_w(x0, K)
    decay = np.exp(-r * g * t_arr)
    I = w0 - (1.0 - decay) / g
    out = np.zeros_like(t_arr)
    alive = I > 0.0
    with np.errstate(over="ignore", divide="ignore"):
        out[alive] = K * np.exp(-decay[alive] / I[alive])
    out = np.clip(out, 0.0, K)
    return float(out) if out.ndim == 0 else out


def exact_state(params: ModelParams, schedule: AlleeSchedule, t: float, tol: float = 1e-8) -> float:
    """State at a single time from the explicit solution; always in [0, K]."""
    return float(state_samples(params, schedule, np.asarray([t], dtype=float), tol)[0])


def state_samples(params: ModelParams, schedule: AlleeSchedule, times, tol: float = 1e-8) -> np.ndarray:
    """Vector of exact states at the requested times (one shared refinement)."""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0.0):
        raise ValueError("times must be nonnegative")
    if params.x0 == 0.0:
        return np.zeros_like(times)
    if params.x0 == params.K:
        return np.full_like(times, params.K)
    T = float(times.max())
    out = np.empty_like(times)
    if T == 0.0:
        out[:] = params.x0
        return out
    # state error is bounded by a small multiple of the quadrature error
    qtol = max(tol / 16.0, 1e-13)
    ts, lam, L = _grid_diagnostics(params.r, params.K, schedule, T, qtol)
    w0 = to_w(params.x0, params.K)
    order = np.argsort(times)
    for j in order:
        t = float(times[j])
        if t == 0.0:
            out[j] = params.x0
            continue
        i = int(np.searchsorted(ts, t, side="right")) - 1
        lam_t, L_t = _local_extend(params.r, params.K, schedule, float(ts[i]), float(lam[i]), float(L[i]), t)
        I = w0 - L_t
        if I <= 0.0:
            out[j] = 0.0
        else:
            with np.errstate(over="ignore"):
                out[j] = min(params.K, params.K * math.exp(-math.exp(-params.r * lam_t) / I))
    return out


@dataclass(frozen=True)
class ExtinctionReport:
    """Extinction time plus the diagnostics that produced it."""

    tau: float
    i0: float
    l_horizon: float
    method: str
    tolerance: float


def extinction_time(
    params: ModelParams,
    schedule: AlleeSchedule,
    tol: float = 1e-8,
    horizon: float = 100.0,
    allow_closed_form: bool = True,
) -> ExtinctionReport:
    """First time the survival margin I reaches zero, or +inf within horizon.

    Fixed thresholds are answered in closed form unless
    ``allow_closed_form`` is off; otherwise the unique root of the
    monotone margin is bracketed on a refined grid and bisected to
    width <= tol.
    """
    if not (horizon > 0.0):
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not (0.0 < params.x0 <= params.K):
        raise ValueError(f"extinction time requires x0 in (0, K], got {params.x0}")

    r, K, x0 = params.r, params.K, params.x0
    if x0 == K:
        l_h = big_l(params, schedule, horizon, tol=max(tol, 1e-10))
        return ExtinctionReport(math.inf, math.inf, l_h, "grid", tol)

    w0 = to_w(x0, K)
    if isinstance(schedule, Constant) and allow_closed_form:
        g = math.log(K) - math.log(schedule.value)
        l_h = (1.0 - math.exp(-r * g * horizon)) / g
        return ExtinctionReport(closed_form_tau(r, K, schedule.value, x0), w0, l_h, "closed-form", 0.0)

    qtol = 1e-9
    while True:
        ts, lam, L = _grid_diagnostics(r, K, schedule, horizon, qtol)
        I = w0 - L
        if I[-1] > 0.0:
            return ExtinctionReport(math.inf, w0, float(L[-1]), "grid", tol)
        i = int(np.argmax(I <= 0.0))
        # a grid-level L error shifts the root by err / |dI/dt|; tighten if needed
        slope = r * math.exp(-r * float(lam[i]))
        needed = max(tol * slope / 4.0, 5e-14)
        if qtol <= needed:
            break
        qtol = needed
    lo, hi = float(ts[i - 1]), float(ts[i])
    lam_lo, L_lo = float(lam[i - 1]), float(L[i - 1])
    l_h = float(L[-1])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lam_mid, L_mid = _local_extend(r, K, schedule, lo, lam_lo, L_lo, mid)
        if w0 - L_mid > 0.0:
            lo, lam_lo, L_lo = mid, lam_mid, L_mid
        else:
            hi = mid
    return ExtinctionReport(0.5 * (lo + hi), w0, l_h, "bisection", tol)
