"""HTTP service wrapping the core package.

Run with ``uvicorn alleetip.service.app:app``.  Every endpoint is a
stateless wrapper over the library, so concurrent requests are safe.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, calibrate, dataio, exact, scenarios, studies, tipping
from ..integrators import cubature_integrate, euler_integrate, nominal_euler_integrate
from . import schemas

app = FastAPI(title="alleetip", version=__version__)


def _finite_or_none(v: float | None) -> float | None:
    if v is None or not math.isfinite(v):
        return None
    return v


@app.get("/health", response_model=schemas.HealthResponse)
def health():
    return {"status": "ok", "version": __version__}


@app.get("/scenarios", response_model=list[schemas.ScenarioInfo])
def list_scenarios():
    return [
        {
            "name": s.name,
            "description": s.description,
            "table_x0": list(s.table_x0),
            "horizon": s.horizon,
        }
        for s in scenarios.SCENARIOS.values()
    ]


@app.post("/simulate", response_model=schemas.TrajectoryResponse)
def simulate(req: schemas.SimulateRequest):
    try:
        params = req.model.build()
        schedule = req.schedule.build()
        if req.scheme == "euler":
            traj = euler_integrate(params, schedule, req.h, req.horizon)
        elif req.scheme == "cubature":
            traj = cubature_integrate(params, schedule, req.h, req.horizon)
        else:
            traj = nominal_euler_integrate(params, schedule, req.h, req.horizon)
    except (ValueError, RuntimeError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    idx = np.arange(0, len(traj.times), max(req.stride, 1))
    return {
        "times": traj.times[idx].tolist(),
        "states": traj.states[idx].tolist(),
        "thresholds": np.asarray(schedule.value_at(traj.times[idx]), dtype=float).tolist(),
        "extinction_time": traj.extinction_time,
        "scheme": traj.scheme,
    }


@app.post("/exact/states", response_model=schemas.ExactStatesResponse)
def exact_states(req: schemas.ExactStatesRequest):
    try:
        params = req.model.build()
        schedule = req.schedule.build()
        xs = exact.state_samples(params, schedule, np.asarray(req.times, dtype=float), req.tol)
    except (ValueError, exact.ToleranceError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    return {"times": req.times, "states": xs.tolist()}


@app.post("/extinct", response_model=schemas.ExtinctionResponse)
def extinct(req: schemas.ExtinctionRequest):
    try:
        params = req.model.build()
        schedule = req.schedule.build()
        report = exact.extinction_time(params, schedule, tol=req.tol, horizon=req.horizon)
        tau_numeric = None
        if req.h is not None:
            if req.scheme == "euler":
                traj = euler_integrate(params, schedule, req.h, req.horizon)
            else:
                traj = cubature_integrate(params, schedule, req.h, req.horizon)
            tau_numeric = traj.extinction_time
    except (ValueError, exact.ToleranceError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    return {
        "tau_exact": _finite_or_none(report.tau),
        "method": report.method,
        "i0": _finite_or_none(report.i0),
        "l_horizon": report.l_horizon,
        "tau_numeric": tau_numeric,
    }


@app.post("/tip-check", response_model=schemas.TipCheckResponse)
def tip_check(req: schemas.TipCheckRequest):
    try:
        params = req.model.build()
        schedule = req.schedule.build()
        verdict = tipping.classify(params, schedule, req.h, req.horizon)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    return {
        "outcome": verdict.outcome,
        "tau": verdict.tau,
        "r_tipped": verdict.r_tipped,
        "threshold_satisfied": verdict.threshold_satisfied,
        "threshold_margin": verdict.threshold_margin
        if math.isfinite(verdict.threshold_margin)
        else math.copysign(1e308, verdict.threshold_margin),
        "crossings": [{"time": c.time, "direction": c.direction} for c in verdict.crossings],
    }


@app.post("/tables/extinction", response_model=list[schemas.ExtinctionTableRow])
def extinction_table(req: schemas.ExtinctionTableRequest):
    try:
        scenario = scenarios.get_scenario(req.scenario)
        grid = req.x0_grid if req.x0_grid is not None else list(scenario.table_x0)
        rows = studies.extinction_table(
            scenario.params(scenario.table_x0[0]),
            scenario.schedule,
            grid,
            req.h,
            horizon=scenario.horizon,
            euler_sampling=scenario.euler_sampling,
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    return [
        {
            "x0": row.x0,
            "tau_euler": _finite_or_none(row.tau_euler),
            "tau_cubature": _finite_or_none(row.tau_cubature),
            "difference": None if math.isnan(row.difference) else row.difference,
        }
        for row in rows
    ]


@app.post("/fit", response_model=schemas.FitResponse)
def run_fit(req: schemas.FitRequest):
    try:
        if req.observations is not None:
            obs = calibrate.Observations.from_records(
                [(rec.time, rec.value) for rec in req.observations]
            )
        else:
            obs = dataio.load_fisheries()
        cfg = calibrate.FitConfig(
            restarts=req.restarts,
            h=req.h,
            prescreen_h=req.prescreen_h,
            max_evals=req.max_evals,
            polish_evals=req.polish_evals,
            seed=req.seed,
        )
        result = calibrate.fit(obs, cfg)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    crossing_times: list[float] = []
    extinction_time = None
    if req.predict_horizon is not None:
        horizon = req.predict_horizon - result.time_origin
        if horizon <= 0:
            raise HTTPException(status_code=422, detail="predict_horizon precedes the data")
        prediction = calibrate.predict(result, horizon, req.h)
        crossing_times = [c.time + result.time_origin for c in prediction.crossings]
        extinction_time = _finite_or_none(prediction.extinction.tau)
        if extinction_time is not None:
            extinction_time += result.time_origin
    return {
        "x0": result.params.x0,
        "r": result.params.r,
        "K": result.params.K,
        "a_high": result.schedule.high,
        "a_low": result.schedule.low,
        "width": result.schedule.width,
        "shift": result.schedule.shift + result.time_origin,
        "time_origin": result.time_origin,
        "objective": result.objective,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "max_rel_diff": float(result.rel_diff.max()),
        "crossing_times": crossing_times,
        "extinction_time": extinction_time,
    }
