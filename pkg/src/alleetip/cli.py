"""Command-line front end.

Every capability is a subcommand; inputs come from a config file plus
dotted-key overrides, and all data goes to CSV files (or stdout with
``--stdout``).  Diagnostics go to stderr only, so pipelines stay clean.

Exit codes: 0 success, 1 validation problem, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import calibrate, dataio, exact, scenarios, studies, tipping
from .dataio import ConfigError, RunConfig
from .exact import ToleranceError
from .integrators import cubature_integrate, euler_integrate, nominal_euler_integrate
from .schedules import validate

_CONVENIENCE_FLAGS = {
    "scheme": "numerics.scheme",
    "h": "numerics.h",
    "horizon": "numerics.horizon",
    "scenario": "task.scenario",
    "seed": "task.seed",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alleetip",
        description="Threshold population dynamics: simulate, analyze, calibrate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "integrate one trajectory and write t,x,a rows"),
        ("exact", "sample the explicit solution on a uniform grid"),
        ("extinct", "report exact and numerical extinction times"),
        ("converge", "step-size ladders for extinction time and state error"),
        ("tip-check", "crossing detection plus the accumulated-impact test"),
        ("fit", "calibrate the model to an observations CSV"),
        ("predict", "fit, then extrapolate with extinction and crossing events"),
        ("tables", "scheme-comparison extinction table for a named scenario"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="run configuration file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            dest="overrides",
            help="override a config key (repeatable)",
        )
        p.add_argument("--out", type=Path, help="output directory (default: out)")
        p.add_argument("--scheme", choices=("euler", "cubature", "nominal-euler"))
        p.add_argument("--h", type=str, help="step size")
        p.add_argument("--horizon", type=str, help="integration horizon")
        p.add_argument("--scenario", type=str, help="named scenario")
        p.add_argument("--seed", type=str, help="fit seed")
        p.add_argument("--stdout", action="store_true", help="primary CSV to stdout")
    return parser


def _assemble_config(args) -> RunConfig:
    entries = dict(dataio.load_config(args.config).entries) if args.config else {}
    pending: list[tuple[str, str]] = []
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        pending.append((key.strip(), value.strip()))
    for flag, key in _CONVENIENCE_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            pending.append((key, str(value)))
    for key, raw in pending:
        if key not in dataio._KEY_TYPES:
            raise ConfigError(f"unknown key {key!r}")
        entries[key] = dataio._convert(key, raw)
    declared = entries.get("task.kind")
    if declared is not None and declared != args.command:
        raise ConfigError(
            f"task.kind: config says {declared!r} but subcommand is {args.command!r}"
        )
    entries["task.kind"] = args.command
    return RunConfig(entries)


def _resolve_problem(cfg: RunConfig, need_x0: bool = True):
    """Model and schedule, either from a scenario or explicit blocks."""
    scenario_name = cfg.get("task.scenario")
    if scenario_name is not None:
        scenario = scenarios.get_scenario(scenario_name)
        clash = [
            k for k in cfg.entries if k.startswith("schedule.") or k in ("model.r", "model.K")
        ]
        if clash:
            raise ConfigError(f"{clash[0]}: conflicts with task.scenario")
        x0 = cfg.require("model.x0") if need_x0 else scenario.K / 2.0
        return scenario.params(x0), scenario.schedule, scenario.euler_sampling, scenario
    params = cfg.model()
    schedule = cfg.schedule()
    sampling = cfg.get("numerics.euler_sampling", "step-end")
    if sampling not in ("step-end", "step-start"):
        raise ConfigError(f"numerics.euler_sampling: bad value {sampling!r}")
    return params, schedule, sampling, None


@contextmanager
def _primary_sink(out_dir: Path, name: str, to_stdout: bool):
    if to_stdout:
        yield sys.stdout
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / name, "w") as fh:
        yield fh


def _write_rows(fh, header: str, rows) -> None:
    fh.write(header + "\n")
    for row in rows:
        fh.write(",".join(row) + "\n")


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _validated(params, schedule, horizon) -> None:
    report = validate(schedule, params.K, horizon)
    if not report.ok:
        raise ConfigError(
            f"schedule: {report.reason} at t={report.first_violation_time} "
            f"(value {report.value})"
        )


def _trajectory_rows(traj, schedule, stride, offset=0.0):
    idx = np.arange(0, len(traj.times), stride)
    a = np.asarray(schedule.value_at(traj.times[idx]), dtype=float)
    for t, x, av in zip(traj.times[idx], traj.states[idx], a):
        yield [_fmt(t + offset), _fmt(x), _fmt(av)]


def cmd_simulate(cfg, out_dir, to_stdout):
    params, schedule, sampling, _ = _resolve_problem(cfg)
    scheme = cfg.get("numerics.scheme", "cubature")
    h = cfg.require("numerics.h")
    horizon = cfg.require("numerics.horizon")
    _validated(params, schedule, horizon)
    refine = cfg.get("numerics.refine_tau", False)
    if scheme == "euler":
        traj = euler_integrate(params, schedule, h, horizon, sampling, refine)
    elif scheme == "cubature":
        traj = cubature_integrate(params, schedule, h, horizon, refine)
    elif scheme == "nominal-euler":
        traj = nominal_euler_integrate(params, schedule, h, horizon, sampling)
    else:
        raise ConfigError(f"numerics.scheme: unknown scheme {scheme!r}")
    stride = cfg.get("output.stride", 1)
    with _primary_sink(out_dir, "trajectory.csv", to_stdout) as sink:
        _write_rows(sink, "t,x,a", _trajectory_rows(traj, schedule, stride))
    if traj.extinct:
        print(f"extinction at t = {traj.extinction_time}", file=sys.stderr)


def cmd_exact(cfg, out_dir, to_stdout):
    params, schedule, _, _ = _resolve_problem(cfg)
    horizon = cfg.require("numerics.horizon")
    _validated(params, schedule, horizon)
    samples = cfg.get("task.samples", 1001)
    tol = cfg.get("numerics.tol", 1e-8)
    ts = np.linspace(0.0, horizon, samples)
    xs = exact.state_samples(params, schedule, ts, tol)
    a = np.asarray(schedule.value_at(ts), dtype=float)
    with _primary_sink(out_dir, "exact_states.csv", to_stdout) as sink:
        _write_rows(
            sink,
            "t,x,a",
            ([_fmt(t), _fmt(x), _fmt(av)] for t, x, av in zip(ts, xs, a)),
        )


def cmd_extinct(cfg, out_dir, to_stdout):
    params, schedule, sampling, _ = _resolve_problem(cfg)
    horizon = cfg.require("numerics.horizon")
    _validated(params, schedule, horizon)
    tol = cfg.get("numerics.tol", 1e-8)
    report = exact.extinction_time(params, schedule, tol=tol, horizon=horizon)
    h = cfg.get("numerics.h")
    scheme = cfg.get("numerics.scheme", "cubature")
    tau_numeric = ""
    if h is not None:
        if scheme == "euler":
            traj = euler_integrate(params, schedule, h, horizon, sampling)
        else:
            traj = cubature_integrate(params, schedule, h, horizon)
        tau_numeric = _fmt(traj.extinction_time) if traj.extinct else "inf"
    with _primary_sink(out_dir, "extinction.csv", to_stdout) as sink:
        _write_rows(
            sink,
            "x0,tau_exact,method,tolerance,i0,l_horizon,scheme,h,tau_numeric",
            [[
                _fmt(params.x0),
                _fmt(report.tau),
                report.method,
                _fmt(report.tolerance),
                _fmt(report.i0),
                _fmt(report.l_horizon),
                scheme if h is not None else "",
                _fmt(h) if h is not None else "",
                tau_numeric,
            ]],
        )


def cmd_converge(cfg, out_dir, to_stdout):
    params, schedule, sampling, _ = _resolve_problem(cfg)
    h_list = dataio.parse_float_list(cfg.require("task.h_list"), "task.h_list")
    reference = cfg.get("task.reference", "closed-form")
    t_end = cfg.get("task.t_end", 10.0)
    metric = cfg.get("task.metric", "max")
    tau_rows = studies.tau_convergence_study(
        params, schedule, h_list, reference=reference, euler_sampling=sampling
    )
    state_rows = studies.state_convergence_study(
        params, schedule, h_list, t_end=t_end, metric=metric, euler_sampling=sampling
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    dataio.write_convergence_rows(state_rows, out_dir / "state_convergence.csv")
    if to_stdout:
        dataio.write_convergence_rows(tau_rows, sys.stdout)
    else:
        dataio.write_convergence_rows(tau_rows, out_dir / "tau_convergence.csv")


def cmd_tip_check(cfg, out_dir, to_stdout):
    params, schedule, _, _ = _resolve_problem(cfg)
    h = cfg.require("numerics.h")
    horizon = cfg.require("numerics.horizon")
    _validated(params, schedule, horizon)
    verdict = tipping.classify(params, schedule, h, horizon)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "crossings.csv", "w") as fh:
        _write_rows(
            fh,
            "time,direction",
            ([_fmt(c.time), c.direction] for c in verdict.crossings),
        )
    with _primary_sink(out_dir, "verdict.csv", to_stdout) as sink:
        _write_rows(
            sink,
            "x0,outcome,tau,r_tipped,threshold_satisfied,threshold_margin,crossings",
            [[
                _fmt(verdict.x0),
                verdict.outcome,
                _fmt(verdict.tau) if verdict.tau is not None else "",
                str(verdict.r_tipped).lower(),
                str(verdict.threshold_satisfied).lower(),
                _fmt(verdict.threshold_margin),
                str(len(verdict.crossings)),
            ]],
        )


def _run_fit(cfg):
    obs_path = cfg.get("task.observations")
    obs = dataio.load_observations(obs_path) if obs_path else dataio.load_fisheries()
    fit_cfg = calibrate.FitConfig(
        restarts=cfg.get("task.restarts", 16),
        h=cfg.get("numerics.h", 1e-3),
        prescreen_h=cfg.get("task.prescreen_h", 0.05),
        max_evals=cfg.get("task.max_evals", 1500),
        polish_evals=cfg.get("task.polish_evals", 2500),
        seed=cfg.get("task.seed", 0),
    )
    print(f"fitting {obs.count_present} records (seed {fit_cfg.seed}) ...", file=sys.stderr)
    return obs, calibrate.fit(obs, fit_cfg)


def _fit_report_rows(result):
    origin = result.time_origin
    return [
        ["x0", _fmt(result.params.x0)],
        ["r", _fmt(result.params.r)],
        ["K", _fmt(result.params.K)],
        ["a_high", _fmt(result.schedule.high)],
        ["a_low", _fmt(result.schedule.low)],
        ["width", _fmt(result.schedule.width)],
        ["shift", _fmt(result.schedule.shift + origin)],
        ["time_origin", _fmt(origin)],
        ["objective", _fmt(result.objective)],
        ["evaluations", str(result.evaluations)],
        ["converged", str(result.converged).lower()],
    ]


def cmd_fit(cfg, out_dir, to_stdout):
    obs, result = _run_fit(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    j = 0
    for i, (t, v, p) in enumerate(zip(obs.times, obs.values, obs.present)):
        rel = _fmt(result.rel_diff[j]) if p else "NA"
        rows.append([_fmt(t), _fmt(v) if p else "NA", _fmt(result.theoretical[i]), rel])
        if p:
            j += 1
    with open(out_dir / "fit_points.csv", "w") as fh:
        _write_rows(fh, "time,observed,theoretical,rel_diff", rows)
    with open(out_dir / "fit_summary.txt", "w") as fh:
        for key, value in _fit_report_rows(result):
            fh.write(f"{key} = {value}\n")
    with _primary_sink(out_dir, "fit_report.csv", to_stdout) as sink:
        _write_rows(sink, "parameter,value", _fit_report_rows(result))


def cmd_predict(cfg, out_dir, to_stdout):
    obs, result = _run_fit(cfg)
    horizon_abs = cfg.get("numerics.horizon", float(obs.times[-1]) + 40.0)
    horizon = float(horizon_abs) - result.time_origin
    if horizon <= 0:
        raise ConfigError("numerics.horizon: must lie past the first observation")
    h = cfg.get("numerics.h", 1e-3)
    prediction = calibrate.predict(result, horizon, h)
    out_dir.mkdir(parents=True, exist_ok=True)
    event_rows = [
        ["crossing-" + c.direction, _fmt(c.time + result.time_origin)]
        for c in prediction.crossings
    ]
    if math.isfinite(prediction.extinction.tau):
        event_rows.append(["extinction", _fmt(prediction.extinction.tau + result.time_origin)])
    with open(out_dir / "events.csv", "w") as fh:
        _write_rows(fh, "event,time", event_rows)
    with open(out_dir / "prediction_summary.txt", "w") as fh:
        for key, value in _fit_report_rows(result):
            fh.write(f"{key} = {value}\n")
        fh.write(
            f"extinction_time = {_fmt(prediction.extinction.tau + result.time_origin)}\n"
        )
    stride = cfg.get("output.stride", 100)
    with _primary_sink(out_dir, "prediction.csv", to_stdout) as sink:
        _write_rows(
            sink,
            "t,x,a",
            _trajectory_rows(prediction.trajectory, result.schedule, stride, result.time_origin),
        )


def cmd_tables(cfg, out_dir, to_stdout):
    scenario_name = cfg.get("task.scenario")
    if scenario_name is None:
        raise ConfigError("task.scenario: missing required key for tables")
    scenario = scenarios.get_scenario(scenario_name)
    h = cfg.require("numerics.h")
    x0_raw = cfg.get("task.x0_grid")
    x0_grid = (
        dataio.parse_float_list(x0_raw, "task.x0_grid") if x0_raw else scenario.table_x0
    )
    horizon = cfg.get("numerics.horizon", scenario.horizon)
    rows = studies.extinction_table(
        scenario.params(scenario.table_x0[0]),
        scenario.schedule,
        x0_grid,
        h,
        horizon=horizon,
        euler_sampling=scenario.euler_sampling,
    )
    if to_stdout:
        dataio.write_extinction_table(rows, sys.stdout)
    else:
        out_dir.mkdir(parents=True, exist_ok=True)
        dataio.write_extinction_table(rows, out_dir / "extinction_table.csv")


_COMMANDS = {
    "simulate": cmd_simulate,
    "exact": cmd_exact,
    "extinct": cmd_extinct,
    "converge": cmd_converge,
    "tip-check": cmd_tip_check,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "tables": cmd_tables,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = _assemble_config(args)
        out_dir = args.out if args.out is not None else Path(cfg.get("output.dir", "out"))
        _COMMANDS[args.command](cfg, out_dir, args.stdout)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ToleranceError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
