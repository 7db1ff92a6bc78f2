"""File formats: observation CSV, trajectory/table CSV, and run configs.

Floating-point columns are written with 17 significant digits so a
write/read round trip reproduces 64-bit values exactly.  The run-config
format is line-oriented ``section.key = value`` with ``#`` comments;
unknown keys are errors so typos never pass silently.
"""

from __future__ import annotations

import importlib.resources
import math
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calibrate import Observations
from .integrators import Trajectory
from .model import ModelParams
from .schedules import (
    AlleeSchedule,
    Constant,
    LogSigmoid,
    Oscillatory,
    Sigmoid,
    Tabulated,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "TASK_KINDS",
    "load_observations",
    "load_fisheries",
    "fisheries_path",
    "write_trajectory",
    "read_trajectory",
    "write_convergence_rows",
    "write_extinction_table",
    "parse_float_list",
    "load_config",
    "config_from_pairs",
]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


@contextmanager
def _sink(path_or_file):
    if hasattr(path_or_file, "write"):
        yield path_or_file
    else:
        with open(path_or_file, "w") as fh:
            yield fh


class ConfigError(ValueError):
    """Configuration problem, message carries the offending field path."""


# -- observations ------------------------------------------------------------


def load_observations(path) -> Observations:
    """Parse a ``time,value`` CSV; a literal NA value marks an absent record."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise ConfigError(f"{path}: empty file")
    header = [c.strip() for c in lines[0].split(",")]
    if header != ["time", "value"]:
        raise ConfigError(f"{path}:1: expected header 'time,value', got {lines[0]!r}")
    records: list[tuple[float, float | None]] = []
    last_t = None
    for ln, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = [c.strip() for c in raw.split(",")]
        if len(parts) != 2:
            raise ConfigError(f"{path}:{ln}: expected 'time,value', got {raw!r}")
        try:
            t = float(parts[0])
        except ValueError:
            raise ConfigError(f"{path}:{ln}: bad time {parts[0]!r}") from None
        if last_t is not None and t <= last_t:
            kind = "duplicate" if t == last_t else "non-increasing"
            raise ConfigError(f"{path}:{ln}: {kind} time {parts[0]}")
        last_t = t
        if parts[1] == "NA":
            records.append((t, None))
            continue
        try:
            v = float(parts[1])
        except ValueError:
            raise ConfigError(f"{path}:{ln}: bad value {parts[1]!r}") from None
        records.append((t, v))
    if not records:
        raise ConfigError(f"{path}: no data rows")
    return Observations.from_records(records)


def fisheries_path() -> Path:
    """Path of the bundled inland-fisheries membership dataset."""
    return Path(importlib.resources.files("alleetip").joinpath("data/fisheries_jp.csv"))


def load_fisheries() -> Observations:
    return load_observations(fisheries_path())


# -- trajectory CSV ----------------------------------------------------------


def write_trajectory(traj: Trajectory, schedule: AlleeSchedule, path, stride: int = 1) -> None:
    """Write ``t,x,a`` rows for every stride-th grid point."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    idx = np.arange(0, len(traj.times), stride)
    a = np.asarray(schedule.value_at(traj.times[idx]), dtype=float)
    with _sink(path) as fh:
        fh.write("t,x,a\n")
        for t, x, av in zip(traj.times[idx], traj.states[idx], a):
            fh.write(f"{_fmt(t)},{_fmt(x)},{_fmt(av)}\n")


def read_trajectory(path):
    """Read back a trajectory CSV as (times, states, thresholds)."""
    data = np.genfromtxt(path, delimiter=",", skip_header=1, dtype=float)
    data = np.atleast_2d(data)
    return data[:, 0], data[:, 1], data[:, 2]


# -- study tables ------------------------------------------------------------


def write_convergence_rows(rows_by_scheme: dict, path) -> None:
    """Fixed column order: scheme,h,error,rate (rate empty on last rung)."""
    with _sink(path) as fh:
        fh.write("scheme,h,error,rate\n")
        for scheme in sorted(rows_by_scheme):
            for row in rows_by_scheme[scheme]:
                rate = "" if row.rate is None else _fmt(row.rate)
                fh.write(f"{scheme},{_fmt(row.h)},{_fmt(row.error)},{rate}\n")


def write_extinction_table(rows, path) -> None:
    with _sink(path) as fh:
        fh.write("x0,tau_euler,tau_cubature,difference\n")
        for row in rows:
            fh.write(
                f"{_fmt(row.x0)},{_fmt(row.tau_euler)},{_fmt(row.tau_cubature)},{_fmt(row.difference)}\n"
            )


# -- run configuration -------------------------------------------------------

_KEY_TYPES = {
    "model.r": float,
    "model.K": float,
    "model.x0": float,
    "schedule.kind": str,
    "schedule.a": float,
    "schedule.high": float,
    "schedule.low": float,
    "schedule.shift": float,
    "schedule.width": float,
    "schedule.direction": str,
    "schedule.amplitude": float,
    "schedule.base": float,
    "schedule.period": float,
    "schedule.knots": str,
    "numerics.scheme": str,
    "numerics.h": float,
    "numerics.horizon": float,
    "numerics.tol": float,
    "numerics.refine_tau": bool,
    "numerics.euler_sampling": str,
    "task.kind": str,
    "task.scenario": str,
    "task.x0_grid": str,
    "task.h_list": str,
    "task.t_end": float,
    "task.metric": str,
    "task.reference": str,
    "task.observations": str,
    "task.seed": int,
    "task.restarts": int,
    "task.max_evals": int,
    "task.polish_evals": int,
    "task.prescreen_h": float,
    "task.samples": int,
    "output.dir": str,
    "output.stride": int,
}

_POSITIVE_KEYS = {
    "model.r",
    "model.K",
    "numerics.h",
    "numerics.horizon",
    "numerics.tol",
    "schedule.a",
    "schedule.width",
    "schedule.period",
    "schedule.base",
    "task.t_end",
    "task.prescreen_h",
}

TASK_KINDS = ("simulate", "exact", "extinct", "converge", "tip-check", "fit", "predict", "tables")


def _convert(key: str, raw: str):
    typ = _KEY_TYPES[key]
    if typ is bool:
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(f"{key}: expected true/false, got {raw!r}")
    try:
        value = typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {typ.__name__}, got {raw!r}") from None
    if key in _POSITIVE_KEYS and not (value > 0):
        raise ConfigError(f"{key}: must be positive, got {raw}")
    if key == "model.x0" and value < 0:
        raise ConfigError(f"{key}: must be nonnegative, got {raw}")
    return value


@dataclass(frozen=True)
class RunConfig:
    """Validated flat configuration plus builders for the domain objects."""

    entries: dict

    def get(self, key: str, default=None):
        return self.entries.get(key, default)

    def require(self, key: str):
        if key not in self.entries:
            raise ConfigError(f"{key}: missing required key")
        return self.entries[key]

    def model(self) -> ModelParams:
        try:
            return ModelParams(
                r=self.require("model.r"),
                K=self.require("model.K"),
                x0=self.require("model.x0"),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"model: {exc}") from None

    def schedule(self) -> AlleeSchedule:
        kind = self.require("schedule.kind")
        try:
            if kind == "constant":
                return Constant(self.require("schedule.a"))
            if kind in ("sigmoid", "log-sigmoid"):
                cls = Sigmoid if kind == "sigmoid" else LogSigmoid
                return cls(
                    high=self.require("schedule.high"),
                    low=self.require("schedule.low"),
                    shift=self.require("schedule.shift"),
                    width=self.require("schedule.width"),
                    direction=self.require("schedule.direction"),
                )
            if kind == "oscillatory":
                return Oscillatory(
                    amplitude=self.require("schedule.amplitude"),
                    base=self.require("schedule.base"),
                    period=self.require("schedule.period"),
                )
            if kind == "tabulated":
                knots = _parse_knots(self.require("schedule.knots"))
                return Tabulated(tuple(t for t, _ in knots), tuple(v for _, v in knots))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"schedule: {exc}") from None
        raise ConfigError(f"schedule.kind: unknown kind {kind!r}")


def _parse_knots(raw: str) -> list[tuple[float, float]]:
    knots = []
    for part in raw.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            t_str, v_str = part.split(":")
            knots.append((float(t_str), float(v_str)))
        except ValueError:
            raise ConfigError(f"schedule.knots: bad knot {part!r}, expected 'time:value'") from None
    return knots


def parse_float_list(raw: str, key: str) -> list[float]:
    """Comma list '1e-2,1e-3' or range 'start:stop:step' (stop inclusive)."""
    raw = raw.strip()
    try:
        if ":" in raw:
            start_s, stop_s, step_s = raw.split(":")
            start, stop, step = float(start_s), float(stop_s), float(step_s)
            if step <= 0:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9))
            return [start + i * step for i in range(n + 1)]
        return [float(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"{key}: cannot parse list {raw!r}") from None


def config_from_pairs(pairs) -> RunConfig:
    entries = {}
    for key, raw in pairs:
        key = key.strip()
        if key not in _KEY_TYPES:
            raise ConfigError(f"unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{key}: duplicate key")
        entries[key] = _convert(key, raw.strip())
    if "task.kind" in entries and entries["task.kind"] not in TASK_KINDS:
        raise ConfigError(f"task.kind: unknown task {entries['task.kind']!r}")
    return RunConfig(entries)


def load_config(path) -> RunConfig:
    """Parse a ``section.key = value`` file; unknown keys are errors."""
    path = Path(path)
    pairs = []
    for ln, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        try:
            pairs.append((key.strip(), value.strip()))
        except ConfigError as exc:
            raise ConfigError(f"{path}:{ln}: {exc}") from None
    try:
        return config_from_pairs(pairs)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
