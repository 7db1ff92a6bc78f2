"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

from .. import schedules
from ..model import ModelParams


class ConstantSpec(BaseModel):
    kind: Literal["constant"] = "constant"
    a: float

    def build(self):
        return schedules.Constant(self.a)


class SigmoidSpec(BaseModel):
    kind: Literal["sigmoid"] = "sigmoid"
    high: float
    low: float
    shift: float
    width: float
    direction: Literal["increasing", "decreasing"] = "increasing"

    def build(self):
        return schedules.Sigmoid(self.high, self.low, self.shift, self.width, self.direction)


class LogSigmoidSpec(BaseModel):
    kind: Literal["log-sigmoid"] = "log-sigmoid"
    high: float
    low: float
    shift: float
    width: float
    direction: Literal["increasing", "decreasing"] = "increasing"

    def build(self):
        return schedules.LogSigmoid(self.high, self.low, self.shift, self.width, self.direction)


class OscillatorySpec(BaseModel):
    kind: Literal["oscillatory"] = "oscillatory"
    amplitude: float
    base: float
    period: float

    def build(self):
        return schedules.Oscillatory(self.amplitude, self.base, self.period)


class TabulatedSpec(BaseModel):
    kind: Literal["tabulated"] = "tabulated"
    times: list[float]
    values: list[float]
    clamp: bool = True

    def build(self):
        return schedules.Tabulated(tuple(self.times), tuple(self.values), self.clamp)


ScheduleSpec = Union[ConstantSpec, SigmoidSpec, LogSigmoidSpec, OscillatorySpec, TabulatedSpec]


class ModelSpec(BaseModel):
    r: float
    K: float
    x0: float

    def build(self) -> ModelParams:
        return ModelParams(r=self.r, K=self.K, x0=self.x0)


class SimulateRequest(BaseModel):
    model: ModelSpec
    schedule: ScheduleSpec = Field(discriminator="kind")
    scheme: Literal["euler", "cubature", "nominal-euler"] = "cubature"
    h: float
    horizon: float
    stride: int = 1


class TrajectoryResponse(BaseModel):
    times: list[float]
    states: list[float]
    thresholds: list[float]
    extinction_time: Optional[float]
    scheme: str


class ExactStatesRequest(BaseModel):
    model: ModelSpec
    schedule: ScheduleSpec = Field(discriminator="kind")
    times: list[float]
    tol: float = 1e-8


class ExactStatesResponse(BaseModel):
    times: list[float]
    states: list[float]


class ExtinctionRequest(BaseModel):
    model: ModelSpec
    schedule: ScheduleSpec = Field(discriminator="kind")
    horizon: float = 100.0
    tol: float = 1e-8
    h: Optional[float] = None
    scheme: Literal["euler", "cubature"] = "cubature"


class ExtinctionResponse(BaseModel):
    tau_exact: Optional[float]  # None encodes no extinction within the horizon
    method: str
    i0: Optional[float]
    l_horizon: float
    tau_numeric: Optional[float] = None


class TipCheckRequest(BaseModel):
    model: ModelSpec
    schedule: ScheduleSpec = Field(discriminator="kind")
    h: float
    horizon: float = 10.0


class CrossingModel(BaseModel):
    time: float
    direction: Literal["downward", "upward"]


class TipCheckResponse(BaseModel):
    outcome: str
    tau: Optional[float]
    r_tipped: bool
    threshold_satisfied: bool
    threshold_margin: float
    crossings: list[CrossingModel]


class ExtinctionTableRequest(BaseModel):
    scenario: str
    h: float
    x0_grid: Optional[list[float]] = None


class ExtinctionTableRow(BaseModel):
    x0: float
    tau_euler: Optional[float]
    tau_cubature: Optional[float]
    difference: Optional[float]


class ObservationRecord(BaseModel):
    time: float
    value: Optional[float] = None


class FitRequest(BaseModel):
    observations: Optional[list[ObservationRecord]] = None  # default: bundled dataset
    restarts: int = 16
    h: float = 1e-3
    prescreen_h: float = 0.05
    max_evals: int = 1500
    polish_evals: int = 2500
    seed: int = 0
    predict_horizon: Optional[float] = None  # absolute time units


class FitResponse(BaseModel):
    x0: float
    r: float
    K: float
    a_high: float
    a_low: float
    width: float
    shift: float
    time_origin: float
    objective: float
    evaluations: int
    converged: bool
    max_rel_diff: float
    crossing_times: list[float] = []
    extinction_time: Optional[float] = None


class ScenarioInfo(BaseModel):
    name: str
    description: str
    table_x0: list[float]
    horizon: float


class HealthResponse(BaseModel):
    status: str
    version: str
