"""Request and response models for the HTTP service.

JSON has no infinity, so unbounded battery capacities travel as null and
are mapped to math.inf at the core boundary.
"""

from __future__ import annotations

import math
from typing import Optional

from pydantic import BaseModel, Field

from .. import __version__
from ..deployment import DeploymentConfig
from ..errors import ConfigError
from ..geometry import RadioConfig, Region, db_to_linear
from ..operation import Scenario, StationSpec
from ..profiles import (
    BernoulliHarvester,
    ConstantHarvester,
    HarvesterModel,
    TraceHarvester,
    load_trace,
)


class RadioIn(BaseModel):
    snr_target_db: Optional[float] = None
    snr_target: Optional[float] = None  # linear; takes precedence when set
    path_loss_exponent: float = 4.0
    noise_w: float = 1e-13
    min_distance_m: float = 1.0
    max_power_w: Optional[float] = None

    def to_core(self) -> RadioConfig:
        if self.snr_target is not None:
            target = self.snr_target
        elif self.snr_target_db is not None:
            target = db_to_linear(self.snr_target_db)
        else:
            target = db_to_linear(10.0)
        try:
            return RadioConfig(
                snr_target=target,
                path_loss_exponent=self.path_loss_exponent,
                noise_w=self.noise_w,
                min_distance_m=self.min_distance_m,
                max_power_w=self.max_power_w,
            )
        except ValueError as exc:
            raise ConfigError("radio", str(exc)) from exc


class RegionIn(BaseModel):
    side_m: float
    topology: str = "torus"

    def to_core(self) -> Region:
        try:
            return Region(side_m=self.side_m, topology=self.topology)
        except ValueError as exc:
            raise ConfigError("region", str(exc)) from exc


class HarvestIn(BaseModel):
    model: str = "constant"  # constant | bernoulli | trace
    eh_rate_w: float = 0.020
    arrival_probability: Optional[float] = None
    quantum_j: Optional[float] = None
    trace_text: Optional[str] = None
    timestamp_column: int = 0
    value_column: int = 1
    header: bool = False
    scale: Optional[float] = None  # None: scale trace so its mean is eh_rate_w
    phase_slots: int = 0
    randomize_phase: bool = False
    battery_capacity_j: Optional[float] = None  # null = unbounded

    def to_harvester(self, slot_s: float) -> HarvesterModel:
        try:
            if self.model == "constant":
                return ConstantHarvester(self.eh_rate_w)
            if self.model == "bernoulli":
                if self.arrival_probability is None or self.quantum_j is None:
                    raise ConfigError(
                        "harvest.arrival_probability",
                        "bernoulli harvest needs arrival_probability and quantum_j",
                    )
                return BernoulliHarvester(self.arrival_probability, self.quantum_j)
            if self.model == "trace":
                if self.trace_text is None:
                    raise ConfigError(
                        "harvest.trace_text", "trace harvest needs trace data"
                    )
                trace, _ = load_trace(
                    self.trace_text,
                    timestamp_column=self.timestamp_column,
                    value_column=self.value_column,
                    header=self.header,
                )
                h = TraceHarvester(trace, scale=1.0, phase_slots=self.phase_slots)
                if self.scale is not None:
                    return TraceHarvester(
                        trace, scale=self.scale, phase_slots=self.phase_slots
                    )
                return h.with_rate(self.eh_rate_w, slot_s)
        except ValueError as exc:
            raise ConfigError("harvest", str(exc)) from exc
        raise ConfigError("harvest.model", f"unknown harvest model {self.model!r}")

    def capacity(self) -> float:
        return math.inf if self.battery_capacity_j is None else self.battery_capacity_j


class DeploymentIn(BaseModel):
    scbs_density: float
    user_density: float
    on_grid_ratio: float = 0.0
    circuit_power_w: float = 0.0
    slot_s: float = 1.0
    horizon_slots: int = 1
    warmup_slots: int = 0
    trials: int = 1
    seed: int = 0
    threads: int = 1


class SweepIn(BaseModel):
    parameter: str
    values: list[float]


class DeployRequest(BaseModel):
    region: RegionIn
    radio: RadioIn = Field(default_factory=RadioIn)
    harvest: HarvestIn = Field(default_factory=HarvestIn)
    deployment: DeploymentIn
    sweep: Optional[SweepIn] = None

    def to_config(self) -> DeploymentConfig:
        d = self.deployment
        return DeploymentConfig(
            scbs_density=d.scbs_density,
            user_density=d.user_density,
            region=self.region.to_core(),
            radio=self.radio.to_core(),
            harvester=self.harvest.to_harvester(d.slot_s),
            battery_capacity_j=self.harvest.capacity(),
            on_grid_ratio=d.on_grid_ratio,
            circuit_power_w=d.circuit_power_w,
            slot_s=d.slot_s,
            horizon_slots=d.horizon_slots,
            warmup_slots=d.warmup_slots,
            trials=d.trials,
            seed=d.seed,
            randomize_trace_phase=self.harvest.randomize_phase,
        )


class CurvePointOut(BaseModel):
    value: float
    outage_probability: float
    outage_ci: float
    grid_w_per_scbs: float
    grid_w_per_m2: float
    grid_ci: float
    trials: int
    user_slots: int


class EconomicsOut(BaseModel):
    value: float
    cost_per_m2: float


class DeployResponse(BaseModel):
    parameter: Optional[str]
    points: list[CurvePointOut]
    economics: Optional[list[EconomicsOut]] = None
    optimal_density: Optional[float] = None
    optimal_cost_per_m2: Optional[float] = None
    resolved_config: dict
    version: str = __version__


class StationIn(BaseModel):
    position: tuple[float, float]
    eh_rate_w: float = 0.0
    battery_capacity_j: Optional[float] = None  # null = unbounded
    initial_battery_j: float = 0.0
    grid_connected: bool = False

    def to_core(self) -> StationSpec:
        cap = math.inf if self.battery_capacity_j is None else self.battery_capacity_j
        try:
            return StationSpec(
                position=self.position,
                eh_rate_w=self.eh_rate_w,
                battery_capacity_j=cap,
                initial_battery_j=self.initial_battery_j,
                grid_connected=self.grid_connected,
            )
        except ValueError as exc:
            raise ConfigError("stations", str(exc)) from exc


class ScenarioIn(BaseModel):
    stations: list[StationIn]
    users: list[tuple[float, float]]
    radio: RadioIn = Field(default_factory=RadioIn)
    horizon_slots: int
    slot_s: float = 1.0

    def to_core(self) -> Scenario:
        try:
            return Scenario(
                stations=tuple(s.to_core() for s in self.stations),
                users=tuple(self.users),
                radio=self.radio.to_core(),
                horizon_slots=self.horizon_slots,
                slot_s=self.slot_s,
            )
        except ValueError as exc:
            raise ConfigError("scenario", str(exc)) from exc


class OperateRequest(BaseModel):
    scenario: ScenarioIn
    solvers: Optional[list[str]] = None  # default: every applicable solver
    tolerance: float = 1e-3
    include_oracles: bool = False


class ScheduleOut(BaseModel):
    serving: list[list[int]]
    power_w: list[list[float]]


class ReportOut(BaseModel):
    solver: str
    objective: float
    iterations: int = 0
    interval_width: float = 0.0
    grid_energy_j: Optional[float] = None
    switch_slot: Optional[int] = None
    notes: str = ""
    schedule: Optional[ScheduleOut] = None


class OperateResponse(BaseModel):
    reports: list[ReportOut]
    resolved_config: dict
    version: str = __version__


class TraceIn(BaseModel):
    name: str
    text: str
    timestamp_column: int = 0
    value_column: int = 1
    header: bool = False


class ProfileRequest(BaseModel):
    traces: list[TraceIn]
    window_s: Optional[float] = None
    normalize: bool = False


class SeriesOut(BaseModel):
    name: str
    start_time: str
    resolution_s: float
    samples: list[float]
    clamped_count: int


class ProfileResponse(BaseModel):
    series: list[SeriesOut]
    complementarity: Optional[float] = None
    version: str = __version__


class HealthOut(BaseModel):
    status: str = "ok"
    version: str = __version__
