"""Network-deployment simulation.

Slot-stepped Monte Carlo over random base-station and user placements:
energy-harvesting stations serve who they can afford, grid-connected
stations top up from the mains, and the run reports the outage / grid-power
trade-off that deployment planning needs.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, UndefinedOutageError
from .geometry import (
    PointSet,
    RadioConfig,
    Region,
    associate_nearest,
    generate_ppp,
    required_power,
)
from .profiles import ConstantHarvester, HarvesterModel, TraceHarvester
from .randomness import (
    PURPOSE_GRID_MARKING,
    PURPOSE_HARVEST,
    PURPOSE_PHASE,
    PURPOSE_SCBS,
    PURPOSE_USERS,
    RandomStream,
)

UNBOUNDED = math.inf

_CONSERVATION_RTOL = 1e-9

# Reference economics: hardware cost per station (USD), grid tariff
# (USD per kWh), and deployment lifetime used to amortize energy spend.
DEFAULT_CAPEX_PER_SCBS = 135.0
DEFAULT_PRICE_PER_KWH = 0.1971
DEFAULT_LIFETIME_YEARS = 10.0
HOURS_PER_YEAR = 8760.0


@dataclass(frozen=True)
class BatteryState:
    """Stored energy with a capacity cap (math.inf = unbounded)."""

    capacity_j: float
    level_j: float = 0.0

    def __post_init__(self):
        if self.capacity_j < 0:
            raise ValueError("capacity_j must be non-negative")
        if not (0.0 <= self.level_j <= self.capacity_j):
            raise ValueError(
                f"level {self.level_j!r} outside [0, {self.capacity_j!r}]"
            )


@dataclass(frozen=True)
class ScbsNode:
    """One small-cell base station."""

    position: tuple[float, float]
    harvester: HarvesterModel
    battery: BatteryState
    grid_connected: bool = False
    circuit_power_w: float = 0.0

    def __post_init__(self):
        if self.circuit_power_w < 0:
            raise ValueError("circuit_power_w must be non-negative")


@dataclass(frozen=True)
class SlotResult:
    """Outcome of one station-slot, with full energy bookkeeping."""

    served: int
    unserved: int
    tx_energy_j: float
    circuit_energy_j: float
    grid_energy_j: float
    discarded_j: float
    battery: BatteryState


def step_slot(
    node: ScbsNode, demands_w, harvested_j: float, slot_s: float
) -> SlotResult:
    """Advance one station by one slot.

    demands_w lists the transmit power each associated user needs this slot;
    math.inf entries are infeasible links and count as unserved outright.
    Energy available is battery + fresh harvest.  Circuit power is paid
    first.  An off-grid station then serves the cheapest users it can afford
    (ties by user index); a grid station serves every feasible user and draws
    the shortfall from the grid.  Leftover charges the battery up to its
    capacity; overflow is discarded.

    The exact conservation identity
        harvested + battery_before + grid ==
            tx + circuit + battery_after + discarded
    is checked on every call and a violation raises RuntimeError.
    """
    if harvested_j < 0:
        raise ValueError("harvested_j must be non-negative")
    if not (slot_s > 0):
        raise ValueError("slot_s must be positive")
    demands = np.asarray(demands_w, dtype=float)
    if demands.ndim == 0:
        demands = demands.reshape(1)
    if np.any(demands < 0):
        raise ValueError("demands must be non-negative")

    battery_before = node.battery.level_j
    pool = battery_before + harvested_j
    circuit_need = node.circuit_power_w * slot_s
    finite = np.isfinite(demands)
    n_users = int(demands.size)
    n_infeasible = n_users - int(finite.sum())
    energies = demands[finite] * slot_s

    if node.grid_connected:
        tx_total = float(energies.sum())
        need = tx_total + circuit_need
        if need >= pool:
            grid = need - pool
            leftover = 0.0
        else:
            grid = 0.0
            leftover = pool - need
        served = int(finite.sum())
        circuit_used = circuit_need
    else:
        grid = 0.0
        if pool < circuit_need:
            # cannot even keep the electronics up: the slot is lost
            circuit_used = pool
            leftover = 0.0
            served = 0
            tx_total = 0.0
        else:
            circuit_used = circuit_need
            budget = pool - circuit_need
            order = np.sort(energies, kind="stable")
            cum = np.cumsum(order)
            served = int(np.searchsorted(cum, budget, side="right"))
            tx_total = float(cum[served - 1]) if served else 0.0
            leftover = budget - tx_total

    capacity = node.battery.capacity_j
    battery_after = min(capacity, leftover)
    discarded = leftover - battery_after

    lhs = harvested_j + battery_before + grid
    rhs = tx_total + circuit_used + battery_after + discarded
    if abs(lhs - rhs) > _CONSERVATION_RTOL * max(1.0, abs(lhs)):
        raise RuntimeError(
            f"energy conservation violated: in={lhs!r} out={rhs!r}"
        )

    return SlotResult(
        served=served,
        unserved=n_users - served,
        tx_energy_j=tx_total,
        circuit_energy_j=circuit_used,
        grid_energy_j=grid,
        discarded_j=discarded,
        battery=BatteryState(capacity_j=capacity, level_j=battery_after),
    )


@dataclass(frozen=True)
class DeploymentConfig:
    """Everything one Monte Carlo run needs.

    Stations follow a Poisson process of intensity scbs_density, users one of
    user_density; each station is grid-connected independently with
    probability on_grid_ratio and carries its own harvester and battery.
    randomize_trace_phase gives each station an independent random phase into
    a trace-driven harvester so arrival peaks are not synchronized.
    """

    scbs_density: float
    user_density: float
    region: Region
    radio: RadioConfig
    harvester: HarvesterModel = ConstantHarvester(0.020)
    battery_capacity_j: float = UNBOUNDED
    on_grid_ratio: float = 0.0
    circuit_power_w: float = 0.0
    slot_s: float = 1.0
    horizon_slots: int = 1
    warmup_slots: int = 0
    trials: int = 1
    seed: int = 0
    randomize_trace_phase: bool = False

    def __post_init__(self):
        if self.scbs_density < 0:
            raise ConfigError("scbs_density", "must be non-negative")
        if self.user_density < 0:
            raise ConfigError("user_density", "must be non-negative")
        if not (0.0 <= self.on_grid_ratio <= 1.0):
            raise ConfigError("on_grid_ratio", "must lie in [0, 1]")
        if self.battery_capacity_j < 0:
            raise ConfigError("battery_capacity_j", "must be non-negative")
        if self.circuit_power_w < 0:
            raise ConfigError("circuit_power_w", "must be non-negative")
        if not (self.slot_s > 0):
            raise ConfigError("slot_s", "must be positive")
        if self.horizon_slots < 1:
            raise ConfigError("horizon_slots", "must be at least 1")
        if self.warmup_slots < 0:
            raise ConfigError("warmup_slots", "must be non-negative")
        if self.trials < 1:
            raise ConfigError("trials", "must be at least 1")
        if self.randomize_trace_phase and not isinstance(
            self.harvester, TraceHarvester
        ):
            raise ConfigError(
                "randomize_trace_phase", "only meaningful for a trace harvester"
            )


@dataclass(frozen=True)
class TrialOutcome:
    scbs_count: int
    user_count: int
    user_slots: int
    unserved_user_slots: int
    grid_energy_j: float


@dataclass(frozen=True)
class SimulationResult:
    """Pooled statistics over all trials of one configuration."""

    outage_probability: float
    outage_ci: float
    grid_w_per_scbs: float
    grid_w_per_m2: float
    grid_ci: float
    user_slots: int
    trials: int
    scbs_count: int
    per_trial: tuple[TrialOutcome, ...] = field(repr=False, default=())


def _half_width(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    s = float(np.std(values, ddof=1))
    return 1.96 * s / math.sqrt(len(values))


def _node_harvesters(
    config: DeploymentConfig, n: int, trial_stream: RandomStream
) -> list[HarvesterModel]:
    base = config.harvester
    if config.randomize_trace_phase and isinstance(base, TraceHarvester) and n:
        cycle = len(base.trace)
        phases = trial_stream.generator(PURPOSE_PHASE).integers(0, cycle, size=n)
        return [base.with_phase(int(p)) for p in phases]
    return [base] * n


def run_trial(config: DeploymentConfig, trial: int) -> TrialOutcome:
    """One placement draw stepped through warmup + horizon slots."""
    stream = RandomStream(config.seed).child(trial)
    scbs_pts = generate_ppp(
        config.scbs_density, config.region, stream.generator(PURPOSE_SCBS)
    )
    user_pts = generate_ppp(
        config.user_density, config.region, stream.generator(PURPOSE_USERS)
    )
    n_scbs = len(scbs_pts)
    n_users = len(user_pts)
    horizon = config.horizon_slots

    if n_scbs == 0:
        # nothing deployed: every user-slot of the trial is an outage
        return TrialOutcome(
            scbs_count=0,
            user_count=n_users,
            user_slots=n_users * horizon,
            unserved_user_slots=n_users * horizon,
            grid_energy_j=0.0,
        )

    on_grid = (
        stream.generator(PURPOSE_GRID_MARKING).random(n_scbs) < config.on_grid_ratio
    )
    harvesters = _node_harvesters(config, n_scbs, stream)

    if n_users:
        assoc, dist = associate_nearest(user_pts, scbs_pts, config.region)
        powers = required_power(dist, config.radio)
    else:
        assoc = np.empty(0, dtype=int)
        powers = np.empty(0)
    cell_demands = [powers[assoc == m] for m in range(n_scbs)]

    nodes = [
        ScbsNode(
            position=(float(scbs_pts.xy[m, 0]), float(scbs_pts.xy[m, 1])),
            harvester=harvesters[m],
            battery=BatteryState(capacity_j=config.battery_capacity_j, level_j=0.0),
            grid_connected=bool(on_grid[m]),
            circuit_power_w=config.circuit_power_w,
        )
        for m in range(n_scbs)
    ]

    unserved = 0
    grid_energy = 0.0
    total_slots = config.warmup_slots + horizon
    for t in range(total_slots):
        counted = t >= config.warmup_slots
        for m in range(n_scbs):
            node = nodes[m]
            harvested = node.harvester.sample_energy_j(
                t, config.slot_s, stream.child(PURPOSE_HARVEST, m)
            )
            result = step_slot(node, cell_demands[m], harvested, config.slot_s)
            nodes[m] = replace(node, battery=result.battery)
            if counted:
                unserved += result.unserved
                grid_energy += result.grid_energy_j

    return TrialOutcome(
        scbs_count=n_scbs,
        user_count=n_users,
        user_slots=n_users * horizon,
        unserved_user_slots=unserved,
        grid_energy_j=grid_energy,
    )


def simulate(config: DeploymentConfig, threads: int = 1) -> SimulationResult:
    """Monte Carlo estimate of outage probability and grid-power draw.

    Outage pools unserved user-slots over all trials; grid power is reported
    both per station and per square meter.  Confidence half-widths (95%,
    normal approximation) come from the per-trial spread.
    """
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(
                pool.map(lambda i: run_trial(config, i), range(config.trials))
            )
    else:
        outcomes = [run_trial(config, i) for i in range(config.trials)]

    total_user_slots = sum(o.user_slots for o in outcomes)
    if total_user_slots == 0:
        raise UndefinedOutageError(
            "no user-slot was simulated; outage probability is undefined"
        )
    total_unserved = sum(o.unserved_user_slots for o in outcomes)
    outage = total_unserved / total_user_slots

    horizon_s = config.horizon_slots * config.slot_s
    total_grid = sum(o.grid_energy_j for o in outcomes)
    total_scbs = sum(o.scbs_count for o in outcomes)
    grid_per_scbs = total_grid / (horizon_s * total_scbs) if total_scbs else 0.0
    grid_per_m2 = total_grid / (horizon_s * config.region.area_m2 * len(outcomes))

    outage_samples = [
        o.unserved_user_slots / o.user_slots for o in outcomes if o.user_slots
    ]
    grid_samples = [
        o.grid_energy_j / (horizon_s * o.scbs_count)
        for o in outcomes
        if o.scbs_count
    ]
    return SimulationResult(
        outage_probability=outage,
        outage_ci=_half_width(outage_samples),
        grid_w_per_scbs=grid_per_scbs,
        grid_w_per_m2=grid_per_m2,
        grid_ci=_half_width(grid_samples),
        user_slots=total_user_slots,
        trials=config.trials,
        scbs_count=total_scbs,
        per_trial=tuple(outcomes),
    )


# ---------------------------------------------------------------------------
# Parameter sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    value: float
    outage_probability: float
    outage_ci: float
    grid_w_per_scbs: float
    grid_w_per_m2: float
    grid_ci: float
    trials: int
    user_slots: int


@dataclass(frozen=True)
class TradeoffCurve:
    parameter: str
    points: tuple[CurvePoint, ...]


def _apply_sweep_value(
    config: DeploymentConfig, parameter: str, value: float
) -> DeploymentConfig:
    if parameter == "scbs_density":
        return replace(config, scbs_density=value)
    if parameter == "user_density":
        return replace(config, user_density=value)
    if parameter == "on_grid_ratio":
        return replace(config, on_grid_ratio=value)
    if parameter == "battery_capacity_j":
        return replace(config, battery_capacity_j=value)
    if parameter == "eh_rate_w":
        return replace(
            config, harvester=config.harvester.with_rate(value, config.slot_s)
        )
    if parameter == "snr_target":
        return replace(
            config, radio=dataclasses.replace(config.radio, snr_target=value)
        )
    raise ConfigError("sweep.parameter", f"unknown sweep parameter {parameter!r}")


def sweep(
    config: DeploymentConfig,
    parameter: str,
    values,
    threads: int = 1,
) -> TradeoffCurve:
    """Simulate a sequence of values of one parameter.

    Values must be sorted ascending.  Each point reuses the same seed, so
    placements and arrivals are common random numbers across the sweep and
    point-to-point differences reflect the parameter alone.
    """
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep.values", "must be non-empty")
    if any(b < a for a, b in zip(values, values[1:])):
        raise ConfigError("sweep.values", "must be sorted ascending")
    points = []
    for v in values:
        res = simulate(_apply_sweep_value(config, parameter, v), threads=threads)
        points.append(
            CurvePoint(
                value=v,
                outage_probability=res.outage_probability,
                outage_ci=res.outage_ci,
                grid_w_per_scbs=res.grid_w_per_scbs,
                grid_w_per_m2=res.grid_w_per_m2,
                grid_ci=res.grid_ci,
                trials=res.trials,
                user_slots=res.user_slots,
            )
        )
    return TradeoffCurve(parameter=parameter, points=tuple(points))


# ---------------------------------------------------------------------------
# Deployment economics
# ---------------------------------------------------------------------------


def deployment_cost_per_m2(
    scbs_density: float,
    grid_w_per_scbs: float,
    *,
    capex_per_scbs: float = DEFAULT_CAPEX_PER_SCBS,
    price_per_kwh: float = DEFAULT_PRICE_PER_KWH,
    lifetime_years: float = DEFAULT_LIFETIME_YEARS,
) -> float:
    """Lifetime cost density (USD per square meter).

    Hardware scales with station density; energy cost is the average grid
    draw per station, integrated over the lifetime at the given tariff.
    """
    if scbs_density < 0 or grid_w_per_scbs < 0:
        raise ValueError("density and grid power must be non-negative")
    energy_kwh = grid_w_per_scbs * lifetime_years * HOURS_PER_YEAR / 1000.0
    return scbs_density * (capex_per_scbs + energy_kwh * price_per_kwh)


def optimal_density(
    curve: TradeoffCurve,
    *,
    capex_per_scbs: float = DEFAULT_CAPEX_PER_SCBS,
    price_per_kwh: float = DEFAULT_PRICE_PER_KWH,
    lifetime_years: float = DEFAULT_LIFETIME_YEARS,
) -> tuple[float, float]:
    """Density on a scbs_density curve minimizing lifetime cost.

    Ties go to the smaller density.  Returns (density, cost_per_m2).
    """
    if curve.parameter != "scbs_density":
        raise ValueError("optimal_density needs a scbs_density sweep")
    best = None
    for p in curve.points:
        cost = deployment_cost_per_m2(
            p.value,
            p.grid_w_per_scbs,
            capex_per_scbs=capex_per_scbs,
            price_per_kwh=price_per_kwh,
            lifetime_years=lifetime_years,
        )
        if best is None or cost < best[1]:
            best = (p.value, cost)
    return best
