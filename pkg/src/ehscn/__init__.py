"""Energy-harvesting small-cell network toolkit.

Simulates random deployments of harvesting base stations against user
demand, and optimizes transmission schedules for fixed micro-deployments.
"""

__version__ = "0.1.0"

from .deployment import (
    BatteryState,
    CurvePoint,
    DeploymentConfig,
    ScbsNode,
    SimulationResult,
    SlotResult,
    TradeoffCurve,
    TrialOutcome,
    UNBOUNDED,
    deployment_cost_per_m2,
    optimal_density,
    run_trial,
    simulate,
    step_slot,
    sweep,
)
from .errors import (
    AlignmentError,
    ConfigError,
    DegenerateTraceError,
    EhscnError,
    InstanceTooLargeError,
    InsufficientDataError,
    InvalidScheduleError,
    NoCoverageError,
    TraceOrderingError,
    TraceParseError,
    UndefinedOutageError,
)
from .geometry import (
    BOUNDED,
    TORUS,
    PointSet,
    RadioConfig,
    Region,
    associate_nearest,
    channel_gain,
    db_to_linear,
    generate_ppp,
    linear_to_db,
    pairwise_distances,
    required_power,
)
from .operation import (
    Scenario,
    Schedule,
    SolveReport,
    StationSpec,
    baseline_distance,
    baseline_snr_greedy,
    distributed_bf_bound,
    evaluate_min_avg_snr,
    feasibility,
    greedy_transmit,
    grid_energy_of,
    grid_optimality_oracle,
    maxmin_bisection,
    maxmin_enumeration,
    save_transmit,
    solve_all,
    validate_schedule,
)
from .profiles import (
    BernoulliHarvester,
    ConstantHarvester,
    EnergyTrace,
    HarvesterModel,
    TraceHarvester,
    complementarity,
    load_trace,
    normalize_peak,
    resample_average,
    sample_energy,
)
from .randomness import RandomStream

__all__ = [name for name in dir() if not name.startswith("_")]
