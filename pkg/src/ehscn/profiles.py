"""Harvested-energy profiles.

Time series of ambient power (solar irradiance, wind, ...) and the harvester
models that turn them into per-slot energy arrivals for the simulators.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import IO, Union

import numpy as np

from .errors import (
    AlignmentError,
    DegenerateTraceError,
    InsufficientDataError,
    TraceOrderingError,
    TraceParseError,
)
from .randomness import RandomStream

_REL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class EnergyTrace:
    """Uniformly sampled ambient power series.

    samples are average power in watts over each interval of
    ``resolution_s`` seconds starting at ``start_time``.
    """

    start_time: datetime
    resolution_s: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("trace needs a non-empty 1-d sample array")
        if not (self.resolution_s > 0):
            raise ValueError("resolution_s must be positive")
        if np.any(samples < 0) or not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite and non-negative")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)

    def duration_s(self) -> float:
        return self.resolution_s * len(self)

    def mean_power_w(self) -> float:
        return float(self.samples.mean())


def _parse_timestamp(text: str, line_number: int) -> datetime:
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        return datetime.fromisoformat(raw)
    except ValueError as exc:
        raise TraceParseError(line_number, f"bad timestamp {text.strip()!r}") from exc


def load_trace(
    source: Union[str, IO[str]],
    *,
    timestamp_column: int = 0,
    value_column: int = 1,
    delimiter: str = ",",
    header: bool = False,
) -> tuple[EnergyTrace, int]:
    """Parse a timestamped power series into a uniform EnergyTrace.

    Accepts raw text or a text stream with one ``timestamp,value`` record per
    line.  Lines starting with ``#`` and blank lines are skipped; ``header``
    skips the first remaining line (column-name row).  The base resolution is
    the smallest gap between consecutive records; larger gaps must be integer
    multiples of it and are filled by linear interpolation.  Negative power
    readings are clamped to zero.

    Returns (trace, clamped_count) where clamped_count is the number of
    records whose value was below zero.
    """
    if isinstance(source, str):
        stream: IO[str] = io.StringIO(source)
    else:
        stream = source

    times: list[datetime] = []
    values: list[float] = []
    clamped = 0
    header_pending = header
    max_col = max(timestamp_column, value_column)
    for line_number, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if header_pending:
            header_pending = False
            continue
        cells = stripped.split(delimiter)
        if len(cells) <= max_col:
            raise TraceParseError(
                line_number, f"expected at least {max_col + 1} columns, got {len(cells)}"
            )
        ts = _parse_timestamp(cells[timestamp_column], line_number)
        try:
            value = float(cells[value_column])
        except ValueError as exc:
            raise TraceParseError(
                line_number, f"bad value {cells[value_column].strip()!r}"
            ) from exc
        if math.isnan(value) or math.isinf(value):
            raise TraceParseError(line_number, f"non-finite value {value!r}")
        if value < 0:
            value = 0.0
            clamped += 1
        if times and ts <= times[-1]:
            raise TraceOrderingError(
                f"timestamp at line {line_number} does not increase "
                f"({ts.isoformat()} after {times[-1].isoformat()})"
            )
        times.append(ts)
        values.append(value)

    if len(times) < 2:
        raise InsufficientDataError(
            f"need at least 2 records to infer a resolution, got {len(times)}"
        )

    offsets = np.array([(t - times[0]).total_seconds() for t in times])
    diffs = np.diff(offsets)
    resolution = float(diffs.min())
    steps = diffs / resolution
    rounded = np.rint(steps)
    if np.any(np.abs(steps - rounded) > _REL_TOL * np.maximum(1.0, steps)):
        bad = int(np.argmax(np.abs(steps - rounded)))
        raise AlignmentError(
            f"gap of {diffs[bad]:g} s is not an integer multiple of the "
            f"base resolution {resolution:g} s"
        )

    n_slots = int(round(offsets[-1] / resolution)) + 1
    grid = np.arange(n_slots) * resolution
    samples = np.interp(grid, offsets, np.asarray(values))
    trace = EnergyTrace(start_time=times[0], resolution_s=resolution, samples=samples)
    return trace, clamped


def resample_average(trace: EnergyTrace, window_s: float) -> EnergyTrace:
    """Downsample by averaging fixed windows.

    window_s must be a positive integer multiple of the trace resolution.
    A trailing partial window is averaged over the samples it actually
    covers, so total energy is preserved whenever the window divides the
    trace length.
    """
    if not (window_s > 0):
        raise AlignmentError("window_s must be positive")
    ratio = window_s / trace.resolution_s
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > _REL_TOL * max(1.0, ratio):
        raise AlignmentError(
            f"window {window_s:g} s is not an integer multiple of the "
            f"resolution {trace.resolution_s:g} s"
        )
    n = len(trace)
    out = [float(trace.samples[i : i + k].mean()) for i in range(0, n, k)]
    return EnergyTrace(
        start_time=trace.start_time, resolution_s=window_s, samples=np.array(out)
    )


def normalize_peak(trace: EnergyTrace) -> EnergyTrace:
    """Scale so the maximum sample equals 1. Idempotent."""
    peak = float(trace.samples.max())
    if peak <= 0:
        raise DegenerateTraceError("all-zero trace has no peak to normalize by")
    return EnergyTrace(
        start_time=trace.start_time,
        resolution_s=trace.resolution_s,
        samples=trace.samples / peak,
    )


def complementarity(a: EnergyTrace, b: EnergyTrace) -> float:
    """Pearson correlation between two aligned traces, in [-1, 1].

    Negative values mean the sources peak at different times and so
    complement each other in a hybrid deployment.
    """
    if len(a) != len(b):
        raise AlignmentError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise AlignmentError("need at least 2 samples")
    if abs(a.resolution_s - b.resolution_s) > _REL_TOL * max(
        a.resolution_s, b.resolution_s
    ):
        raise AlignmentError(
            f"resolution mismatch: {a.resolution_s:g} s vs {b.resolution_s:g} s"
        )
    xs = a.samples - a.samples.mean()
    ys = b.samples - b.samples.mean()
    sx = float(np.sqrt((xs * xs).sum()))
    sy = float(np.sqrt((ys * ys).sum()))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateTraceError("constant trace has undefined correlation")
    r = float((xs * ys).sum() / (sx * sy))
    return max(-1.0, min(1.0, r))


# ---------------------------------------------------------------------------
# Harvester models
# ---------------------------------------------------------------------------


class HarvesterModel:
    """Per-slot energy arrival process at one base station."""

    def sample_energy_j(
        self, slot_index: int, slot_s: float, stream: RandomStream
    ) -> float:
        raise NotImplementedError

    def expected_energy_j(self, slot_s: float) -> float:
        raise NotImplementedError

    def with_rate(self, rate_w: float, slot_s: float = 1.0) -> "HarvesterModel":
        """Same shape, rescaled so the expected harvest rate is rate_w."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantHarvester(HarvesterModel):
    """Deterministic arrivals: rate_w * slot_s joules every slot."""

    rate_w: float

    def __post_init__(self):
        if self.rate_w < 0:
            raise ValueError("rate_w must be non-negative")

    def sample_energy_j(self, slot_index, slot_s, stream) -> float:
        return self.rate_w * slot_s

    def expected_energy_j(self, slot_s: float) -> float:
        return self.rate_w * slot_s

    def with_rate(self, rate_w: float, slot_s: float = 1.0) -> "ConstantHarvester":
        return ConstantHarvester(rate_w)


@dataclass(frozen=True)
class TraceHarvester(HarvesterModel):
    """Arrivals follow a recorded trace, cyclically, scaled.

    Slot t draws scale * trace.samples[(t + phase_slots) % len] * slot_s
    joules, so the trace wraps around for horizons longer than itself.
    """

    trace: EnergyTrace
    scale: float = 1.0
    phase_slots: int = 0

    def __post_init__(self):
        if not (self.scale > 0):
            raise ValueError("scale must be positive")

    def sample_energy_j(self, slot_index, slot_s, stream) -> float:
        i = (int(slot_index) + self.phase_slots) % len(self.trace)
        return self.scale * float(self.trace.samples[i]) * slot_s

    def expected_energy_j(self, slot_s: float) -> float:
        # expectation over a uniformly random slot of one full cycle
        return self.scale * self.trace.mean_power_w() * slot_s

    def with_rate(self, rate_w: float, slot_s: float = 1.0) -> "TraceHarvester":
        mean = self.trace.mean_power_w()
        if mean <= 0:
            raise DegenerateTraceError("all-zero trace cannot be rate-scaled")
        return TraceHarvester(self.trace, scale=rate_w / mean, phase_slots=self.phase_slots)

    def with_phase(self, phase_slots: int) -> "TraceHarvester":
        return TraceHarvester(self.trace, scale=self.scale, phase_slots=phase_slots)


@dataclass(frozen=True)
class BernoulliHarvester(HarvesterModel):
    """Packetized arrivals: quantum_j joules with probability p per slot."""

    arrival_probability: float
    quantum_j: float

    def __post_init__(self):
        if not (0.0 <= self.arrival_probability <= 1.0):
            raise ValueError("arrival_probability must lie in [0, 1]")
        if self.quantum_j < 0:
            raise ValueError("quantum_j must be non-negative")

    def sample_energy_j(self, slot_index, slot_s, stream) -> float:
        if stream.uniform(int(slot_index)) < self.arrival_probability:
            return self.quantum_j
        return 0.0

    def expected_energy_j(self, slot_s: float) -> float:
        return self.arrival_probability * self.quantum_j

    def with_rate(self, rate_w: float, slot_s: float = 1.0) -> "BernoulliHarvester":
        # keep p, move the quantum so that p * quantum = rate * slot
        if self.arrival_probability <= 0:
            raise ValueError("cannot rate-scale arrivals with zero probability")
        return BernoulliHarvester(
            self.arrival_probability, rate_w * slot_s / self.arrival_probability
        )


def sample_energy(
    model: HarvesterModel, slot_index: int, slot_s: float, stream: RandomStream
) -> float:
    """Energy harvested in one slot, deterministic in (model, slot, stream)."""
    return model.sample_energy_j(slot_index, slot_s, stream)
