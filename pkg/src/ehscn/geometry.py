"""Spatial model: random deployments, association, link power.

Square region, optionally wrapped into a torus so nearest-distance
statistics stay edge-free.  Links use unbounded power-law path loss with a
near-field floor distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoCoverageError

TORUS = "torus"
BOUNDED = "bounded"


@dataclass(frozen=True)
class Region:
    """Square [0, side_m)^2, either torus-wrapped or hard-edged."""

    side_m: float
    topology: str = TORUS

    def __post_init__(self):
        if not (self.side_m > 0):
            raise ValueError("side_m must be positive")
        if self.topology not in (TORUS, BOUNDED):
            raise ValueError(f"topology must be {TORUS!r} or {BOUNDED!r}")

    @property
    def area_m2(self) -> float:
        return self.side_m * self.side_m


@dataclass(frozen=True, eq=False)
class PointSet:
    """Planar points inside a region, shape (n, 2)."""

    xy: np.ndarray = field(repr=False)

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=float)
        if xy.size == 0:
            xy = xy.reshape(0, 2)
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        xy.setflags(write=False)
        object.__setattr__(self, "xy", xy)

    def __len__(self) -> int:
        return int(self.xy.shape[0])

    @classmethod
    def empty(cls) -> "PointSet":
        return cls(np.empty((0, 2)))


@dataclass(frozen=True)
class RadioConfig:
    """Link-budget parameters.

    snr_target is linear (not dB); path loss is distance**exponent with
    distances floored at min_distance_m; max_power_w of None means the
    transmitter is unconstrained.
    """

    snr_target: float
    path_loss_exponent: float = 4.0
    noise_w: float = 1e-13
    min_distance_m: float = 1.0
    max_power_w: float | None = None

    def __post_init__(self):
        if not (self.snr_target > 0):
            raise ValueError("snr_target must be positive")
        if not (self.path_loss_exponent > 2):
            raise ValueError("path_loss_exponent must exceed 2")
        if not (self.noise_w > 0):
            raise ValueError("noise_w must be positive")
        if not (self.min_distance_m > 0):
            raise ValueError("min_distance_m must be positive")
        if self.max_power_w is not None and not (self.max_power_w > 0):
            raise ValueError("max_power_w must be positive when set")

    @property
    def snr_target_db(self) -> float:
        return 10.0 * math.log10(self.snr_target)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(linear: float) -> float:
    return 10.0 * math.log10(linear)


def generate_ppp(density: float, region: Region, rng: np.random.Generator) -> PointSet:
    """Homogeneous Poisson point process: Poisson count, uniform positions."""
    if density < 0:
        raise ValueError("density must be non-negative")
    n = int(rng.poisson(density * region.area_m2))
    xy = rng.uniform(0.0, region.side_m, size=(n, 2))
    return PointSet(xy)


def pairwise_distances(a: PointSet, b: PointSet, region: Region) -> np.ndarray:
    """Distance matrix of shape (len(a), len(b)) under the region metric."""
    diff = np.abs(a.xy[:, None, :] - b.xy[None, :, :])
    if region.topology == TORUS:
        diff = np.minimum(diff, region.side_m - diff)
    return np.sqrt((diff * diff).sum(axis=2))


def associate_nearest(
    users: PointSet, scbs: PointSet, region: Region
) -> tuple[np.ndarray, np.ndarray]:
    """Assign each user to its nearest base station.

    Returns (indices, distances), one entry per user.  Distance ties resolve
    to the lowest station index.  Raises NoCoverageError when users exist but
    no station does.
    """
    if len(users) == 0:
        return np.empty(0, dtype=int), np.empty(0)
    if len(scbs) == 0:
        raise NoCoverageError(f"{len(users)} users but no base station")
    d = pairwise_distances(users, scbs, region)
    idx = np.argmin(d, axis=1)  # argmin returns the first (lowest) index on ties
    return idx, d[np.arange(len(users)), idx]


def required_power(distance_m, radio: RadioConfig):
    """Transmit power (W) that delivers snr_target over the given distance.

    power = snr_target * noise * max(distance, min_distance)**exponent.
    Links whose requirement exceeds max_power_w come back as math.inf, the
    infeasible-link marker.  Accepts scalars or arrays.
    """
    d = np.maximum(np.asarray(distance_m, dtype=float), radio.min_distance_m)
    p = radio.snr_target * radio.noise_w * d**radio.path_loss_exponent
    if radio.max_power_w is not None:
        p = np.where(p > radio.max_power_w, math.inf, p)
    if np.ndim(distance_m) == 0:
        return float(p)
    return p


def channel_gain(distance_m, radio: RadioConfig):
    """Path gain max(d, d_min)**(-exponent); received = power * gain."""
    d = np.maximum(np.asarray(distance_m, dtype=float), radio.min_distance_m)
    g = d ** (-radio.path_loss_exponent)
    if np.ndim(distance_m) == 0:
        return float(g)
    return g
