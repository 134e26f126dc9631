"""Reference data for ambient energy-harvesting technologies.

Typical output levels reported for small collectors, useful as starting
points when sizing a constant-rate harvester for a station.
"""

from __future__ import annotations

from dataclasses import dataclass

from .profiles import ConstantHarvester


@dataclass(frozen=True)
class HarvestTechnology:
    name: str
    typical_power_w: float
    per: str  # what the figure is normalized to
    collector: str


CATALOG: dict[str, HarvestTechnology] = {
    t.name: t
    for t in (
        HarvestTechnology("solar", 0.015, "cm^2 in bright sun", "photovoltaic cell"),
        HarvestTechnology("wind", 85.0, "1 m rotor at 8 m/s", "small turbine"),
        HarvestTechnology("vibration", 0.0002, "cm^2", "electromagnetic inductor"),
        HarvestTechnology("finger_motion", 0.0021, "device", "piezoelectric element"),
        HarvestTechnology("footfalls", 5.0, "walking person", "piezoelectric floor"),
        HarvestTechnology("body_heat", 0.040, "wearable patch", "thermopile"),
        HarvestTechnology("ambient_rf", 0.0002, "antenna", "rectifying antenna"),
        HarvestTechnology("biomass", 0.153, "m^2", "microbial fuel cell"),
    )
}


def constant_harvester(technology: str, collectors: float = 1.0) -> ConstantHarvester:
    """Constant-rate harvester sized as `collectors` units of a technology."""
    if technology not in CATALOG:
        raise KeyError(
            f"unknown technology {technology!r}; choices: {sorted(CATALOG)}"
        )
    if collectors <= 0:
        raise ValueError("collectors must be positive")
    return ConstantHarvester(CATALOG[technology].typical_power_w * collectors)
