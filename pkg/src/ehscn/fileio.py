"""File formats: TOML inputs, CSV outputs, JSON run manifests.

All numeric CSV output goes through one 12-significant-digit formatter so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError

CURVE_HEADER = "param,value,p_out,p_out_ci,P_G_per_scbs,P_G_per_m2,P_G_ci,trials,user_slots"
SCHEDULE_HEADER = "slot,user,scbs,power_watts"
POINTS_HEADER = "kind,x,y"
ECONOMICS_HEADER = "param,value,cost_per_m2"


def fmt(x) -> str:
    """Canonical text for one CSV cell: 12 significant digits for floats."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".12g")
    return str(x)


def curve_csv(parameter: str, points: list[dict]) -> str:
    lines = [CURVE_HEADER]
    for p in points:
        lines.append(
            ",".join(
                [
                    parameter,
                    fmt(float(p["value"])),
                    fmt(float(p["outage_probability"])),
                    fmt(float(p["outage_ci"])),
                    fmt(float(p["grid_w_per_scbs"])),
                    fmt(float(p["grid_w_per_m2"])),
                    fmt(float(p["grid_ci"])),
                    fmt(int(p["trials"])),
                    fmt(int(p["user_slots"])),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def schedule_csv(serving: list[list[int]], power_w: list[list[float]]) -> str:
    lines = [SCHEDULE_HEADER]
    for t, (srow, prow) in enumerate(zip(serving, power_w)):
        for k, (m, p) in enumerate(zip(srow, prow)):
            lines.append(f"{t},{k},{int(m)},{fmt(float(p))}")
    return "\n".join(lines) + "\n"


def points_csv(entries: list[tuple[str, float, float]]) -> str:
    lines = [POINTS_HEADER]
    for kind, x, y in entries:
        lines.append(f"{kind},{fmt(float(x))},{fmt(float(y))}")
    return "\n".join(lines) + "\n"


def economics_csv(parameter: str, rows: list[tuple[float, float]]) -> str:
    lines = [ECONOMICS_HEADER]
    for value, cost in rows:
        lines.append(f"{parameter},{fmt(float(value))},{fmt(float(cost))}")
    return "\n".join(lines) + "\n"


def trace_csv(start_time: str, resolution_s: float, samples: list[float]) -> str:
    lines = ["slot,power_watts"]
    for i, s in enumerate(samples):
        lines.append(f"{i},{fmt(float(s))}")
    header = f"# start_time={start_time} resolution_s={fmt(resolution_s)}\n"
    return header + "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# TOML input documents
# ---------------------------------------------------------------------------


def read_toml(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(str(path), "file not found")
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"TOML parse error: {exc}") from exc


def _get(doc: dict, section: str, key: str, default=None, required: bool = False):
    sec = doc.get(section)
    if sec is None:
        if required:
            raise ConfigError(section, "missing section")
        sec = {}
    if key in sec:
        return sec[key]
    if required:
        raise ConfigError(f"{section}.{key}", "missing required key")
    return default


def _nonfinite_to_none(value):
    if isinstance(value, float) and math.isinf(value):
        return None
    return value


def radio_payload_from_toml(doc: dict) -> dict:
    sec = doc.get("radio", {})
    payload = {}
    for key in (
        "snr_target_db",
        "snr_target",
        "path_loss_exponent",
        "noise_w",
        "min_distance_m",
        "max_power_w",
    ):
        if key in sec:
            payload[key] = sec[key]
    return payload


def deploy_payload_from_toml(doc: dict) -> dict:
    """TOML deployment document -> JSON-ready request payload."""
    for section in ("region", "deployment"):
        if section not in doc:
            raise ConfigError(section, "missing section")
    harvest = dict(doc.get("harvest", {}))
    if "trace_file" in harvest:
        trace_path = Path(harvest.pop("trace_file"))
        if not trace_path.exists():
            raise ConfigError("harvest.trace_file", f"{trace_path} not found")
        harvest["trace_text"] = trace_path.read_text()
    if "battery_capacity_j" in harvest:
        harvest["battery_capacity_j"] = _nonfinite_to_none(
            harvest["battery_capacity_j"]
        )
    payload = {
        "region": dict(doc["region"]),
        "radio": radio_payload_from_toml(doc),
        "harvest": harvest,
        "deployment": dict(doc["deployment"]),
    }
    if "sweep" in doc:
        payload["sweep"] = dict(doc["sweep"])
    return payload


def scenario_payload_from_toml(doc: dict) -> dict:
    """TOML scenario document -> JSON-ready scenario payload."""
    if "stations" not in doc:
        raise ConfigError("stations", "missing station table array")
    if "users" not in doc:
        raise ConfigError("users", "missing user position list")
    stations = []
    for i, st in enumerate(doc["stations"]):
        st = dict(st)
        if "position" not in st:
            raise ConfigError(f"stations[{i}].position", "missing required key")
        for key in ("battery_capacity_j", "initial_battery_j"):
            if key in st:
                st[key] = _nonfinite_to_none(st[key])
        stations.append(st)
    return {
        "stations": stations,
        "users": [list(u) for u in doc["users"]],
        "radio": radio_payload_from_toml(doc),
        "horizon_slots": doc.get("horizon_slots"),
        "slot_s": doc.get("slot_s", 1.0),
    }


# ---------------------------------------------------------------------------
# Run manifests
# ---------------------------------------------------------------------------


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_outputs(out_dir, files: dict[str, str]) -> list[dict]:
    """Write text files into out_dir; return manifest entries for each."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for name, text in files.items():
        path = out / name
        path.write_text(text)
        entries.append(
            {"name": name, "sha256": sha256_hex(text), "bytes": len(text.encode())}
        )
    return entries


def build_manifest(
    command: str, version: str, seed, resolved_config: dict, outputs: list[dict]
) -> dict:
    return {
        "command": command,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "version": version,
        "seed": seed,
        "resolved_config": resolved_config,
        "outputs": outputs,
    }


def write_manifest(out_dir, manifest: dict) -> Path:
    path = Path(out_dir) / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(str(path), "manifest not found")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"manifest is not valid JSON: {exc}") from exc
