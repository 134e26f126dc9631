"""Command-line interface.

A thin client over the HTTP service: every command builds a request, sends
it to the service (in-process by default, or a remote --server URL), and
writes the response out as CSV or JSON files plus a run manifest.
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path

import click
import httpx

from . import __version__
from .errors import EhscnError
from .fileio import (
    build_manifest,
    curve_csv,
    deploy_payload_from_toml,
    economics_csv,
    fmt,
    read_manifest,
    read_toml,
    scenario_payload_from_toml,
    schedule_csv,
    trace_csv,
    write_manifest,
    write_outputs,
)

DEFAULT_DEPLOY_CONFIG = """\
# deployment simulation configuration

[region]
side_m = 1000.0
topology = "torus"      # torus | bounded

[radio]
snr_target_db = 10.0
path_loss_exponent = 4.0
noise_w = 1e-13
min_distance_m = 1.0
# max_power_w = 0.05    # omit for unconstrained transmitters

[harvest]
model = "constant"      # constant | bernoulli | trace
eh_rate_w = 0.020
battery_capacity_j = inf
# arrival_probability = 0.5   # bernoulli only
# quantum_j = 0.04            # bernoulli only
# trace_file = "solar.csv"    # trace only
# scale = 1.0                 # trace only; omit to scale mean to eh_rate_w
# phase_slots = 0             # trace only
# randomize_phase = false     # trace only

[deployment]
scbs_density = 1.7e-4
user_density = 1.0e-3
on_grid_ratio = 0.0
circuit_power_w = 0.0
slot_s = 1.0
horizon_slots = 8
warmup_slots = 0
trials = 4
seed = 0

[sweep]                 # optional section
parameter = "scbs_density"
values = [1.0e-4, 1.7e-4, 2.4e-4, 3.1e-4]
"""

DEFAULT_SCENARIO = """\
# scheduling scenario

horizon_slots = 10
slot_s = 1.0
users = [[0.0, 0.0]]

[radio]
snr_target_db = 20.0
path_loss_exponent = 4.0
noise_w = 0.01
min_distance_m = 1.0

[[stations]]
position = [0.0, 0.0]
eh_rate_w = 0.0
grid_connected = true

[[stations]]
position = [0.0, 0.0]
eh_rate_w = 0.6
battery_capacity_j = inf
initial_battery_j = 0.0
"""

REPORTS_HEADER = "solver,objective,iterations,interval_width,grid_energy_j,switch_slot,notes"


class ServiceClient:
    """Posts to the in-process app unless a remote server URL is given."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            with warnings.catch_warnings():
                # keep dependency deprecation chatter off the CLI's stderr
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app, raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code != 200:
            try:
                detail = resp.json()
            except ValueError:
                detail = {"detail": resp.text}
            click.echo(f"error from service {path}: {detail}", err=True)
            sys.exit(1)
        return resp.json()


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
@click.version_option(version=__version__, prog_name="ehscn")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
@click.pass_context
def main(ctx, server):
    """Energy-harvesting small-cell network simulator and schedule optimizer."""
    ctx.obj = {"server": server}


def _client(ctx) -> ServiceClient:
    return ServiceClient(ctx.obj.get("server"))


out_option = click.option(
    "--out",
    type=click.Path(file_okay=False),
    default=None,
    envvar="EHSCN_OUT_DIR",
    help="Output directory (env: EHSCN_OUT_DIR; default: current directory).",
)
format_option = click.option(
    "--format",
    "fmt_name",
    type=click.Choice(["csv", "json"]),
    default="csv",
    help="Output file format.",
)


def _finish(out_dir, command: str, seed, resolved_config: dict, files: dict[str, str]):
    directory = Path(out_dir) if out_dir else Path.cwd()
    entries = write_outputs(directory, files)
    manifest = build_manifest(command, __version__, seed, resolved_config, entries)
    write_manifest(directory, manifest)
    for entry in entries:
        click.echo(f"wrote {directory / entry['name']} ({entry['bytes']} bytes)")
    click.echo(f"wrote {directory / 'run_manifest.json'}")


# ---------------------------------------------------------------------------
# profile
# ---------------------------------------------------------------------------


@main.command()
@click.argument("trace_files", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--window", "window_s", type=float, default=None, help="Averaging window in seconds.")
@click.option("--normalize", is_flag=True, help="Scale each trace to unit peak.")
@click.option("--timestamp-col", type=int, default=0, show_default=True)
@click.option("--value-col", type=int, default=1, show_default=True)
@click.option("--header", is_flag=True, help="Skip the first non-comment line.")
@out_option
@format_option
@click.pass_context
def profile(ctx, trace_files, window_s, normalize, timestamp_col, value_col, header, out, fmt_name):
    """Load, clean, resample and compare harvested-power traces."""
    if not trace_files:
        _fail("give at least one trace file")
    payload = {
        "traces": [
            {
                "name": Path(f).stem,
                "text": Path(f).read_text(),
                "timestamp_column": timestamp_col,
                "value_column": value_col,
                "header": header,
            }
            for f in trace_files
        ],
        "window_s": window_s,
        "normalize": normalize,
    }
    data = _client(ctx).post("/profile", payload)
    files: dict[str, str] = {}
    if fmt_name == "json":
        files["profile.json"] = json.dumps(data, indent=2, sort_keys=True) + "\n"
    else:
        for series in data["series"]:
            files[f"{series['name']}_processed.csv"] = trace_csv(
                series["start_time"], series["resolution_s"], series["samples"]
            )
        summary = {
            "complementarity": data["complementarity"],
            "series": [
                {k: s[k] for k in ("name", "start_time", "resolution_s", "clamped_count")}
                for s in data["series"]
            ],
        }
        files["profile_summary.json"] = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if data["complementarity"] is not None:
        click.echo(f"complementarity: {fmt(data['complementarity'])}")
    _finish(out, "profile", None, payload, files)


# ---------------------------------------------------------------------------
# deploy
# ---------------------------------------------------------------------------


def _density_panels(client: ServiceClient, payload: dict) -> dict[str, str]:
    """Density sweeps at the grid-ratio extremes plus a grid-ratio sweep."""
    files = {}
    off_grid = json.loads(json.dumps(payload))
    off_grid["deployment"]["on_grid_ratio"] = 0.0
    data = client.post("/deploy", off_grid)
    files["outage_vs_density.csv"] = curve_csv("scbs_density", data["points"])

    on_grid = json.loads(json.dumps(payload))
    on_grid["deployment"]["on_grid_ratio"] = 1.0
    data = client.post("/deploy", on_grid)
    files["grid_vs_density.csv"] = curve_csv("scbs_density", data["points"])
    if data.get("economics"):
        files["economics.csv"] = economics_csv(
            "scbs_density",
            [(e["value"], e["cost_per_m2"]) for e in data["economics"]],
        )
        files["economics_summary.json"] = json.dumps(
            {
                "optimal_density": data["optimal_density"],
                "optimal_cost_per_m2": data["optimal_cost_per_m2"],
            },
            indent=2,
            sort_keys=True,
        ) + "\n"

    ratio = json.loads(json.dumps(payload))
    ratio["sweep"] = {"parameter": "on_grid_ratio", "values": [i / 10 for i in range(11)]}
    data = client.post("/deploy", ratio)
    files["outage_vs_grid.csv"] = curve_csv("on_grid_ratio", data["points"])
    return files


@main.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--from-manifest", "manifest_path", type=click.Path(dir_okay=False), default=None,
              help="Re-run the resolved configuration recorded in a manifest.")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.option("--trials", type=int, default=None, help="Override the configured trial count.")
@click.option("--threads", type=int, default=None, help="Worker threads for the simulation.")
@click.option("--print-config", is_flag=True, help="Print a config template and exit.")
@out_option
@format_option
@click.pass_context
def deploy(ctx, config_path, manifest_path, seed, trials, threads, print_config, out, fmt_name):
    """Simulate random deployments and write trade-off curves."""
    if print_config:
        click.echo(DEFAULT_DEPLOY_CONFIG, nl=False)
        return
    if manifest_path:
        payload = read_manifest(manifest_path)["resolved_config"]
    elif config_path:
        payload = deploy_payload_from_toml(read_toml(config_path))
    else:
        _fail("give --config, --from-manifest, or --print-config")
    if seed is not None:
        payload["deployment"]["seed"] = seed
    if trials is not None:
        payload["deployment"]["trials"] = trials
    if threads is not None:
        payload["deployment"]["threads"] = threads

    client = _client(ctx)
    sweep_spec = payload.get("sweep")
    if fmt_name == "json":
        data = client.post("/deploy", payload)
        files = {"deploy.json": json.dumps(data, indent=2, sort_keys=True) + "\n"}
    elif sweep_spec and sweep_spec.get("parameter") == "scbs_density":
        files = _density_panels(client, payload)
    elif sweep_spec:
        data = client.post("/deploy", payload)
        files = {"sweep.csv": curve_csv(data["parameter"], data["points"])}
    else:
        data = client.post("/deploy", payload)
        files = {"point.csv": curve_csv("scbs_density", data["points"])}
    _finish(out, "deploy", payload["deployment"].get("seed", 0), payload, files)


# ---------------------------------------------------------------------------
# operate / oracle
# ---------------------------------------------------------------------------


def _reports_csv(reports: list[dict]) -> str:
    lines = [REPORTS_HEADER]
    for r in reports:
        lines.append(
            ",".join(
                [
                    r["solver"],
                    fmt(float(r["objective"])),
                    fmt(int(r["iterations"])),
                    fmt(float(r["interval_width"])),
                    "" if r["grid_energy_j"] is None else fmt(float(r["grid_energy_j"])),
                    "" if r["switch_slot"] is None else fmt(int(r["switch_slot"])),
                    r["notes"],
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _report_files(data: dict, fmt_name: str) -> dict[str, str]:
    files = {}
    if fmt_name == "json":
        files["reports.json"] = json.dumps(data, indent=2, sort_keys=True) + "\n"
        return files
    files["reports.csv"] = _reports_csv(data["reports"])
    for r in data["reports"]:
        if r["schedule"] is not None:
            files[f"schedule_{r['solver']}.csv"] = schedule_csv(
                r["schedule"]["serving"], r["schedule"]["power_w"]
            )
    return files


@main.command()
@click.argument("scenario_file", required=False, type=click.Path(dir_okay=False))
@click.option("--solver", "solvers", multiple=True,
              type=click.Choice(["bisection", "distance", "snr-greedy", "bf-bound", "save", "greedy", "oracle"]),
              help="Run specific solvers (repeatable).")
@click.option("--all", "run_all", is_flag=True, help="Run every applicable solver and assert their ordering.")
@click.option("--with-oracles", is_flag=True, help="Include exhaustive references in --all (small instances only).")
@click.option("--tolerance", type=float, default=1e-3, show_default=True)
@click.option("--print-config", is_flag=True, help="Print a scenario template and exit.")
@out_option
@format_option
@click.pass_context
def operate(ctx, scenario_file, solvers, run_all, with_oracles, tolerance, print_config, out, fmt_name):
    """Optimize transmission schedules for a fixed scenario."""
    if print_config:
        click.echo(DEFAULT_SCENARIO, nl=False)
        return
    if not scenario_file:
        _fail("give a scenario file or --print-config")
    if not Path(scenario_file).exists():
        _fail(f"{scenario_file} not found")
    try:
        scenario = scenario_payload_from_toml(read_toml(scenario_file))
    except EhscnError as exc:
        _fail(str(exc))
    if not solvers and not run_all:
        run_all = True
    payload = {
        "scenario": scenario,
        "solvers": None if run_all else list(solvers),
        "tolerance": tolerance,
        "include_oracles": with_oracles,
    }
    data = _client(ctx).post("/operate", payload)
    for r in data["reports"]:
        click.echo(f"{r['solver']}: objective {fmt(float(r['objective']))}")
    _finish(out, "operate", None, payload, _report_files(data, fmt_name))


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@out_option
@format_option
@click.pass_context
def oracle(ctx, scenario_file, out, fmt_name):
    """Exhaustive minimum-grid-usage reference for one-user scenarios."""
    try:
        scenario = scenario_payload_from_toml(read_toml(scenario_file))
    except EhscnError as exc:
        _fail(str(exc))
    payload = {"scenario": scenario}
    data = _client(ctx).post("/oracle", payload)
    r = data["reports"][0]
    click.echo(f"{r['solver']}: objective {fmt(float(r['objective']))} ({r['notes']})")
    _finish(out, "oracle", None, payload, _report_files(data, fmt_name))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
