"""Command-line client: file outputs, manifests, templates, exit codes.

Every invocation here talks to the in-process service, so these tests cover
the full request path from TOML or trace files down to the solvers and back
out to CSV, JSON, and the run manifest.
"""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from ehscn.cli import DEFAULT_DEPLOY_CONFIG, DEFAULT_SCENARIO, REPORTS_HEADER, main
from ehscn.fileio import (
    deploy_payload_from_toml,
    read_toml,
    scenario_payload_from_toml,
    sha256_hex,
)

FIXTURES = Path(__file__).parent / "fixtures"

DEPLOY_TOML = """\
[region]
side_m = 60.0
topology = "torus"

[radio]
snr_target_db = 10.0
noise_w = 1e-13

[harvest]
model = "constant"
eh_rate_w = 5e-8

[deployment]
scbs_density = 8e-4
user_density = 1e-3
horizon_slots = 2
trials = 3
seed = 5
"""

DENSITY_SWEEP = DEPLOY_TOML + """
[sweep]
parameter = "scbs_density"
values = [4e-4, 8e-4]
"""

RATIO_SWEEP = DEPLOY_TOML + """
[sweep]
parameter = "on_grid_ratio"
values = [0.0, 1.0]
"""

FAIRNESS_SCENARIO = """\
horizon_slots = 2
users = [[1.0, 0.0], [3.0, 0.0]]

[radio]
snr_target = 1.0
noise_w = 0.01

[[stations]]
position = [0.0, 0.0]
initial_battery_j = 0.8
eh_rate_w = 0.1

[[stations]]
position = [4.0, 0.0]
initial_battery_j = 0.5
"""

runner = CliRunner()


def invoke(args, env=None):
    return runner.invoke(main, args, env=env, catch_exceptions=False)


def combined_output(result):
    text = result.output
    try:
        if result.stderr is not None:
            text += result.stderr
    except (ValueError, AttributeError):
        pass
    return text


def load_manifest(out_dir):
    return json.loads((Path(out_dir) / "run_manifest.json").read_text())


def check_manifest_hashes(out_dir):
    manifest = load_manifest(out_dir)
    assert manifest["outputs"], "manifest lists no outputs"
    for entry in manifest["outputs"]:
        text = (Path(out_dir) / entry["name"]).read_text()
        assert sha256_hex(text) == entry["sha256"]
        assert len(text.encode()) == entry["bytes"]
    return manifest


def read_reports(out_dir):
    lines = (Path(out_dir) / "reports.csv").read_text().splitlines()
    assert lines[0] == REPORTS_HEADER
    rows = {}
    for line in lines[1:]:
        solver, objective, iters, width, grid_j, switch, notes = line.split(",", 6)
        rows[solver] = {
            "objective": float(objective),
            "iterations": int(iters),
            "interval_width": float(width),
            "grid_energy_j": None if grid_j == "" else float(grid_j),
            "switch_slot": None if switch == "" else int(switch),
            "notes": notes,
        }
    return rows


class TestProfileCommand:
    def test_antiphase_pair(self, tmp_path):
        result = invoke(
            [
                "profile",
                str(FIXTURES / "antiphase_a.csv"),
                str(FIXTURES / "antiphase_b.csv"),
                "--out",
                str(tmp_path),
            ]
        )
        assert result.exit_code == 0
        assert "complementarity: -1\n" in result.output
        for name in (
            "antiphase_a_processed.csv",
            "antiphase_b_processed.csv",
            "profile_summary.json",
            "run_manifest.json",
        ):
            assert (tmp_path / name).exists(), name
        manifest = check_manifest_hashes(tmp_path)
        assert manifest["command"] == "profile"
        summary = json.loads((tmp_path / "profile_summary.json").read_text())
        assert summary["complementarity"] == pytest.approx(-1.0, abs=1e-12)
        assert [s["name"] for s in summary["series"]] == ["antiphase_a", "antiphase_b"]

    def test_window_equal_to_resolution_is_identity(self, tmp_path):
        plain, windowed = tmp_path / "plain", tmp_path / "windowed"
        trace = str(FIXTURES / "solar_15min.csv")
        assert invoke(["profile", trace, "--out", str(plain)]).exit_code == 0
        assert (
            invoke(["profile", trace, "--window", "900", "--out", str(windowed)]).exit_code
            == 0
        )
        assert (plain / "solar_15min_processed.csv").read_bytes() == (
            windowed / "solar_15min_processed.csv"
        ).read_bytes()

    def test_normalize_caps_peak_at_one(self, tmp_path):
        result = invoke(
            [
                "profile",
                str(FIXTURES / "solar_15min.csv"),
                "--normalize",
                "--out",
                str(tmp_path),
            ]
        )
        assert result.exit_code == 0
        values = []
        for line in (tmp_path / "solar_15min_processed.csv").read_text().splitlines():
            if not line or line.startswith("#") or line.endswith("power_watts"):
                continue
            values.append(float(line.split(",")[1]))
        assert max(values) == 1.0
        assert min(values) >= 0.0

    def test_json_format(self, tmp_path):
        result = invoke(
            [
                "profile",
                str(FIXTURES / "wind_15min.csv"),
                "--format",
                "json",
                "--out",
                str(tmp_path),
            ]
        )
        assert result.exit_code == 0
        assert (tmp_path / "profile.json").exists()
        assert not (tmp_path / "wind_15min_processed.csv").exists()
        data = json.loads((tmp_path / "profile.json").read_text())
        assert data["series"][0]["name"] == "wind_15min"

    def test_requires_at_least_one_trace(self):
        result = invoke(["profile"])
        assert result.exit_code == 1
        assert "at least one trace file" in combined_output(result)

    def test_missing_trace_file_is_usage_error(self):
        result = invoke(["profile", "no_such_trace.csv"])
        assert result.exit_code == 2


class TestDeployCommand:
    def test_print_config_template_parses(self, tmp_path):
        result = invoke(["deploy", "--print-config"])
        assert result.exit_code == 0
        assert result.output == DEFAULT_DEPLOY_CONFIG
        assert "[region]" in result.output
        path = tmp_path / "template.toml"
        path.write_text(result.output)
        payload = deploy_payload_from_toml(read_toml(path))
        assert payload["deployment"]["scbs_density"] == 1.7e-4
        assert payload["sweep"]["parameter"] == "scbs_density"

    def test_single_point_outputs(self, tmp_path):
        config = tmp_path / "deploy.toml"
        config.write_text(DEPLOY_TOML)
        out = tmp_path / "run"
        result = invoke(["deploy", "--config", str(config), "--out", str(out)])
        assert result.exit_code == 0
        assert (out / "point.csv").exists()
        manifest = check_manifest_hashes(out)
        assert manifest["command"] == "deploy"
        assert manifest["seed"] == 5
        assert f"wrote {out / 'point.csv'}" in result.output

    def test_rerun_is_byte_identical(self, tmp_path):
        config = tmp_path / "deploy.toml"
        config.write_text(DEPLOY_TOML)
        first, second = tmp_path / "first", tmp_path / "second"
        assert invoke(["deploy", "--config", str(config), "--out", str(first)]).exit_code == 0
        assert invoke(["deploy", "--config", str(config), "--out", str(second)]).exit_code == 0
        assert (first / "point.csv").read_bytes() == (second / "point.csv").read_bytes()
        assert load_manifest(first)["outputs"] == load_manifest(second)["outputs"]

    def test_from_manifest_replays_run(self, tmp_path):
        config = tmp_path / "deploy.toml"
        config.write_text(DEPLOY_TOML)
        first, replay = tmp_path / "first", tmp_path / "replay"
        assert invoke(["deploy", "--config", str(config), "--out", str(first)]).exit_code == 0
        result = invoke(
            [
                "deploy",
                "--from-manifest",
                str(first / "run_manifest.json"),
                "--out",
                str(replay),
            ]
        )
        assert result.exit_code == 0
        assert (first / "point.csv").read_bytes() == (replay / "point.csv").read_bytes()

    def test_seed_and_trials_overrides_are_recorded(self, tmp_path):
        config = tmp_path / "deploy.toml"
        config.write_text(DEPLOY_TOML)
        out = tmp_path / "run"
        result = invoke(
            [
                "deploy", "--config", str(config),
                "--seed", "9", "--trials", "1",
                "--out", str(out),
            ]
        )
        assert result.exit_code == 0
        manifest = load_manifest(out)
        assert manifest["seed"] == 9
        assert manifest["resolved_config"]["deployment"]["seed"] == 9
        assert manifest["resolved_config"]["deployment"]["trials"] == 1

    def test_density_sweep_writes_panels(self, tmp_path):
        config = tmp_path / "deploy.toml"
        config.write_text(DENSITY_SWEEP)
        out = tmp_path / "run"
        result = invoke(["deploy", "--config", str(config), "--out", str(out)])
        assert result.exit_code == 0
        for name in (
            "outage_vs_density.csv",
            "grid_vs_density.csv",
            "economics.csv",
            "economics_summary.json",
            "outage_vs_grid.csv",
        ):
            assert (out / name).exists(), name
        ratio_lines = (out / "outage_vs_grid.csv").read_text().splitlines()
        assert len(ratio_lines) == 12
        assert ratio_lines[0].startswith("param,")
        summary = json.loads((out / "economics_summary.json").read_text())
        assert summary["optimal_density"] in (4e-4, 8e-4)
        check_manifest_hashes(out)

    def test_other_sweep_writes_single_curve(self, tmp_path):
        config = tmp_path / "deploy.toml"
        config.write_text(RATIO_SWEEP)
        out = tmp_path / "run"
        result = invoke(["deploy", "--config", str(config), "--out", str(out)])
        assert result.exit_code == 0
        assert (out / "sweep.csv").exists()
        assert not (out / "economics.csv").exists()
        assert len((out / "sweep.csv").read_text().splitlines()) == 3

    def test_service_error_exits_one(self, tmp_path):
        config = tmp_path / "deploy.toml"
        config.write_text(DEPLOY_TOML.replace("user_density = 1e-3", "user_density = 0.0"))
        result = invoke(["deploy", "--config", str(config), "--out", str(tmp_path / "x")])
        assert result.exit_code == 1
        assert "error from service /deploy" in combined_output(result)

    def test_requires_some_configuration(self):
        result = invoke(["deploy"])
        assert result.exit_code == 1
        assert "--config" in combined_output(result)


class TestOperateCommand:
    def write_template(self, tmp_path):
        path = tmp_path / "scenario.toml"
        path.write_text(DEFAULT_SCENARIO)
        return path

    def test_print_config_round_trips(self, tmp_path):
        result = invoke(["operate", "--print-config"])
        assert result.exit_code == 0
        assert result.output == DEFAULT_SCENARIO
        path = tmp_path / "scenario.toml"
        path.write_text(result.output)
        payload = scenario_payload_from_toml(read_toml(path))
        assert payload["users"] == [[0.0, 0.0]]
        assert payload["stations"][1]["battery_capacity_j"] is None

    def test_template_scenario_all_solvers(self, tmp_path):
        path = self.write_template(tmp_path)
        out = tmp_path / "run"
        result = invoke(["operate", str(path), "--all", "--out", str(out)])
        assert result.exit_code == 0
        assert "save_transmit: objective 4\n" in result.output
        assert "greedy_transmit: objective 4\n" in result.output
        rows = read_reports(out)
        assert set(rows) == {"save_transmit", "greedy_transmit"}
        assert rows["save_transmit"]["grid_energy_j"] == 4.0
        assert rows["save_transmit"]["switch_slot"] == 4
        assert rows["greedy_transmit"]["switch_slot"] is None
        assert (out / "schedule_save_transmit.csv").exists()
        assert (out / "schedule_greedy_transmit.csv").exists()
        check_manifest_hashes(out)

    def test_explicit_solver_selection(self, tmp_path):
        path = self.write_template(tmp_path)
        out = tmp_path / "run"
        result = invoke(
            [
                "operate", str(path),
                "--solver", "greedy", "--solver", "save",
                "--out", str(out),
            ]
        )
        assert result.exit_code == 0
        rows = read_reports(out)
        assert rows["greedy_transmit"]["grid_energy_j"] == rows["save_transmit"]["grid_energy_j"]
        lines = (out / "reports.csv").read_text().splitlines()
        assert lines[1].startswith("greedy_transmit,")
        assert lines[2].startswith("save_transmit,")

    def test_fairness_all_with_oracles(self, tmp_path):
        path = tmp_path / "fair.toml"
        path.write_text(FAIRNESS_SCENARIO)
        out = tmp_path / "run"
        result = invoke(
            ["operate", str(path), "--all", "--with-oracles", "--out", str(out)]
        )
        assert result.exit_code == 0
        rows = read_reports(out)
        assert set(rows) == {
            "baseline_distance", "baseline_snr_greedy",
            "maxmin_bisection", "bf_bound", "maxmin_enumeration",
        }
        slack = 1 + 1e-9
        assert rows["baseline_distance"]["objective"] <= rows["maxmin_enumeration"]["objective"] * slack
        assert rows["maxmin_bisection"]["objective"] <= rows["maxmin_enumeration"]["objective"] * slack
        assert rows["maxmin_enumeration"]["objective"] <= rows["bf_bound"]["objective"] * slack
        assert "lp_calls=" in rows["maxmin_enumeration"]["notes"]
        assert (out / "schedule_maxmin_enumeration.csv").exists()
        assert not (out / "schedule_bf_bound.csv").exists()

    def test_json_format(self, tmp_path):
        path = self.write_template(tmp_path)
        out = tmp_path / "run"
        result = invoke(
            ["operate", str(path), "--all", "--format", "json", "--out", str(out)]
        )
        assert result.exit_code == 0
        data = json.loads((out / "reports.json").read_text())
        assert [r["solver"] for r in data["reports"]] == ["save_transmit", "greedy_transmit"]
        assert not (out / "reports.csv").exists()

    def test_rerun_reports_identical(self, tmp_path):
        path = tmp_path / "fair.toml"
        path.write_text(FAIRNESS_SCENARIO)
        first, second = tmp_path / "first", tmp_path / "second"
        assert invoke(["operate", str(path), "--all", "--out", str(first)]).exit_code == 0
        assert invoke(["operate", str(path), "--all", "--out", str(second)]).exit_code == 0
        assert (first / "reports.csv").read_bytes() == (second / "reports.csv").read_bytes()

    def test_wrong_solver_family_exits_one(self, tmp_path):
        path = tmp_path / "fair.toml"
        path.write_text(FAIRNESS_SCENARIO)
        result = invoke(["operate", str(path), "--solver", "save", "--out", str(tmp_path / "x")])
        assert result.exit_code == 1
        assert "error from service /operate" in combined_output(result)

    def test_env_var_sets_output_dir(self, tmp_path):
        path = self.write_template(tmp_path)
        out = tmp_path / "from_env"
        result = invoke(
            ["operate", str(path), "--solver", "greedy"],
            env={"EHSCN_OUT_DIR": str(out)},
        )
        assert result.exit_code == 0
        assert (out / "reports.csv").exists()
        assert (out / "run_manifest.json").exists()

    def test_malformed_scenario_exits_one(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("horizon_slots = 2\n[[stations]]\nposition = [0.0, 0.0]\n")
        result = invoke(["operate", str(path), "--all"])
        assert result.exit_code == 1
        assert "user position list" in combined_output(result)

    def test_requires_scenario_file(self):
        result = invoke(["operate"])
        assert result.exit_code == 1
        assert "scenario file" in combined_output(result)


class TestOracleCommand:
    def test_reference_matches_heuristics(self, tmp_path):
        path = tmp_path / "scenario.toml"
        path.write_text(DEFAULT_SCENARIO)
        out = tmp_path / "run"
        result = invoke(["oracle", str(path), "--out", str(out)])
        assert result.exit_code == 0
        assert "grid_oracle: objective 4 (grid slots: 4 of 10)" in result.output
        rows = read_reports(out)
        assert rows["grid_oracle"]["objective"] == 4.0
        assert (out / "schedule_grid_oracle.csv").exists()
        check_manifest_hashes(out)

    def test_missing_scenario_is_usage_error(self):
        result = invoke(["oracle", "no_such_scenario.toml"])
        assert result.exit_code == 2


class TestVersionFlag:
    def test_version(self):
        import ehscn

        result = invoke(["--version"])
        assert result.exit_code == 0
        assert ehscn.__version__ in result.output
