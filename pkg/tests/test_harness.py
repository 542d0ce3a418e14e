"""Scenario validation, artifact writing, CLI behavior and exit codes."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from scramsey.analysis import default_intervals, normal_flop
from scramsey.cli import main
from scramsey.errors import ScenarioError
from scramsey.harness import (
    load_scenario,
    run_scenario,
    scenario_schema,
    validate_scenario,
    write_csv,
    write_json,
)
from scramsey.sequence import DELTA_W_REF

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

MINIMAL = {"version": 1, "mode": "normal"}


def _scenario(**overrides):
    merged = dict(MINIMAL)
    merged.update(overrides)
    return merged


# ------------------------------------------------------------- validation


def test_schema_is_packaged():
    schema = scenario_schema()
    assert schema["$id"] == "scramsey/scenario-v1"
    assert set(schema["properties"]["mode"]["enum"]) >= {"normal", "fit"}


def test_minimal_scenario_validates():
    validate_scenario(MINIMAL)


@pytest.mark.parametrize(
    "scenario,field",
    [
        ({"mode": "normal"}, "<root>"),  # version missing
        ({"version": 1, "mode": "bogus"}, "mode"),
        (_scenario(bogus=1), "<root>"),
        (_scenario(phi_samples=3), "phi_samples"),
        ([1, 2], "<root>"),
    ],
)
def test_structural_rejection(scenario, field):
    with pytest.raises(ScenarioError) as err:
        validate_scenario(scenario)
    assert err.value.field == field


@pytest.mark.parametrize(
    "scenario,field",
    [
        (_scenario(choice="yes"), "choice"),
        (_scenario(record="excited"), "record"),
        (_scenario(mode="sdbv", intervals={"count": 5}), "intervals"),
        (_scenario(mode="normal", timing={"t1_s": 1e-3}), "timing"),
        (_scenario(mode="scrambled", timing={"t2_s": 1e-3}), "timing.t2_s"),
        (_scenario(mode="sdbv", pulses={"read_area_pi": 0.5}), "pulses.read_area_pi"),
        (_scenario(intervals={"periods": 2.0, "start_s": 0.0, "stop_s": 0.1}), "intervals"),
        (_scenario(intervals={"start_s": 0.0}), "intervals"),
        (_scenario(intervals={"start_s": 0.2, "stop_s": 0.1}), "intervals.stop_s"),
        (_scenario(mode="retrieved", timing={"t2_s": 1e-3, "store_halfturns_m": 1}), "timing"),
        (_scenario(mode="secure-choice", timing={"t3_s": 0.0, "read_turns_k": 1}), "timing"),
        ({"version": 1, "mode": "secure-choice"}, "choice"),
        ({"version": 1, "mode": "fit"}, "fit"),
        (_scenario(mode="fit", fit={"x_column": "a"}), "fit"),
        (
            _scenario(
                mode="fit",
                fit={"input_csv": "a.csv", "data": {"x": [0, 1, 2, 3, 4, 5], "y": [0, 1, 2, 3, 4, 5]}},
            ),
            "fit",
        ),
        (
            _scenario(mode="fit", fit={"data": {"x": [0, 1, 2, 3, 4, 5], "y": [0, 1, 2, 3, 4, 5, 6]}}),
            "fit.data",
        ),
    ],
)
def test_semantic_rejection(scenario, field):
    with pytest.raises(ScenarioError) as err:
        validate_scenario(scenario)
    assert err.value.field == field


def test_record_vector_norm_is_checked(tmp_path):
    scenario = _scenario(mode="sdbv", record=[1.0, 1.0, 1.0])
    with pytest.raises(ScenarioError) as err:
        run_scenario(scenario, tmp_path)
    assert err.value.field == "record"


def test_load_scenario_missing_file(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "nope.json")


def test_load_scenario_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ScenarioError):
        load_scenario(path)


# ---------------------------------------------------------------- writers


def test_write_csv_round_trips_floats(tmp_path):
    path = tmp_path / "x.csv"
    values = [0.1 + 0.2, 1.0 / 3.0, 5e-3, 1e-17]
    write_csv(path, ["v"], [[v] for v in values])
    lines = path.read_text().splitlines()
    assert lines[0] == "v"
    assert [float(line) for line in lines[1:]] == values


def test_write_csv_uses_unix_newlines(tmp_path):
    path = tmp_path / "x.csv"
    write_csv(path, ["a", "b"], [[1, 2.5]])
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")


def test_write_json_is_canonical(tmp_path):
    path = tmp_path / "x.json"
    write_json(path, {"b": np.float64(1.5), "a": np.inf, "c": np.array([1.0, 2.0]), "d": np.bool_(True)})
    data = json.loads(path.read_text())
    assert data == {"a": None, "b": 1.5, "c": [1.0, 2.0], "d": True}
    # keys sorted in the serialized text
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')


def test_no_temp_files_left_behind(tmp_path):
    run_scenario(MINIMAL, tmp_path)
    assert not list(tmp_path.glob("*.tmp"))


# ---------------------------------------------------------------- running


def test_normal_scenario_outputs(tmp_path):
    report = run_scenario(dict(MINIMAL), tmp_path)
    assert report["outputs"] == ["flop.csv", "report.json"]
    lines = (tmp_path / "flop.csv").read_text().splitlines()
    assert lines[0] == "T_seconds,T_normalized,phi_S,P_e"
    assert lines[1] == "0.0,0.0,0.0,1.0"
    # every row round-trips to the analysis curve exactly
    curve = normal_flop(DELTA_W_REF, default_intervals(DELTA_W_REF))
    parsed = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert np.array_equal(parsed[:, 0], curve.intervals)
    assert np.allclose(parsed[:, 1], curve.intervals * DELTA_W_REF / (2 * np.pi), atol=1e-12)
    assert np.array_equal(parsed[:, 2], np.zeros(curve.intervals.size))
    assert np.array_equal(parsed[:, 3], curve.p_e)
    saved = json.loads((tmp_path / "report.json").read_text())
    assert saved["mode"] == "normal"
    assert saved["results"]["p_e_max"] == 1.0
    assert saved["resolved"]["frames"]["delta_w_rad_s"] == pytest.approx(DELTA_W_REF)
    assert saved["resolved"]["intervals"]["count"] == curve.intervals.size


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_scenarios_run(path, tmp_path):
    scenario = load_scenario(path)
    report = run_scenario(scenario, tmp_path, base_dir=path.parent)
    written = sorted(p.name for p in tmp_path.iterdir())
    assert written == report["outputs"]
    assert (tmp_path / "report.json").exists()
    assert json.loads((tmp_path / "report.json").read_text())["mode"] == scenario["mode"]


def _read_long_flop(path: Path) -> np.ndarray:
    lines = path.read_text().splitlines()
    assert lines[0] == "T_seconds,T_normalized,phi_S,P_e"
    return np.array([[float(v) for v in line.split(",")] for line in lines[1:]])


def test_scrambled_band_is_full_on_commensurate_grid(tmp_path):
    scenario = load_scenario(SCENARIOS / "scrambled.json")
    report = run_scenario(scenario, tmp_path)
    assert report["results"]["ambiguity"] == pytest.approx(1.0, abs=1e-9)
    rows = _read_long_flop(tmp_path / "flop.csv")
    n_t = scenario["intervals"]["count"]
    assert rows.shape == (n_t * scenario["phi_samples"], 4)
    # one contiguous block of intervals per shot phase, phases ascending
    assert np.array_equal(rows[:n_t, 2], np.zeros(n_t))
    assert np.all(np.diff(rows[::n_t, 2]) > 0)
    # normalized column counts fringe periods: the grid spans two
    assert rows[:, 1].max() == pytest.approx(2.0, abs=1e-12)


def test_retrieved_scenario_collapses(tmp_path):
    report = run_scenario(load_scenario(SCENARIOS / "retrieved.json"), tmp_path)
    assert report["results"]["max_deviation_from_normal"] < 1e-9
    assert report["warnings"] == []


def test_retrieved_csv_per_interval_spread_is_tiny(tmp_path):
    # the written table itself must show the collapse: for reference
    # timings the P_e spread across shot phases stays below 1e-9 at
    # every interval
    run_scenario(load_scenario(SCENARIOS / "retrieved.json"), tmp_path)
    rows = _read_long_flop(tmp_path / "flop.csv")
    by_interval = {}
    for t, _, _, p in rows:
        by_interval.setdefault(t, []).append(p)
    assert len(by_interval) == 257
    spread = max(max(ps) - min(ps) for ps in by_interval.values())
    assert spread <= 1e-9


def test_retrieved_detuned_store_warns_but_runs(tmp_path):
    scenario = load_scenario(SCENARIOS / "retrieved.json")
    scenario["timing"] = {"t1_s": 0.005, "t2_s": 0.0025}
    report = run_scenario(scenario, tmp_path)
    assert len(report["warnings"]) == 1
    assert "descramble" in report["warnings"][0]
    assert report["results"]["max_deviation_from_normal"] > 0.1


def test_secure_choice_report(tmp_path):
    report = run_scenario(load_scenario(SCENARIOS / "secure_choice.json"), tmp_path)
    results = report["results"]
    assert results["decoded"] == results["choice"] == "yes"
    assert results["match"] is True
    assert results["readout_min"] > 1.0 - 1e-9
    assert results["secrecy_gap"] < 1e-12
    assert results["read_turns_k"] == 1
    lines = (tmp_path / "readout.csv").read_text().splitlines()
    assert lines[0] == "phi_S,P_e"
    assert len(lines) == 257


def test_sdbv_table_headers(tmp_path):
    report = run_scenario(load_scenario(SCENARIOS / "sdbv.json"), tmp_path)
    assert report["outputs"] == ["projection.csv", "report.json", "sdbv.csv"]
    cloud = (tmp_path / "sdbv.csv").read_text().splitlines()
    assert cloud[0] == "phi_S,x,y,z"
    projection = (tmp_path / "projection.csv").read_text().splitlines()
    assert projection[0] == "phi_S,x,z"
    assert len(cloud) == len(projection)
    # both tables share the phi grid
    assert [line.split(",")[0] for line in cloud[1:]] == [line.split(",")[0] for line in projection[1:]]


def test_optimize_scenario_finds_half_pi(tmp_path):
    report = run_scenario(load_scenario(SCENARIOS / "optimize.json"), tmp_path)
    assert report["results"]["theta_star_pi"] == pytest.approx(0.5, abs=1e-3)
    assert report["results"]["ambiguity"] == pytest.approx(1.0, abs=1e-6)


def test_fit_scenario_from_csv(tmp_path):
    report = run_scenario(load_scenario(SCENARIOS / "fit.json"), tmp_path, base_dir=SCENARIOS)
    results = report["results"]
    assert results["converged"] and not results["degenerate_amplitude"]
    assert results["frequency_hz"] == pytest.approx(100.0, rel=0.01)
    lines = (tmp_path / "fit.csv").read_text().splitlines()
    assert lines[0] == "x,y,model,residual"


def test_fit_chains_from_trials_csv(tmp_path):
    run_scenario(load_scenario(SCENARIOS / "normal_noisy.json"), tmp_path / "run")
    fit_scenario = _scenario(mode="fit", fit={"input_csv": "run/trials.csv"})
    report = run_scenario(fit_scenario, tmp_path / "fit", base_dir=tmp_path)
    assert report["results"]["frequency_hz"] == pytest.approx(100.0, rel=0.01)


def test_fit_missing_column(tmp_path):
    (tmp_path / "d.csv").write_text("a,b\n1,2\n", encoding="utf-8")
    scenario = _scenario(mode="fit", fit={"input_csv": "d.csv"})
    with pytest.raises(ScenarioError) as err:
        run_scenario(scenario, tmp_path / "out", base_dir=tmp_path)
    assert err.value.field == "fit"


def test_fit_unsorted_data_is_a_scenario_error(tmp_path):
    scenario = _scenario(
        mode="fit",
        fit={"data": {"x": [0.0, 2.0, 1.0, 3.0, 4.0, 5.0], "y": [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]}},
    )
    with pytest.raises(ScenarioError):
        run_scenario(scenario, tmp_path)


# ------------------------------------------------------------ determinism


def _tree_bytes(root: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


@pytest.mark.parametrize("name", ["normal_noisy.json", "secure_choice.json"])
def test_rerun_is_byte_identical(name, tmp_path):
    scenario = load_scenario(SCENARIOS / name)
    run_scenario(dict(scenario), tmp_path / "a")
    run_scenario(dict(scenario), tmp_path / "b")
    assert _tree_bytes(tmp_path / "a") == _tree_bytes(tmp_path / "b")


def test_seed_changes_trials_only(tmp_path):
    scenario = load_scenario(SCENARIOS / "normal_noisy.json")
    first = dict(scenario)
    second = dict(scenario, seed=scenario["seed"] + 1)
    run_scenario(first, tmp_path / "a")
    run_scenario(second, tmp_path / "b")
    assert (tmp_path / "a/flop.csv").read_bytes() == (tmp_path / "b/flop.csv").read_bytes()
    assert (tmp_path / "a/trials.csv").read_bytes() != (tmp_path / "b/trials.csv").read_bytes()


def test_json_table_format(tmp_path):
    scenario = dict(MINIMAL)
    report = run_scenario(scenario, tmp_path / "json", fmt="json")
    assert report["outputs"] == ["flop.json", "report.json"]
    table = json.loads((tmp_path / "json/flop.json").read_text())
    assert table["columns"] == ["T_seconds", "T_normalized", "phi_S", "P_e"]
    # same numbers either way: both serializers use shortest round-trip floats
    run_scenario(scenario, tmp_path / "csv")
    csv_rows = _read_long_flop(tmp_path / "csv/flop.csv")
    assert np.array_equal(np.array(table["rows"]), csv_rows)
    # reruns stay byte-identical in this format too
    run_scenario(scenario, tmp_path / "json2", fmt="json")
    assert _tree_bytes(tmp_path / "json") == _tree_bytes(tmp_path / "json2")


def test_unknown_table_format_rejected(tmp_path):
    with pytest.raises(ScenarioError) as err:
        run_scenario(dict(MINIMAL), tmp_path, fmt="xml")
    assert err.value.field == "format"


def test_report_scenario_reruns_to_same_resolved_config(tmp_path):
    # the echoed scenario is a complete recipe: feeding it back yields
    # the same resolved configuration and artifacts
    for name in ("retrieved.json", "secure_choice.json"):
        first = run_scenario(load_scenario(SCENARIOS / name), tmp_path / "a" / name)
        echoed = json.loads((tmp_path / "a" / name / "report.json").read_text())["scenario"]
        second = run_scenario(echoed, tmp_path / "b" / name)
        assert second["resolved"] == first["resolved"]
        assert _tree_bytes(tmp_path / "a" / name) == _tree_bytes(tmp_path / "b" / name)


# ----------------------------------------------------------------- CLI


def test_cli_normal_run(tmp_path, capsys):
    code = main(["flop", "--config", str(SCENARIOS / "normal.json"), "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "normal:" in out
    assert "flop.csv" in out


def test_cli_seed_override(tmp_path):
    base = ["flop", "--config", str(SCENARIOS / "normal_noisy.json")]
    assert main(base + ["-o", str(tmp_path / "a"), "--seed", "7"]) == 0
    assert main(base + ["-o", str(tmp_path / "b"), "--seed", "7"]) == 0
    assert main(base + ["-o", str(tmp_path / "c"), "--seed", "8"]) == 0
    assert (tmp_path / "a/trials.csv").read_bytes() == (tmp_path / "b/trials.csv").read_bytes()
    assert (tmp_path / "a/trials.csv").read_bytes() != (tmp_path / "c/trials.csv").read_bytes()
    report = json.loads((tmp_path / "a/report.json").read_text())
    assert report["scenario"]["seed"] == 7


def test_cli_format_json(tmp_path, capsys):
    args = ["flop", "--config", str(SCENARIOS / "normal.json"), "-o", str(tmp_path), "--format", "json"]
    assert main(args) == 0
    assert "flop.json" in capsys.readouterr().out
    assert (tmp_path / "flop.json").exists()
    assert not (tmp_path / "flop.csv").exists()


def test_cli_rejects_bad_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{", encoding="utf-8")
    assert main(["flop", "--config", str(path), "-o", str(tmp_path / "out")]) == 2
    assert "scenario error" in capsys.readouterr().err


def test_cli_empty_interval_grid_is_exit_2(tmp_path, capsys):
    scenario = _scenario(intervals={"start_s": 0.0, "stop_s": 0.02, "count": 0})
    path = tmp_path / "empty_grid.json"
    path.write_text(json.dumps(scenario), encoding="utf-8")
    assert main(["flop", "--config", str(path), "-o", str(tmp_path / "out")]) == 2
    assert "intervals.count" in capsys.readouterr().err


def test_cli_rejects_mode_mismatch(tmp_path, capsys):
    assert main(["flop", "--config", str(SCENARIOS / "sdbv.json"), "-o", str(tmp_path)]) == 2
    assert "subcommand" in capsys.readouterr().err


def test_cli_rejects_seed_without_trials_support(tmp_path, capsys):
    assert main(["sdbv", "--config", str(SCENARIOS / "sdbv.json"), "-o", str(tmp_path), "--seed", "1"]) == 2
    assert "--seed" in capsys.readouterr().err


def test_cli_rejects_seed_beyond_u64(tmp_path, capsys):
    args = ["flop", "--config", str(SCENARIOS / "normal_noisy.json"), "-o", str(tmp_path)]
    assert main(args + ["--seed", str(2**64)]) == 2
    assert "64-bit" in capsys.readouterr().err


def test_cli_protocol_error_is_exit_3(tmp_path, capsys):
    scenario = load_scenario(SCENARIOS / "secure_choice.json")
    scenario["timing"] = {"t1_s": 0.005, "t2_s": 0.005, "t3_s": 0.001}
    path = tmp_path / "broken_timing.json"
    path.write_text(json.dumps(scenario), encoding="utf-8")
    assert main(["secure-choice", "--config", str(path), "-o", str(tmp_path / "out")]) == 3
    assert "simulation error" in capsys.readouterr().err


def test_cli_fit_nonconvergence_is_exit_4(tmp_path, capsys):
    x = np.linspace(0.0, 0.06, 40)
    y = 0.5 + 0.4 * np.exp(-x / 0.02) * np.cos(2 * np.pi * 100.0 * x)
    scenario = _scenario(mode="fit", fit={"data": {"x": x.tolist(), "y": y.tolist()}, "max_iterations": 1})
    path = tmp_path / "fit_budget.json"
    path.write_text(json.dumps(scenario), encoding="utf-8")
    assert main(["fit", "--config", str(path), "-o", str(tmp_path / "out")]) == 4
    captured = capsys.readouterr()
    assert "did not converge" in captured.err
    assert (tmp_path / "out/fit.csv").exists()


def test_cli_detuned_store_warns_and_exits_zero(tmp_path, capsys):
    scenario = load_scenario(SCENARIOS / "retrieved.json")
    scenario["timing"] = {"t1_s": 0.005, "t2_s": 0.0025}
    scenario["intervals"] = {"periods": 1.0, "count": 17}
    path = tmp_path / "detuned.json"
    path.write_text(json.dumps(scenario), encoding="utf-8")
    assert main(["flop", "--config", str(path), "-o", str(tmp_path / "out")]) == 0
    assert "warning" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "scramsey", "flop", "--config", str(SCENARIOS / "normal.json"), "-o", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "flop.csv").exists()
