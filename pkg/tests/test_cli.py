import json

import pytest

from main import main
from utils.output import SWEEP_COLUMNS, document, dumps

PER_TRIAL_HEADER = "trial_index,tau,eta,abs_dev,overshoot_x,overshoot_xhat,censored_tau,censored_eta"


@pytest.fixture(autouse=True)
def no_output_dir(monkeypatch):
    monkeypatch.delenv("TST_OUTPUT_DIR", raising=False)


def run(capsys, *argv):
    code = main([str(arg) for arg in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def simulate_args(*extra):
    return ["simulate", "--l", 40, "--s", 1, "--eps", 1, "--trials", 100, "--seed", 7, "--threads", 1, "--quiet", *extra]


##### bounds #####
def test_bounds_acceptance_values(capsys):
    code, out, _ = run(capsys, "bounds", "--l", 10000, "--s", 1, "--eps", 1, "--mode", "discrete")
    assert code == 0
    doc = json.loads(out)
    assert doc["spec_version"] == "1.0"
    assert doc["config"]["l"] == 10000.0
    result = doc["result"]
    assert result["upper"] == pytest.approx(104.30, abs=0.05)
    assert result["lower"] >= 21.82 - 0.05
    assert result["main_term"] == pytest.approx(56.42, abs=0.01)


def test_bounds_reports_the_failing_hypothesis(capsys):
    code, out, err = run(capsys, "bounds", "--l", 1, "--s", 1, "--eps", 1)
    assert code == 2
    assert "l/s ≥ 2" in err
    assert json.loads(out)["result"]["lower"] is None


def test_brownian_upper_bound_drops_the_discrete_constants(capsys):
    _, out, _ = run(capsys, "bounds", "--l", 100, "--s", 1, "--eps", 1, "--mode", "discrete")
    discrete = json.loads(out)["result"]["upper"]
    _, out, _ = run(capsys, "bounds", "--l", 100, "--s", 1, "--eps", 1, "--mode", "brownian", "--dt", 0.01)
    brownian = json.loads(out)["result"]["upper"]
    assert discrete - brownian == pytest.approx((8 * 3 / 3.141592653589793) ** 0.5 + 30.0)


def test_bounds_with_q_and_n(capsys):
    code, out, _ = run(capsys, "bounds", "--l", 10000, "--s", 1, "--eps", 1, "--q", 0.75, "--n", 9000)
    assert code == 0
    result = json.loads(out)["result"]
    assert result["lower_best_n"] == 9000
    assert result["regime"]["noise_regime"] == pytest.approx(5.0)


@pytest.mark.parametrize("argv", [["--eps", -1, "--l", 10, "--s", 1], ["--eps", 1, "--l", 100, "--s", 1, "--n", 500], ["--eps", 1, "--l", 100, "--s", 1, "--q", 2]])
def test_bounds_invalid_input(capsys, argv):
    code, _, err = run(capsys, "bounds", *argv)
    assert code == 2
    assert "Error" in err


##### simulate #####
def test_simulate_noiseless_tracking(capsys):
    code, out, _ = run(capsys, "simulate", "--l", 30, "--s", 1, "--eps", 0, "--c", 1, "--trials", 100, "--seed", 1, "--threads", 1, "--quiet")
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["mean_abs_dev"] == 0.0
    assert doc["config"]["master_seed"] == 1


def test_simulate_auto_coefficient_is_echoed(capsys):
    code, out, _ = run(capsys, *simulate_args("--c", "auto"))
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["c"] == 0.5
    assert doc["result"]["c"] == 0.5
    assert doc["result"]["verdict"] in ("inside_bracket", "below_lower", "above_upper")


def test_simulate_bridge_switch_is_echoed(capsys):
    brownian = ["--mode", "brownian", "--dt", 0.5]
    code, out, _ = run(capsys, *simulate_args(*brownian))
    assert code == 0
    assert json.loads(out)["config"]["bridge"] is True
    code, out, _ = run(capsys, *simulate_args(*brownian, "--no-bridge"))
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["bridge"] is False
    assert doc["config"]["mode"] == "brownian"


def test_per_trial_csv_is_byte_identical_across_runs_and_workers(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    run(capsys, *simulate_args("--per-trial", paths[0]))
    run(capsys, "simulate", "--l", 40, "--s", 1, "--eps", 1, "--trials", 100, "--seed", 7, "--threads", 2, "--quiet", "--per-trial", paths[1])
    first, second = (p.read_bytes() for p in paths)
    assert first == second
    lines = first.decode().splitlines()
    assert lines[0] == PER_TRIAL_HEADER
    assert len(lines) == 101
    assert lines[1].startswith("0,")


def test_simulate_writes_summary_file(capsys, tmp_path):
    path = tmp_path / "out" / "summary.json"
    code, out, _ = run(capsys, *simulate_args("--output", path))
    assert code == 0
    assert out == ""
    assert json.loads(path.read_text())["result"]["n_trials"] == 100


def test_output_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("TST_OUTPUT_DIR", str(tmp_path))
    code, _, _ = run(capsys, *simulate_args("--output", "summary.json"))
    assert code == 0
    assert (tmp_path / "summary.json").exists()


def test_simulate_requires_a_seed(capsys):
    code, _, err = run(capsys, "simulate", "--l", 40, "--s", 1, "--eps", 1, "--trials", 100, "--quiet")
    assert code == 2
    assert "master_seed" in err


def test_simulate_from_config_file_with_flag_override(capsys, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"l": 50, "s": 1, "eps": 1, "c": "auto", "trials": 100, "seed": 3}))
    code, out, _ = run(capsys, "simulate", "--config", config, "--l", 40, "--threads", 1, "--quiet")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["l"] == 40.0
    assert doc["config"]["master_seed"] == 3


def test_config_syntax_errors_report_line_and_column(capsys, tmp_path):
    config = tmp_path / "broken.json"
    config.write_text('{"l": 50,\n "s": }')
    code, _, err = run(capsys, "simulate", "--config", config, "--quiet")
    assert code == 2
    assert f"{config}:2:" in err


def test_config_field_errors_name_the_field(capsys, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"l": 50, "s": 1, "eps": 1, "trials": 10, "seed": 3}))
    code, _, err = run(capsys, "simulate", "--config", config, "--quiet")
    assert code == 2
    assert "n_trials" in err


def test_missing_config_file_is_an_io_failure(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", "--config", tmp_path / "absent.json", "--quiet")
    assert code == 3


def test_excess_censoring_exits_with_4(capsys):
    code, out, _ = run(capsys, *simulate_args("--t-max", 30))
    assert code == 4
    assert json.loads(out)["result"]["verdict"] == "invalid_censoring"


def test_unwritable_output_exits_with_3(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, _ = run(capsys, *simulate_args("--output", blocker / "summary.json"))
    assert code == 3


##### sweep #####
def test_sweep_csv(capsys, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps([[100, 1, 1, "auto"], {"l": 200, "s": 1, "eps": 1, "c": 0.5}, [50, 1, -1, "auto"]]))
    outputs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for output in outputs:
        code, _, err = run(capsys, "sweep", "--grid-file", grid, "--trials", 100, "--seed", 5, "--threads", 1, "--quiet", "--output", output)
        assert code == 0
    assert "row 2 failed" in err
    first = outputs[0].read_text()
    assert first == outputs[1].read_text()
    lines = first.splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert "estimate_c0" in SWEEP_COLUMNS and "estimate_c1" in SWEEP_COLUMNS
    assert len(lines) == 4


def test_sweep_needs_seed():
    with pytest.raises(SystemExit) as excinfo:
        main(["sweep", "--grid-file", "grid.json"])
    assert excinfo.value.code == 2


##### tailcheck and overshoot #####
def test_tailcheck_rejects_drift(capsys):
    code, _, err = run(capsys, "tailcheck", "--h", 1, "--s", 1, "--seed", 1, "--quiet")
    assert code == 2
    assert "s = 0" in err


def test_tailcheck_small_run(capsys):
    code, out, _ = run(capsys, "tailcheck", "--h", 1, "--trials", 300, "--checkpoints", "1,1.585,2.512,3.981,6.31,10", "--growth", 1.1, "--seed", 1, "--threads", 1, "--quiet")
    assert code == 0
    result = json.loads(out)["result"]
    survival = result["survival"]
    assert all(a >= b for a, b in zip(survival, survival[1:]))
    assert result["slope"] < 0


def test_overshoot_command(capsys):
    code, out, _ = run(capsys, "overshoot", "--s", 1, "--sigma", 0, "--l", 10.5, "--trials", 20, "--seed", 1, "--threads", 1, "--quiet")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["mean_overshoot"] == pytest.approx(0.5)
    assert result["wald_bracket"] == [10.5, 12.5]


def test_igcheck_command(capsys):
    code, out, err = run(capsys, "igcheck", "--s", 1, "--l", 2, "--trials", 500, "--seed", 3, "--threads", 1, "--quiet", "--show-table")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "igcheck"
    assert doc["result"]["oracle_mean"] == 2.0
    assert 0 <= doc["result"]["statistic"] < 0.1
    assert "INVERSE-GAUSSIAN CHECK" in err


def test_igcheck_rejects_zero_drift(capsys):
    code, _, _ = run(capsys, "igcheck", "--s", 0, "--l", 2, "--seed", 3, "--quiet")
    assert code == 2


def test_json_floats_round_trip_in_shortest_form():
    values = [0.1, 1 / 3, 2.0**-40, 104.30012345678901]
    text = dumps(document("bounds", {}, {"values": values, "missing": float("inf")}))
    assert '"values": [\n      0.1,' in text
    doc = json.loads(text)
    assert doc["result"]["values"] == values
    assert doc["result"]["missing"] is None
