import json

import pytest

from localiser_lab.cli import canonical_config_json, fmt, load_config, main, run, validate_config
from localiser_lab.errors import ConfigInvalid


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def index_config(**overrides):
    cfg = {
        "schema_version": 1,
        "command": "index",
        "model": {"type": "circle", "N": 256, "k": 1},
        "params": {"eps": 0.1, "delta": 0.1, "t": 20.0, "lambda": 200.5},
        "regime": "empirical",
    }
    cfg.update(overrides)
    return cfg


def test_config_validation_and_round_trip(tmp_path):
    cfg = index_config()
    validate_config(cfg)
    assert json.loads(canonical_config_json(cfg)) == cfg

    with pytest.raises(ConfigInvalid):
        validate_config(index_config(schema_version=2))
    with pytest.raises(ConfigInvalid):
        validate_config(index_config(command="bogus"))
    with pytest.raises(ConfigInvalid):
        validate_config({"schema_version": 1, "command": "index"})
    with pytest.raises(ConfigInvalid):
        load_config(str(tmp_path / "missing.json"))


def test_fmt_is_17_significant_digits():
    assert fmt(1.0 / 3.0) == "0.33333333333333331"
    assert fmt(True) == "true"
    assert fmt(7) == "7"


def test_index_command_end_to_end(tmp_path, capsys):
    path = write_config(tmp_path, index_config())
    out = tmp_path / "out"
    code = main(["index", "--config", path, "--out", str(out)])
    assert code == 0
    csv = (out / "report.csv").read_text().splitlines()
    assert csv[0].startswith("k,N,t,")
    row = dict(zip(csv[0].split(","), csv[1].split(",")))
    assert row["match"] == "true"
    assert row["index"] == row["oracle_index"]
    certs = json.loads((out / "certificates.json").read_text())
    assert certs["all_asserted_pass"]
    names = {c["name"] for c in certs["certificates"]}
    assert "index_matches_oracle" in names


def test_index_snap_is_reported(tmp_path, capsys):
    cfg = index_config()
    cfg["params"]["lambda"] = 200.0
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    assert main(["index", "--config", path, "--out", str(out)]) == 0
    console = capsys.readouterr().out
    assert "snapped" in console
    csv = (out / "report.csv").read_text().splitlines()
    row = dict(zip(csv[0].split(","), csv[1].split(",")))
    assert row["lambda_requested"] == "200"
    assert row["lambda"] == "200.5"


def test_csv_determinism(tmp_path):
    path = write_config(tmp_path, index_config())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["index", "--config", path, "--out", str(out1)])
    main(["index", "--config", path, "--out", str(out2)])
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()


def test_command_mismatch_is_config_error(tmp_path):
    path = write_config(tmp_path, index_config())
    assert main(["sweep", "--config", path]) == 2


def test_numerical_error_exit_code(tmp_path):
    cfg = index_config()
    cfg["params"]["lambda"] = 300.5  # exceeds N = 256
    path = write_config(tmp_path, cfg)
    assert main(["index", "--config", path]) == 1


def test_bounds_command(tmp_path):
    cfg = {
        "schema_version": 1,
        "command": "bounds",
        "model": {"type": "circle", "N": 128, "k": 1},
        "params": {"t_grid": [1.0, 10.0, 100.0], "s_grid": [0.0, 0.5]},
    }
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    assert main(["bounds", "--config", path, "--out", str(out)]) == 0
    csv = (out / "report.csv").read_text().splitlines()
    header = csv[0].split(",")
    passed_col = header.index("passed")
    assert all(line.split(",")[passed_col] == "true" for line in csv[1:])


def test_sweep_command_asserts_nothing(tmp_path):
    cfg = {
        "schema_version": 1,
        "command": "sweep",
        "model": {"type": "circle", "N": 64, "k": 1},
        "params": {"kappa_grid": [1e-6, 0.05], "lambda_grid": [10.5, 40.5, 80.5]},
    }
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    # kappa = 1e-6 may mismatch or be singular, lambda = 80.5 exceeds N;
    # sweeps record per-point outcomes and still exit 0
    assert main(["sweep", "--config", path, "--out", str(out)]) == 0
    csv = (out / "report.csv").read_text().splitlines()
    assert len(csv) == 1 + 6
    header = csv[0].split(",")
    err_col = header.index("error")
    errors = {line.split(",")[err_col] for line in csv[1:]}
    assert "TruncationTooSmall" in errors


def test_sweep_threads_deterministic(tmp_path, monkeypatch):
    cfg = {
        "schema_version": 1,
        "command": "sweep",
        "model": {"type": "circle", "N": 64, "k": 1},
        "params": {"kappa_grid": [0.02, 0.05, 0.1], "lambda_grid": [20.5, 40.5]},
    }
    path = write_config(tmp_path, cfg)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--config", path, "--out", str(out1)]) == 0
    monkeypatch.setenv("LOCALISER_LAB_THREADS", "4")
    assert main(["sweep", "--config", path, "--out", str(out2)]) == 0
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()


def test_index_theorem_regime(tmp_path):
    cfg = {
        "schema_version": 1,
        "command": "index",
        "model": {"type": "circle", "N": 2700000, "k": 1},
        "params": {"eps": 0.00124, "delta": 0.00124, "t": 3300.0, "lambda": 2661290.5},
        "regime": "theorem",
    }
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    assert main(["index", "--config", path, "--out", str(out)]) == 0
    csv = (out / "report.csv").read_text().splitlines()
    row = dict(zip(csv[0].split(","), csv[1].split(",")))
    assert row["layout"] == "banded"
    assert row["certified"] == "true"
    assert row["match"] == "true"


def test_semifinite_command(tmp_path):
    cfg = {
        "schema_version": 1,
        "command": "semifinite",
        "model": {"type": "block", "N": 256, "weights": [0.5, 0.25], "windings": [1, -2]},
        "params": {"eps": 0.1, "delta": 0.1, "t": 20.0, "lambda": 200.5},
    }
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    assert main(["semifinite", "--config", path, "--out", str(out)]) == 0
    certs = json.loads((out / "certificates.json").read_text())
    assert certs["all_asserted_pass"]


def test_asymptotic_command(tmp_path):
    cfg = {
        "schema_version": 1,
        "command": "asymptotic",
        "model": {"type": "circle", "N": 256, "k": 1},
        "params": {"t_grid": [1.0, 10.0, 100.0]},
    }
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    assert main(["asymptotic", "--config", path, "--out", str(out)]) == 0
    certs = json.loads((out / "certificates.json").read_text())
    by_name = {c["name"]: c for c in certs["certificates"]}
    assert by_name["d12_first_last_decrease"]["asserted"]
    assert by_name["d12_first_last_decrease"]["passed"]
    assert not by_name["d13_first_last_decrease"]["asserted"]


def test_run_rejects_wrong_model_kind(tmp_path):
    cfg = index_config(model={"type": "block", "N": 64, "weights": [1.0], "windings": [1]})
    with pytest.raises(ConfigInvalid):
        run(cfg)
