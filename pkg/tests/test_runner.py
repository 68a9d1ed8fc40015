import csv
import json

import numpy as np
import pytest

from qmlab import ThreePolarizerModel, extrema_curve
from qmlab.cli import main
from qmlab.errors import ConfigError, ValidationError
from qmlab.io import read_curve_csv, sha256_file, write_curve_csv
from qmlab.runner import (
    EXPERIMENTS,
    config_from_dict,
    default_output_dir,
    load_config,
    run,
    validate,
    verify_manifest,
)


def make_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


BELL_QM = {
    "experiment": "bell",
    "params": {"angles": [0.0, 45.0, 22.5, 67.5], "model": "qm"},
    "seed": 0,
}

EVOLVE_SMALL = {
    "experiment": "evolve",
    "params": {
        "grid": {"x_min": -20.0, "x_max": 20.0, "n_points": 256},
        "potential": {"kind": "free"},
        "initial": {"kind": "gaussian", "x0": 0.0, "sigma": 1.0, "k0": 1.0},
        "dt": 0.01,
        "n_steps": 20,
        "record_every": 10,
    },
    "seed": 1,
}


# ---------------------------------------------------------------------------
# config parsing and validation
# ---------------------------------------------------------------------------

def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError):
        config_from_dict({"experiment": "warp_drive", "params": {}})


def test_malformed_json_rejected(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_validate_clean_config():
    assert validate(config_from_dict(EVOLVE_SMALL)) == []


def test_validate_flags_nonpositive_dt():
    payload = json.loads(json.dumps(EVOLVE_SMALL))
    payload["params"]["dt"] = -0.5
    report = validate(config_from_dict(payload))
    assert any("dt" in v for v in report)


def test_validate_flags_small_grid():
    payload = json.loads(json.dumps(EVOLVE_SMALL))
    payload["params"]["grid"]["n_points"] = 4
    report = validate(config_from_dict(payload))
    assert any("n_points" in v for v in report)


def test_validate_flags_bell_angles():
    report = validate(config_from_dict({"experiment": "bell", "params": {"angles": [1, 2, 3]}}))
    assert any("angles" in v for v in report)


def test_validate_flags_missing_mc_pairs():
    cfg = config_from_dict({
        "experiment": "bell",
        "params": {"angles": [0, 45, 22.5, 67.5], "model": {"kind": "malus_stochastic"}},
    })
    assert any("n_pairs" in v for v in validate(cfg))


def test_run_refuses_invalid_config(tmp_path):
    payload = json.loads(json.dumps(EVOLVE_SMALL))
    payload["params"]["dt"] = 0.0
    with pytest.raises(ValidationError):
        run(config_from_dict(payload), output_dir=tmp_path / "out")


# ---------------------------------------------------------------------------
# experiments end to end
# ---------------------------------------------------------------------------

def test_run_bell_qm(tmp_path):
    manifest = run(config_from_dict(BELL_QM), output_dir=tmp_path / "out")
    payload = json.loads((tmp_path / "out" / "chsh.json").read_text())
    assert payload["s_value"] == pytest.approx(2.8284271247461903, abs=1e-12)
    assert payload["model_id"] == "qm"
    assert [o["name"] for o in manifest.outputs] == ["chsh.json"]
    verify_manifest(tmp_path / "out" / "run_manifest.json")


def test_run_three_polarizer_sweep(tmp_path):
    cfg = config_from_dict({
        "experiment": "three_polarizer",
        "params": {"alphas": "0:180:5"},
        "seed": 0,
    })
    run(cfg, output_dir=tmp_path / "out")
    with open(tmp_path / "out" / "min_transmission.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 37
    assert all(float(r["probability"]) <= 1e-9 for r in rows)
    betas = [float(r["beta_deg"]) for r in rows]
    alphas = [float(r["alpha_deg"]) for r in rows]
    assert np.allclose(betas, [(a + 90) % 180 for a in alphas], atol=1e-3)


def test_run_eigen(tmp_path):
    cfg = config_from_dict({
        "experiment": "eigen",
        "params": {
            "grid": {"x_min": -10.0, "x_max": 10.0, "n_points": 1000},
            "potential": {"kind": "harmonic", "omega": 1.0},
            "n_states": 4,
        },
    })
    run(cfg, output_dir=tmp_path / "out")
    with open(tmp_path / "out" / "energies.csv", newline="") as fh:
        energies = [float(r["energy"]) for r in csv.DictReader(fh)]
    assert np.allclose(energies, [0.5, 1.5, 2.5, 3.5], rtol=1e-3)
    with open(tmp_path / "out" / "states.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["x", "state_0", "state_1", "state_2", "state_3"]


def test_run_madelung(tmp_path):
    cfg = config_from_dict({
        "experiment": "madelung",
        "params": {
            "grid": {"x_min": -20.0, "x_max": 20.0, "n_points": 1601},
            "potential": {"kind": "free"},
            "initial": {"kind": "gaussian", "x0": -2.0, "sigma": 1.0, "k0": 1.0},
            "dt": 0.01,
            "n_steps": 20,
        },
    })
    run(cfg, output_dir=tmp_path / "out")
    with open(tmp_path / "out" / "fields.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["x", "lambda", "phi", "v_q", "momentum", "masked"]
    with open(tmp_path / "out" / "residuals.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    finite = [abs(float(r["r6"])) for r in rows if r["r6"] != "nan"]
    assert finite and max(finite) < 1e-2


def test_run_classical(tmp_path):
    cfg = config_from_dict({
        "experiment": "classical_compare",
        "params": {
            "potential": {"kind": "harmonic", "omega": 1.0},
            "initial": {"x": 1.0, "p": 0.0},
            "dt": 0.001,
            "n_steps": 100,
        },
    })
    run(cfg, output_dir=tmp_path / "out")
    with open(tmp_path / "out" / "trajectory.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 101
    assert float(rows[-1]["x"]) == pytest.approx(np.cos(0.1), abs=1e-6)


def test_snapshot_csv_schema(tmp_path):
    run(config_from_dict(EVOLVE_SMALL), output_dir=tmp_path / "out")
    with open(tmp_path / "out" / "snapshots.csv", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        first = next(reader)
    assert header == ["step", "t", "x", "re", "im"]
    assert first[0] == "0"


# ---------------------------------------------------------------------------
# determinism and manifests
# ---------------------------------------------------------------------------

def test_identical_runs_are_byte_identical(tmp_path):
    bell_mc = {
        "experiment": "bell",
        "params": {
            "angles": [0.0, 45.0, 22.5, 67.5],
            "model": {"kind": "malus_stochastic"},
            "n_pairs": 20_000,
            "delta_grid": "0:90:15",
        },
        "seed": 7,
    }
    for payload in (bell_mc, EVOLVE_SMALL):
        m1 = run(config_from_dict(payload), output_dir=tmp_path / "a")
        m2 = run(config_from_dict(payload), output_dir=tmp_path / "b")
        for o1, o2 in zip(m1.outputs, m2.outputs):
            assert o1["name"] == o2["name"]
            assert o1["sha256"] == o2["sha256"]
            bytes1 = (tmp_path / "a" / o1["name"]).read_bytes()
            bytes2 = (tmp_path / "b" / o2["name"]).read_bytes()
            assert bytes1 == bytes2


def test_manifest_lists_real_checksums(tmp_path):
    run(config_from_dict(EVOLVE_SMALL), output_dir=tmp_path / "out")
    manifest = json.loads((tmp_path / "out" / "run_manifest.json").read_text())
    assert manifest["experiment"] == "evolve"
    assert manifest["config"]["seed"] == 1
    for entry in manifest["outputs"]:
        assert sha256_file(tmp_path / "out" / entry["name"]) == entry["sha256"]


def test_default_output_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("QMLAB_OUTPUT_DIR", str(tmp_path / "roots"))
    cfg = config_from_dict(BELL_QM)
    assert default_output_dir(cfg) == tmp_path / "roots" / "bell-seed0"


# ---------------------------------------------------------------------------
# curve round trip
# ---------------------------------------------------------------------------

def test_curve_csv_round_trip(tmp_path):
    curve = extrema_curve(np.arange(0.0, 181.0, 15.0),
                          ThreePolarizerModel(0.95, 0.02, model_id="quantum_imperfect"))
    path = tmp_path / "curve.csv"
    write_curve_csv(path, curve)
    loaded = read_curve_csv(path)
    assert np.array_equal(loaded.alphas_deg, curve.alphas_deg)
    assert np.array_equal(loaded.betas_deg, curve.betas_deg)
    assert np.array_equal(loaded.probabilities, curve.probabilities)
    assert loaded.model_id == curve.model_id


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    out = capsys.readouterr().out.split()
    assert out == list(EXPERIMENTS)


def test_cli_run_config_file(tmp_path, capsys):
    cfg = make_config(tmp_path, BELL_QM)
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "chsh.json").exists()


def test_cli_run_flag_form(tmp_path):
    code = main(["run", "bell", "--angles", "0,45,22.5,67.5", "--model", "qm",
                 "--out", str(tmp_path / "out")])
    assert code == 0
    payload = json.loads((tmp_path / "out" / "chsh.json").read_text())
    assert payload["s_value"] == pytest.approx(2.8284, abs=1e-4)


def test_cli_run_three_polarizer_flags(tmp_path):
    code = main(["run", "three_polarizer", "--alpha-sweep", "0:180:5",
                 "--out", str(tmp_path / "out")])
    assert code == 0
    with open(tmp_path / "out" / "min_transmission.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 37


def test_cli_malformed_config_exits_2_without_outputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{definitely not json")
    out = tmp_path / "out"
    assert main(["run", str(bad), "--out", str(out)]) == 2
    assert not out.exists()


def test_cli_validation_failure_exits_3(tmp_path):
    payload = json.loads(json.dumps(EVOLVE_SMALL))
    payload["params"]["n_steps"] = 0
    cfg = make_config(tmp_path, payload)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 3
    assert not out.exists()


def test_cli_numerical_failure_exits_4(tmp_path):
    # packet centered far outside the grid underflows to the zero field
    payload = json.loads(json.dumps(EVOLVE_SMALL))
    payload["params"]["initial"]["x0"] = 1e6
    cfg = make_config(tmp_path, payload)
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 4


def test_cli_validate_subcommand(tmp_path, capsys):
    good = make_config(tmp_path, EVOLVE_SMALL, "good.json")
    assert main(["validate", str(good)]) == 0
    assert "ok" in capsys.readouterr().out

    payload = json.loads(json.dumps(EVOLVE_SMALL))
    payload["params"]["dt"] = -1
    bad = make_config(tmp_path, payload, "bad.json")
    assert main(["validate", str(bad)]) == 3
    assert "dt" in capsys.readouterr().out

    assert main(["validate", str(tmp_path / "missing.json")]) == 2


def test_cli_unknown_target_exits_2(tmp_path):
    assert main(["run", "not_an_experiment"]) == 2
