"""Batch experiment runner: one JSON config in, CSV/JSON payloads plus a manifest out.

A config names one experiment, its parameter block, a seed and an output
directory.  ``validate`` checks every module precondition reachable from
the config without computing anything; ``run`` executes the experiment,
writes its payload files and a ``run_manifest.json`` with a sha256
checksum per payload.  Payloads carry no timestamps, so identical
config + seed reproduces them byte for byte (the manifest's timestamps
are metadata, not part of any checksummed payload).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bell import (
    DeterministicThreshold,
    MalusStochastic,
    QuantumModel,
    chsh_statistic,
    compare_predictions,
)
from .classical import ClassicalState, integrate_hamilton
from .core import (
    FiniteBarrier,
    Free,
    GridSpec,
    HarmonicOscillator,
    InfiniteWell,
    SystemConfig,
    gaussian_packet,
    plane_wave,
)
from .errors import ConfigError, QmlabError, ValidationError
from .evolution import PropagationPlan, propagate, solve_stationary
from .io import (
    chsh_payload,
    sha256_file,
    write_curve_csv,
    write_eigen_csv,
    write_json,
    write_madelung_csv,
    write_predictions_csv,
    write_residuals_csv,
    write_snapshots_csv,
    write_trajectory_csv,
)
from .madelung import decompose_series, madelung_residuals
from .polarization import ThreePolarizerModel, extrema_curve

EXPERIMENTS = (
    "evolve",
    "eigen",
    "madelung",
    "classical_compare",
    "three_polarizer",
    "bell",
)

OUTPUT_DIR_ENV = "QMLAB_OUTPUT_DIR"

#: simulation-facing grids must have enough points for interior stencils
MIN_EXPERIMENT_GRID_POINTS = 8


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict
    seed: int = 0
    output_dir: Path | None = None


@dataclass(frozen=True)
class RunManifest:
    experiment: str
    config: dict
    version: str
    started: str
    finished: str
    outputs: list[dict] = field(default_factory=list)


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a config file; raises ConfigError on malformed or unknown input."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return config_from_dict(raw, source=str(path))


def config_from_dict(raw: dict, source: str = "<dict>") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: config must be a JSON object")
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"{source}: unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{source}: params must be an object")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"{source}: seed must be a non-negative integer")
    output_dir = raw.get("output_dir")
    return ExperimentConfig(
        experiment=experiment,
        params=params,
        seed=seed,
        output_dir=Path(output_dir) if output_dir else None,
    )


# ---------------------------------------------------------------------------
# validation (no compute)
# ---------------------------------------------------------------------------

def _check_number(params, key, report, *, positive=False, minimum=None, required=True, integer=False):
    if key not in params:
        if required:
            report.append(f"missing parameter '{key}'")
        return None
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        report.append(f"'{key}' must be a number, got {value!r}")
        return None
    if integer and not isinstance(value, int):
        report.append(f"'{key}' must be an integer, got {value!r}")
        return None
    if positive and not value > 0:
        report.append(f"'{key}' must be positive, got {value}")
        return None
    if minimum is not None and value < minimum:
        report.append(f"'{key}' must be at least {minimum}, got {value}")
        return None
    return value


def _validate_grid(params: dict, report: list) -> None:
    grid = params.get("grid")
    if not isinstance(grid, dict):
        report.append("missing or malformed 'grid' block")
        return
    x_min = _check_number(grid, "x_min", report)
    x_max = _check_number(grid, "x_max", report)
    n_points = _check_number(grid, "n_points", report, integer=True)
    if x_min is not None and x_max is not None and not x_max > x_min:
        report.append(f"grid 'x_max' ({x_max}) must exceed 'x_min' ({x_min})")
    if n_points is not None and n_points < MIN_EXPERIMENT_GRID_POINTS:
        report.append(f"grid 'n_points' too small for an experiment: {n_points} < {MIN_EXPERIMENT_GRID_POINTS}")


def _validate_potential(params: dict, report: list) -> None:
    pot = params.get("potential", {"kind": "free"})
    if not isinstance(pot, dict) or "kind" not in pot:
        report.append("'potential' must be an object with a 'kind'")
        return
    kind = pot["kind"]
    if kind == "free":
        return
    if kind == "harmonic":
        _check_number(pot, "omega", report, positive=True, required=False)
    elif kind == "infinite_well":
        _check_number(pot, "length", report, positive=True, required=False)
    elif kind == "barrier":
        _check_number(pot, "height", report)
        _check_number(pot, "width", report, positive=True)
        _check_number(pot, "center", report, required=False)
    else:
        report.append(f"unknown potential kind {kind!r}")


def _validate_initial(params: dict, report: list) -> None:
    init = params.get("initial")
    if not isinstance(init, dict) or "kind" not in init:
        report.append("'initial' must be an object with a 'kind'")
        return
    kind = init["kind"]
    if kind == "gaussian":
        _check_number(init, "x0", report)
        _check_number(init, "sigma", report, positive=True)
        _check_number(init, "k0", report, required=False)
    elif kind == "plane_wave":
        _check_number(init, "k", report)
    elif kind == "eigenstate":
        _check_number(init, "index", report, integer=True, minimum=0)
    else:
        report.append(f"unknown initial state kind {kind!r}")


def _validate_evolution(params: dict, report: list) -> None:
    _validate_grid(params, report)
    _validate_potential(params, report)
    _validate_initial(params, report)
    _check_number(params, "dt", report, positive=True)
    _check_number(params, "n_steps", report, integer=True, minimum=1)
    _check_number(params, "record_every", report, integer=True, minimum=1, required=False)
    _check_number(params, "hbar", report, positive=True, required=False)
    _check_number(params, "mass", report, positive=True, required=False)


def _validate_bell_model(params: dict, report: list) -> object | None:
    model = params.get("model", "qm")
    if model == "qm":
        return QuantumModel()
    if isinstance(model, dict):
        kind = model.get("kind")
        if kind == "malus_stochastic":
            return MalusStochastic()
        if kind == "deterministic_threshold":
            threshold = _check_number(model, "threshold", report, required=False)
            if threshold is not None and not 0 < threshold <= 1:
                report.append(f"'threshold' must lie in (0, 1], got {threshold}")
                return None
            return DeterministicThreshold(threshold if threshold is not None else 0.5)
    report.append(f"unknown bell model {model!r}")
    return None


def _parse_sweep(value) -> list[float]:
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) != 3:
            raise ConfigError(f"sweep string must be start:stop:step, got {value!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"bad sweep bounds {value!r}")
        return list(np.arange(start, stop + step / 2, step))
    if isinstance(value, (list, tuple)) and value:
        return [float(v) for v in value]
    raise ConfigError(f"sweep must be a start:stop:step string or a non-empty list, got {value!r}")


def validate(config: ExperimentConfig) -> list[str]:
    """Check every module precondition reachable from the config; empty list = valid."""
    report: list[str] = []
    params = config.params
    if config.experiment in ("evolve", "madelung"):
        _validate_evolution(params, report)
        if config.experiment == "madelung":
            _check_number(params, "epsilon_node", report, positive=True, required=False)
            n_steps = params.get("n_steps")
            record = params.get("record_every", 1)
            if isinstance(n_steps, int) and isinstance(record, int) and record >= 1:
                if n_steps // record + 1 < 3:
                    report.append("'n_steps'/'record_every' must yield at least 3 snapshots for residuals")
    elif config.experiment == "eigen":
        _validate_grid(params, report)
        _validate_potential(params, report)
        _check_number(params, "hbar", report, positive=True, required=False)
        _check_number(params, "mass", report, positive=True, required=False)
        n_states = _check_number(params, "n_states", report, integer=True, minimum=1)
        grid = params.get("grid")
        if n_states is not None and isinstance(grid, dict) and isinstance(grid.get("n_points"), int):
            if n_states > (grid["n_points"] - 2) // 2:
                report.append(f"'n_states' ({n_states}) must stay well below n_points ({grid['n_points']})")
    elif config.experiment == "classical_compare":
        _validate_potential(params, report)
        init = params.get("initial")
        if not isinstance(init, dict):
            report.append("'initial' must be an object with 'x' and 'p'")
        else:
            _check_number(init, "x", report)
            _check_number(init, "p", report)
        _check_number(params, "dt", report, positive=True)
        _check_number(params, "n_steps", report, integer=True, minimum=1)
        _check_number(params, "mass", report, positive=True, required=False)
    elif config.experiment == "three_polarizer":
        try:
            _parse_sweep(params.get("alphas", "0:180:5"))
        except ConfigError as exc:
            report.append(str(exc))
        model = params.get("model", {})
        if not isinstance(model, dict):
            report.append("'model' must be an object")
        else:
            k_par = _check_number(model, "k_parallel", report, required=False)
            k_perp = _check_number(model, "k_perp", report, required=False)
            k_par = 1.0 if k_par is None else k_par
            k_perp = 0.0 if k_perp is None else k_perp
            if not 0 <= k_perp < k_par <= 1:
                report.append(f"need 0 <= k_perp < k_parallel <= 1, got k_perp={k_perp}, k_parallel={k_par}")
    elif config.experiment == "bell":
        angles = params.get("angles")
        if not (isinstance(angles, (list, tuple)) and len(angles) == 4
                and all(isinstance(a, (int, float)) and not isinstance(a, bool) for a in angles)):
            report.append("'angles' must be four numbers [a, a_prime, b, b_prime]")
        model = _validate_bell_model(params, report)
        if model is not None and not isinstance(model, QuantumModel):
            _check_number(params, "n_pairs", report, integer=True, minimum=10_000)
        if "delta_grid" in params:
            try:
                _parse_sweep(params["delta_grid"])
            except ConfigError as exc:
                report.append(str(exc))
    else:  # pragma: no cover - config_from_dict rejects unknown ids
        report.append(f"unknown experiment {config.experiment!r}")
    return report


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def _build_potential(params: dict):
    pot = params.get("potential", {"kind": "free"})
    kind = pot["kind"]
    if kind == "free":
        return Free()
    if kind == "harmonic":
        return HarmonicOscillator(pot.get("omega", 1.0))
    if kind == "infinite_well":
        return InfiniteWell(pot.get("length", 1.0))
    return FiniteBarrier(pot["height"], pot["width"], pot.get("center", 0.0))


def _build_system(params: dict) -> SystemConfig:
    grid = params["grid"]
    return SystemConfig(
        grid=GridSpec(grid["x_min"], grid["x_max"], grid["n_points"]),
        hbar=params.get("hbar", 1.0),
        mass=params.get("mass", 1.0),
    )


def _build_initial(params: dict, system: SystemConfig, potential):
    init = params["initial"]
    kind = init["kind"]
    if kind == "gaussian":
        return gaussian_packet(system.grid, init["x0"], init["sigma"], init.get("k0", 0.0))
    if kind == "plane_wave":
        return plane_wave(system.grid, init["k"])
    pairs = solve_stationary(potential, system, init["index"] + 1)
    return pairs[init["index"]].state


def _run_evolve(config: ExperimentConfig, outdir: Path) -> list[Path]:
    params = config.params
    system = _build_system(params)
    potential = _build_potential(params)
    psi = _build_initial(params, system, potential)
    plan = PropagationPlan(params["dt"], params["n_steps"], params.get("record_every", 1))
    result = propagate(psi, potential, system, plan)
    return [write_snapshots_csv(outdir / "snapshots.csv", result)]


def _run_eigen(config: ExperimentConfig, outdir: Path) -> list[Path]:
    params = config.params
    system = _build_system(params)
    pairs = solve_stationary(_build_potential(params), system, params["n_states"])
    energies, states = write_eigen_csv(outdir / "energies.csv", outdir / "states.csv", pairs)
    return [energies, states]


def _run_madelung(config: ExperimentConfig, outdir: Path) -> list[Path]:
    params = config.params
    system = _build_system(params)
    potential = _build_potential(params)
    psi = _build_initial(params, system, potential)
    plan = PropagationPlan(params["dt"], params["n_steps"], params.get("record_every", 1))
    result = propagate(psi, potential, system, plan)
    fields = decompose_series(result, system, params.get("epsilon_node"))
    residuals = madelung_residuals(fields, potential, system)
    mid = len(fields) // 2
    return [
        write_madelung_csv(outdir / "fields.csv", fields[mid]),
        write_residuals_csv(outdir / "residuals.csv", fields[mid].x,
                            residuals.hamilton_jacobi, residuals.continuity),
    ]


def _run_classical(config: ExperimentConfig, outdir: Path) -> list[Path]:
    params = config.params
    system = SystemConfig(hbar=params.get("hbar", 1.0), mass=params.get("mass", 1.0))
    potential = _build_potential(params)
    initial = ClassicalState(params["initial"]["x"], params["initial"]["p"])
    traj = integrate_hamilton(initial, potential, system, params["dt"], params["n_steps"])
    return [write_trajectory_csv(outdir / "trajectory.csv", traj)]


def _run_three_polarizer(config: ExperimentConfig, outdir: Path) -> list[Path]:
    params = config.params
    alphas = _parse_sweep(params.get("alphas", "0:180:5"))
    model_params = params.get("model", {})
    model = ThreePolarizerModel(
        k_parallel=model_params.get("k_parallel", 1.0),
        k_perp=model_params.get("k_perp", 0.0),
        model_id=model_params.get("model_id", "quantum"),
    )
    curve = extrema_curve(alphas, model)
    return [write_curve_csv(outdir / "min_transmission.csv", curve)]


def _run_bell(config: ExperimentConfig, outdir: Path) -> list[Path]:
    params = config.params
    report: list[str] = []
    model = _validate_bell_model(params, report)
    if report or model is None:
        raise ValidationError(report or ["bad bell model"])
    a, a_prime, b, b_prime = (float(v) for v in params["angles"])
    if isinstance(model, QuantumModel):
        result = chsh_statistic(a, a_prime, b, b_prime, model)
    else:
        result = chsh_statistic(a, a_prime, b, b_prime, model,
                                n_pairs=params["n_pairs"], seed=config.seed)
    outputs = [write_json(outdir / "chsh.json", chsh_payload(result))]
    if "delta_grid" in params:
        deltas = _parse_sweep(params["delta_grid"])
        lhv = model if not isinstance(model, QuantumModel) else MalusStochastic()
        if isinstance(lhv, MalusStochastic) and "n_pairs" not in params:
            rows = compare_predictions(deltas, lhv)
        else:
            rows = compare_predictions(deltas, lhv, n_pairs=params.get("n_pairs", 100_000),
                                       seed=config.seed)
        outputs.append(write_predictions_csv(outdir / "compare.csv", rows))
    return outputs


_RUNNERS = {
    "evolve": _run_evolve,
    "eigen": _run_eigen,
    "madelung": _run_madelung,
    "classical_compare": _run_classical,
    "three_polarizer": _run_three_polarizer,
    "bell": _run_bell,
}


def default_output_dir(config: ExperimentConfig) -> Path:
    if config.output_dir is not None:
        return config.output_dir
    env = os.environ.get(OUTPUT_DIR_ENV)
    base = Path(env) if env else Path("runs")
    return base / f"{config.experiment}-seed{config.seed}"


def run(config: ExperimentConfig, output_dir: Path | None = None) -> RunManifest:
    """Validate, execute and checksum one experiment; returns the written manifest."""
    violations = validate(config)
    if violations:
        raise ValidationError(violations)
    outdir = Path(output_dir) if output_dir is not None else default_output_dir(config)
    outdir.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    outputs = _RUNNERS[config.experiment](config, outdir)
    finished = datetime.now(timezone.utc).isoformat()
    manifest = RunManifest(
        experiment=config.experiment,
        config={
            "experiment": config.experiment,
            "params": config.params,
            "seed": config.seed,
        },
        version=__version__,
        started=started,
        finished=finished,
        outputs=[
            {"name": p.name, "sha256": sha256_file(p), "bytes": p.stat().st_size}
            for p in outputs
        ],
    )
    write_json(outdir / "run_manifest.json", {
        "experiment": manifest.experiment,
        "config": manifest.config,
        "version": manifest.version,
        "started": manifest.started,
        "finished": manifest.finished,
        "outputs": manifest.outputs,
    })
    verify_manifest(outdir / "run_manifest.json")
    return manifest


def verify_manifest(manifest_path: str | Path) -> None:
    """Re-check that every file listed in a manifest exists and matches its checksum."""
    manifest_path = Path(manifest_path)
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    for entry in manifest["outputs"]:
        target = manifest_path.parent / entry["name"]
        if not target.exists():
            raise QmlabError(f"manifest names missing file {target}")
        digest = sha256_file(target)
        if digest != entry["sha256"]:
            raise QmlabError(f"checksum mismatch for {target}: {digest} != {entry['sha256']}")
