"""CSV and JSON emission with a pinned, byte-reproducible dialect.

Comma separator, ``.`` decimal point, one header row, LF line endings,
floats printed with 17 significant digits so every value round-trips to
the identical double.  Payload files never contain timestamps; rerunning
the same experiment with the same seed must reproduce them byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bell import CHSHResult, CoincidenceStats, PredictionRow
from .classical import Trajectory
from .evolution import EigenPair, PropagationResult
from .madelung import MadelungFields
from .polarization import TransmissionCurve


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# per-artifact writers
# ---------------------------------------------------------------------------

def write_snapshots_csv(path: Path, result: PropagationResult) -> Path:
    """Long-format snapshot series: step, t, x, re, im."""
    def rows():
        for step, state in zip(result.steps, result.states):
            x = state.x
            for i in range(x.size):
                yield (step, state.time, x[i], state.values[i].real, state.values[i].imag)

    return write_csv(path, ["step", "t", "x", "re", "im"], rows())


def write_eigen_csv(energies_path: Path, states_path: Path, pairs: Sequence[EigenPair]) -> tuple[Path, Path]:
    write_csv(energies_path, ["index", "energy"], [(p.index, p.energy) for p in pairs])
    x = pairs[0].state.x
    header = ["x"] + [f"state_{p.index}" for p in pairs]
    rows = (
        [x[i]] + [p.state.values[i].real for p in pairs]
        for i in range(x.size)
    )
    write_csv(states_path, header, rows)
    return Path(energies_path), Path(states_path)


def write_madelung_csv(path: Path, fields: MadelungFields) -> Path:
    """Columns: x, lambda, phi, v_q, momentum, masked."""
    x = fields.x
    rows = (
        (
            x[i],
            fields.amplitude[i],
            fields.phase[i],
            fields.quantum_potential[i],
            fields.momentum[i],
            bool(fields.node_mask[i]),
        )
        for i in range(x.size)
    )
    return write_csv(path, ["x", "lambda", "phi", "v_q", "momentum", "masked"], rows)


def write_residuals_csv(path: Path, x: np.ndarray, r_hj: np.ndarray, r_cont: np.ndarray) -> Path:
    rows = ((x[i], r_hj[i], r_cont[i]) for i in range(x.size))
    return write_csv(path, ["x", "r6", "r7"], rows)


def write_trajectory_csv(path: Path, traj: Trajectory) -> Path:
    rows = (
        (traj.times[i], traj.positions[i], traj.momenta[i], traj.energies[i], traj.action[i])
        for i in range(len(traj))
    )
    return write_csv(path, ["t", "x", "p", "energy", "action"], rows)


def write_curve_csv(path: Path, curve: TransmissionCurve) -> Path:
    rows = (
        (curve.alphas_deg[i], curve.betas_deg[i], curve.probabilities[i], curve.model_id)
        for i in range(len(curve))
    )
    return write_csv(path, ["alpha_deg", "beta_deg", "probability", "model_id"], rows)


def read_curve_csv(path: Path) -> TransmissionCurve:
    alphas, betas, probs, model_ids = [], [], [], []
    with open(path, newline="") as fh:
        for record in csv.DictReader(fh):
            alphas.append(float(record["alpha_deg"]))
            betas.append(float(record["beta_deg"]))
            probs.append(float(record["probability"]))
            model_ids.append(record["model_id"])
    model_id = model_ids[0] if model_ids else "model"
    return TransmissionCurve(np.array(alphas), np.array(betas), np.array(probs), model_id)


def write_predictions_csv(path: Path, rows: Sequence[PredictionRow]) -> Path:
    return write_csv(
        path,
        ["delta_deg", "p_qm", "p_lhv", "stderr"],
        ((r.delta_deg, r.p_qm, r.p_lhv, r.stderr) for r in rows),
    )


def coincidence_stats_payload(stats: CoincidenceStats) -> dict:
    payload = asdict(stats)
    payload["p11"] = stats.p11
    payload["p11_stderr"] = stats.p11_stderr
    payload["correlation"] = stats.correlation
    return payload


def chsh_payload(result: CHSHResult) -> dict:
    return {
        "settings": [{"a_deg": s.a_deg, "b_deg": s.b_deg} for s in result.settings],
        "correlations": list(result.correlations),
        "s_value": result.s_value,
        "stderr": result.stderr,
        "model_id": result.model_id,
        "n_pairs": result.n_pairs,
        "rng_seed": result.rng_seed,
        "conventions": {
            "coincidence": "detection/non-detection counting (one-channel)",
            "correlation": "two-channel, non-detection counted as the 0 channel",
        },
    }
