"""Polar decomposition psi = amplitude * exp(i phase / hbar) and what follows from it.

Splitting the complex field into a real amplitude and a real phase turns
the linear wave equation into two coupled real equations: a
Hamilton-Jacobi-like equation with one extra term (the quantum potential)

    V_q = -(hbar^2 / 2m) * amplitude'' / amplitude

and a continuity equation for the amplitude.  This module extracts the
real fields from a wavefunction, evaluates the quantum potential and the
momentum field, and measures how well a time series of decomposed
snapshots satisfies the two real equations (the residuals vanish as
O(dx^2 + dt^2) for fields produced by the evolution module).

Phase is undefined where the amplitude vanishes, so points with
amplitude below a threshold are masked and carry NaN sentinels; each
contiguous unmasked segment is phase-unwrapped independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import GridSpec, Potential, SystemConfig, WaveFunction, potential_values
from .errors import (
    AllMaskedError,
    GridMismatchError,
    InsufficientSnapshotsError,
    InvalidSpecError,
)

#: default node threshold as a fraction of max amplitude
DEFAULT_NODE_FRACTION = 1e-6


@dataclass(frozen=True)
class MadelungFields:
    """Real fields of one snapshot: amplitude, unwrapped phase, V_q, grad(phase).

    Masked points (amplitude below the node threshold) carry NaN in
    phase, quantum_potential and momentum; amplitude itself is kept as
    the true |psi| everywhere.  quantum_potential and momentum are also
    NaN at boundary points and wherever a stencil neighbor is masked.
    """

    grid: GridSpec
    time: float
    hbar: float
    amplitude: np.ndarray
    phase: np.ndarray
    quantum_potential: np.ndarray
    momentum: np.ndarray
    node_mask: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def reconstructed(self) -> np.ndarray:
        """amplitude * e^{i phase / hbar}; NaN at masked points."""
        return self.amplitude * np.exp(1j * self.phase / self.hbar)


def _segments(unmasked: np.ndarray):
    """Yield (start, stop) index ranges of consecutive unmasked points."""
    idx = np.flatnonzero(unmasked)
    if idx.size == 0:
        return
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([idx[0]], idx[breaks + 1]))
    stops = np.concatenate((idx[breaks] + 1, [idx[-1] + 1]))
    yield from zip(starts, stops)


def _unwrapped_phase(values: np.ndarray, mask: np.ndarray, hbar: float) -> np.ndarray:
    phase = np.full(values.shape, np.nan)
    for start, stop in _segments(~mask):
        phase[start:stop] = hbar * np.unwrap(np.angle(values[start:stop]))
    return phase


def _stencil_valid(mask: np.ndarray) -> np.ndarray:
    """Interior points whose three-point stencil touches no masked cell."""
    ok = ~mask
    valid = np.zeros_like(mask)
    valid[1:-1] = ok[1:-1] & ok[:-2] & ok[2:]
    return valid


def _masked_laplacian(values: np.ndarray, mask: np.ndarray, dx: float) -> np.ndarray:
    out = np.full(values.shape, np.nan)
    valid = _stencil_valid(mask)
    i = np.flatnonzero(valid)
    out[i] = (values[i + 1] - 2 * values[i] + values[i - 1]) / dx**2
    return out


def _masked_gradient(values: np.ndarray, mask: np.ndarray, dx: float) -> np.ndarray:
    out = np.full(values.shape, np.nan)
    valid = _stencil_valid(mask)
    i = np.flatnonzero(valid)
    out[i] = (values[i + 1] - values[i - 1]) / (2 * dx)
    return out


def decompose(psi: WaveFunction, config: SystemConfig, epsilon_node: float | None = None) -> MadelungFields:
    """Split psi into amplitude, unwrapped phase, quantum potential and momentum.

    ``epsilon_node`` is the absolute amplitude below which a point counts
    as a node; it defaults to 1e-6 times the maximum amplitude.  The
    phase is unwrapped left to right within each unmasked segment (jumps
    beyond pi*hbar corrected by multiples of 2*pi*hbar); segments do not
    share an offset, since phase carries no information across a node.
    """
    amplitude = np.abs(psi.values)
    peak = float(amplitude.max())
    if peak == 0.0:
        raise AllMaskedError("the zero field has no amplitude anywhere")
    if epsilon_node is None:
        epsilon_node = DEFAULT_NODE_FRACTION * peak
    if not epsilon_node > 0:
        raise InvalidSpecError(f"epsilon_node must be positive, got {epsilon_node}")
    mask = amplitude < epsilon_node
    if mask.all():
        raise AllMaskedError("every grid point is below the node threshold")
    hbar = config.hbar
    phase = _unwrapped_phase(psi.values, mask, hbar)
    v_q = _quantum_potential_arrays(amplitude, mask, psi.grid.dx, hbar, config.mass)
    momentum = _masked_gradient(phase, mask, psi.grid.dx)
    return MadelungFields(
        grid=psi.grid,
        time=psi.time,
        hbar=hbar,
        amplitude=amplitude,
        phase=phase,
        quantum_potential=v_q,
        momentum=momentum,
        node_mask=mask,
    )


def _quantum_potential_arrays(amplitude, mask, dx, hbar, mass) -> np.ndarray:
    # Same 3-point stencil as the discrete Hamiltonian, so V + V_q - E
    # vanishes to round-off on computed eigenstates.
    lap = _masked_laplacian(amplitude, mask, dx)
    with np.errstate(invalid="ignore"):
        return -(hbar**2 / (2 * mass)) * lap / amplitude


def quantum_potential(fields: MadelungFields, config: SystemConfig) -> np.ndarray:
    """V_q = -(hbar^2/2m) (Laplacian of amplitude) / amplitude; NaN where undefined."""
    return _quantum_potential_arrays(
        fields.amplitude, fields.node_mask, fields.grid.dx, config.hbar, config.mass
    )


def bohm_momentum(fields: MadelungFields) -> np.ndarray:
    """Momentum field, the central-difference gradient of the unwrapped phase."""
    return _masked_gradient(fields.phase, fields.node_mask, fields.grid.dx)


@dataclass(frozen=True)
class MadelungResiduals:
    """Pointwise residuals of the two real field equations at one instant.

    hamilton_jacobi:  (grad phase)^2 / 2m + V + V_q + d_t phase
    continuity:       lap phase + 2 grad phase . grad ln(amplitude) + 2m d_t ln(amplitude)

    Both vanish for exact solutions; NaN outside the jointly valid points.
    """

    grid: GridSpec
    time: float
    hamilton_jacobi: np.ndarray
    continuity: np.ndarray
    valid: np.ndarray


def _align_phase(phase: np.ndarray, reference: np.ndarray, unmasked: np.ndarray, hbar: float) -> np.ndarray:
    """Shift each unmasked segment of ``phase`` by a multiple of 2 pi hbar onto ``reference``.

    Independent unwrapping leaves each snapshot's segment offset arbitrary
    modulo 2 pi hbar; time differences need the offsets pinned down.
    """
    out = phase.copy()
    two_pi = 2 * np.pi * hbar
    for start, stop in _segments(unmasked):
        k = np.round(np.nanmedian(phase[start:stop] - reference[start:stop]) / two_pi)
        if k != 0:
            out[start:stop] -= k * two_pi
    return out


def madelung_residuals(fields_series: Sequence[MadelungFields], potential: Potential,
                       config: SystemConfig) -> MadelungResiduals:
    """Residuals of the two real equations at the middle snapshot of a series.

    Needs at least three equally spaced snapshots; time derivatives are
    central differences over the triple centered on the middle snapshot.
    """
    if len(fields_series) < 3:
        raise InsufficientSnapshotsError(
            f"need at least 3 snapshots for central time differences, got {len(fields_series)}"
        )
    mid = len(fields_series) // 2
    prev, cur, nxt = fields_series[mid - 1], fields_series[mid], fields_series[mid + 1]
    for f in (prev, nxt):
        if f.grid != cur.grid:
            raise GridMismatchError("snapshots sampled on different grids")
    dt_minus = cur.time - prev.time
    dt_plus = nxt.time - cur.time
    if dt_minus <= 0 or abs(dt_plus - dt_minus) > 1e-9 * max(abs(dt_plus), abs(dt_minus)):
        raise InvalidSpecError(
            f"snapshots must be equally spaced in time, got dt = {dt_minus}, {dt_plus}"
        )
    dt = dt_minus
    dx = cur.grid.dx
    m = config.mass

    joint_mask = prev.node_mask | cur.node_mask | nxt.node_mask
    unmasked = ~joint_mask
    phase_prev = _align_phase(prev.phase, cur.phase, unmasked, config.hbar)
    phase_next = _align_phase(nxt.phase, cur.phase, unmasked, config.hbar)

    valid = _stencil_valid(joint_mask)
    grad_phase = _masked_gradient(cur.phase, joint_mask, dx)
    lap_phase = _masked_laplacian(cur.phase, joint_mask, dx)
    ln_amp = []
    for f in (prev, cur, nxt):
        la = np.full(f.amplitude.shape, np.nan)
        np.log(f.amplitude, where=unmasked, out=la)
        ln_amp.append(la)
    with np.errstate(invalid="ignore", divide="ignore"):
        grad_ln_amp = _masked_gradient(ln_amp[1], joint_mask, dx)
        dt_phase = (phase_next - phase_prev) / (2 * dt)
        dt_ln_amp = (ln_amp[2] - ln_amp[0]) / (2 * dt)
        v = potential_values(potential, cur.x, m)
        v_q = _quantum_potential_arrays(cur.amplitude, joint_mask, dx, config.hbar, m)
        r_hj = grad_phase**2 / (2 * m) + v + v_q + dt_phase
        r_cont = lap_phase + 2 * grad_phase * grad_ln_amp + 2 * m * dt_ln_amp
    r_hj = np.where(valid, r_hj, np.nan)
    r_cont = np.where(valid, r_cont, np.nan)
    return MadelungResiduals(cur.grid, cur.time, r_hj, r_cont, valid)


def decompose_series(result, config: SystemConfig, epsilon_node: float | None = None) -> list[MadelungFields]:
    """Decompose every snapshot of a propagation result with one threshold rule."""
    return [decompose(s, config, epsilon_node) for s in result]
