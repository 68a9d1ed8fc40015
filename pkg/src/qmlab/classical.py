"""Classical trajectories and the principal function, for comparison with the phase field.

Smooth potentials are integrated with velocity Verlet (symplectic, so the
energy error stays bounded instead of drifting).  The piecewise-constant
potentials (hard-wall well, rectangular barrier) get exact drift
propagation with analytic wall reflection and step crossing, since the
force is undefined at the discontinuities.

The principal function is accumulated along trajectories as the
Lagrangian action S(t) = integral of (p^2/2m - V), not by solving the
field equation globally; for force-free motion it coincides with the
phase of the matching plane wave up to a constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import (
    FiniteBarrier,
    Free,
    GridSpec,
    HarmonicOscillator,
    InfiniteWell,
    Potential,
    SystemConfig,
    potential_values,
)
from .errors import InsufficientSnapshotsError, InvalidSpecError

_MAX_EVENTS_PER_STEP = 1_000_000


@dataclass(frozen=True)
class ClassicalState:
    x: float
    p: float
    t: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.p) and np.isfinite(self.t)):
            raise InvalidSpecError("classical state must be finite")


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered samples with the conserved initial energy and accumulated action."""

    times: np.ndarray
    positions: np.ndarray
    momenta: np.ndarray
    energies: np.ndarray
    action: np.ndarray
    energy: float

    def states(self) -> Iterator[ClassicalState]:
        for t, x, p in zip(self.times, self.positions, self.momenta):
            yield ClassicalState(float(x), float(p), float(t))

    def __len__(self):
        return len(self.times)


def _force(potential: Potential, x: float, mass: float) -> float:
    if isinstance(potential, Free):
        return 0.0
    if isinstance(potential, HarmonicOscillator):
        return -mass * potential.omega**2 * x
    raise InvalidSpecError(f"potential {potential!r} has no smooth force")


def _is_piecewise(potential: Potential) -> bool:
    return isinstance(potential, (InfiniteWell, FiniteBarrier))


def _piecewise_layout(potential: Potential) -> tuple[list[float], list[float]]:
    """Interface positions and the potential level of each region between them."""
    if isinstance(potential, InfiniteWell):
        return [0.0, potential.length], [np.inf, 0.0, np.inf]
    lo, hi = potential.edges
    return [lo, hi], [0.0, potential.height, 0.0]


def _advance_piecewise(x: float, p: float, dt: float, interfaces: list[float],
                       levels: list[float], mass: float) -> tuple[float, float]:
    """Exact free drift with reflection/refraction events, for one step of size dt > 0."""
    remaining = dt
    for _ in range(_MAX_EVENTS_PER_STEP):
        if p == 0.0 or remaining <= 0.0:
            return x, p
        v = p / mass
        # next interface in the direction of motion, with the regions on either side
        if v > 0:
            ahead = [(b, i + 1) for i, b in enumerate(interfaces) if b > x]
            if not ahead:
                return x + v * remaining, p
            boundary, region_after = min(ahead)
        else:
            behind = [(b, i) for i, b in enumerate(interfaces) if b < x]
            if not behind:
                return x + v * remaining, p
            boundary, region_after = max(behind)
        region_before = region_after - 1 if v > 0 else region_after + 1
        t_hit = (boundary - x) / v
        if t_hit > remaining:
            return x + v * remaining, p
        remaining -= t_hit
        x = boundary
        dv = levels[region_after] - levels[region_before]
        if p * p / (2 * mass) > dv:
            p = np.sign(p) * np.sqrt(p * p - 2 * mass * dv)
            # nudge into the new region so the next event search moves on
            x = np.nextafter(x, x + np.sign(v))
        else:
            p = -p
            x = np.nextafter(x, x - np.sign(v))
    raise InvalidSpecError("too many wall events in a single step; dt is too large")


def integrate_hamilton(initial: ClassicalState, potential: Potential, config: SystemConfig,
                       dt: float, n_steps: int) -> Trajectory:
    """Integrate dx/dt = p/m, dp/dt = -V'(x) for n_steps steps of size dt.

    dt may be negative, which runs the (time-reversible) dynamics
    backwards.  Smooth potentials use velocity Verlet; the hard-wall well
    and the rectangular barrier use exact drift with elastic reflection
    (and, for the barrier, energy-conserving step crossing).
    """
    if dt == 0:
        raise InvalidSpecError("dt must be nonzero")
    if n_steps < 0:
        raise InvalidSpecError(f"n_steps must be non-negative, got {n_steps}")
    m = config.mass
    xs = np.empty(n_steps + 1)
    ps = np.empty(n_steps + 1)
    xs[0], ps[0] = initial.x, initial.p

    if _is_piecewise(potential):
        interfaces, levels = _piecewise_layout(potential)
        if isinstance(potential, InfiniteWell) and not (0.0 <= initial.x <= potential.length):
            raise InvalidSpecError(f"initial position {initial.x} lies outside the well")
        x, p = initial.x, initial.p
        for i in range(1, n_steps + 1):
            if dt > 0:
                x, p = _advance_piecewise(x, p, dt, interfaces, levels, m)
            else:
                # time reversal: flip momentum, advance, flip back
                x, p = _advance_piecewise(x, -p, -dt, interfaces, levels, m)
                p = -p
            xs[i], ps[i] = x, p
    else:
        x, p = initial.x, initial.p
        f = _force(potential, x, m)
        for i in range(1, n_steps + 1):
            x = x + (p / m) * dt + 0.5 * (f / m) * dt * dt
            f_new = _force(potential, x, m)
            p = p + 0.5 * (f + f_new) * dt
            f = f_new
            xs[i], ps[i] = x, p

    times = initial.t + dt * np.arange(n_steps + 1)
    v_samples = potential_values(potential, xs, m)
    energies = ps**2 / (2 * m) + v_samples
    lagrangian = ps**2 / (2 * m) - v_samples
    action = np.concatenate(([0.0], cumulative_trapezoid(lagrangian, times))) if n_steps else np.zeros(1)
    return Trajectory(times, xs, ps, energies, action, float(energies[0]))


def principal_function(traj: Trajectory, potential: Potential, config: SystemConfig,
                       s0: float = 0.0) -> np.ndarray:
    """Action S(t) accumulated along the trajectory by the trapezoid rule, plus s0."""
    if len(traj) == 1:
        return np.array([s0])
    v = potential_values(potential, traj.positions, config.mass)
    lagrangian = traj.momenta**2 / (2 * config.mass) - v
    return s0 + np.concatenate(([0.0], cumulative_trapezoid(lagrangian, traj.times)))


def hj_residual(s_field: np.ndarray, times: np.ndarray, grid: GridSpec,
                potential: Potential, config: SystemConfig) -> np.ndarray:
    """Residual (grad S)^2/2m + V + d_t S of a sampled action field.

    ``s_field`` has one row per time slice; at least three equally spaced
    slices are required.  Returns one row per interior time slice with
    NaN in the boundary columns (and wherever the stencil meets a NaN in
    the input, so masked phase fields pass through gracefully).
    """
    s_field = np.asarray(s_field, dtype=float)
    times = np.asarray(times, dtype=float)
    if s_field.ndim != 2 or s_field.shape[0] != times.size:
        raise InvalidSpecError("s_field must be (n_times, n_points) matching times")
    if s_field.shape[1] != grid.n_points:
        raise InvalidSpecError("s_field columns must match the grid")
    if times.size < 3:
        raise InsufficientSnapshotsError(f"need at least 3 time slices, got {times.size}")
    steps = np.diff(times)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * np.max(np.abs(steps)):
        raise InvalidSpecError("time slices must be strictly increasing and equally spaced")
    dt = steps[0]
    dx = grid.dx
    v = potential_values(potential, grid.x, config.mass)

    mid = s_field[1:-1]
    grad = np.full_like(mid, np.nan)
    grad[:, 1:-1] = (mid[:, 2:] - mid[:, :-2]) / (2 * dx)
    dt_s = (s_field[2:] - s_field[:-2]) / (2 * dt)
    with np.errstate(invalid="ignore"):
        return grad**2 / (2 * config.mass) + v[np.newaxis, :] + dt_s
