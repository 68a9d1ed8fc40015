"""Time propagation and stationary states of the discrete Hamiltonian.

The propagator is the implicit midpoint (Crank-Nicolson) scheme

    (1 + i dt H / 2 hbar) psi(t+dt) = (1 - i dt H / 2 hbar) psi(t)

with hard-wall (Dirichlet) boundaries: the two endpoint values are pinned
to zero and the tridiagonal system is solved on the interior points.  The
scheme is unconditionally stable and exactly unitary in the discrete
inner product, and it commutes with H, so <H> is conserved to round-off
for time-independent potentials.

Stationary states come from the symmetric tridiagonal eigensolver applied
to the same 3-point discretization, which keeps the two modules exactly
consistent with each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import (
    Potential,
    SystemConfig,
    WaveFunction,
    build_grid,
    check_well_alignment,
    potential_values,
)
from .errors import (
    EigensolverError,
    GridMismatchError,
    InvalidSpecError,
    LinearSolveError,
)


@dataclass(frozen=True)
class PropagationPlan:
    """Discretization of a propagation run."""

    dt: float
    n_steps: int
    record_every: int = 1
    boundary: str = "dirichlet"

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidSpecError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise InvalidSpecError(f"n_steps must be at least 1, got {self.n_steps}")
        if self.record_every < 1:
            raise InvalidSpecError(f"record_every must be at least 1, got {self.record_every}")
        if self.boundary != "dirichlet":
            raise InvalidSpecError(f"only dirichlet boundaries are supported, got {self.boundary!r}")


@dataclass(frozen=True)
class EigenPair:
    """One bound state of the discrete Hamiltonian."""

    index: int
    energy: float
    state: WaveFunction


@dataclass(frozen=True)
class PropagationResult:
    """Snapshots recorded along a propagation run; snapshot 0 is the input."""

    plan: PropagationPlan
    steps: tuple[int, ...]
    states: list[WaveFunction] = field(compare=False)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)


def _interior_hamiltonian(potential: Potential, config: SystemConfig) -> tuple[np.ndarray, float]:
    """Diagonal and off-diagonal of H restricted to interior grid points."""
    grid = config.grid
    if grid is None:
        raise InvalidSpecError("this operation needs a SystemConfig with a grid")
    if grid.n_points < 4:
        raise InvalidSpecError(f"need at least 4 grid points for an interior operator, got {grid.n_points}")
    check_well_alignment(potential, grid)
    x = build_grid(grid)[1:-1]
    v = potential_values(potential, x, config.mass)
    dx = grid.dx
    diag = config.hbar**2 / (config.mass * dx**2) + v
    off = -config.hbar**2 / (2 * config.mass * dx**2)
    return diag, off


class _CrankNicolsonStepper:
    """Prefactored matrices for repeated steps of a fixed (grid, potential, dt)."""

    def __init__(self, potential: Potential, config: SystemConfig, dt: float):
        if not dt > 0:
            raise InvalidSpecError(f"dt must be positive, got {dt}")
        diag, off = _interior_hamiltonian(potential, config)
        n = diag.size
        z = 1j * dt / (2 * config.hbar)
        self._ab = np.zeros((3, n), dtype=complex)
        self._ab[0, 1:] = z * off
        self._ab[1, :] = 1.0 + z * diag
        self._ab[2, :-1] = z * off
        self._b_diag = 1.0 - z * diag
        self._b_off = -z * off

    def step(self, interior: np.ndarray) -> np.ndarray:
        rhs = self._b_diag * interior
        rhs[1:] += self._b_off * interior[:-1]
        rhs[:-1] += self._b_off * interior[1:]
        try:
            return scipy.linalg.solve_banded((1, 1), self._ab, rhs)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise LinearSolveError(f"tridiagonal solve failed: {exc}") from exc


def _check_grid(psi: WaveFunction, config: SystemConfig) -> None:
    if psi.grid != config.grid:
        raise GridMismatchError(f"wavefunction grid {psi.grid} differs from config grid {config.grid}")


def crank_nicolson_step(psi: WaveFunction, potential: Potential, config: SystemConfig,
                        dt: float) -> WaveFunction:
    """Advance psi by one Crank-Nicolson step of size dt."""
    _check_grid(psi, config)
    stepper = _CrankNicolsonStepper(potential, config, dt)
    out = np.zeros_like(psi.values)
    out[1:-1] = stepper.step(psi.values[1:-1].copy())
    return WaveFunction(psi.grid, out, psi.time + dt)


def propagate(psi: WaveFunction, potential: Potential, config: SystemConfig,
              plan: PropagationPlan) -> PropagationResult:
    """Run plan.n_steps Crank-Nicolson steps, recording every record_every steps.

    The first snapshot is the input state; the final state is always
    recorded even when n_steps is not a multiple of record_every.
    """
    _check_grid(psi, config)
    stepper = _CrankNicolsonStepper(potential, config, plan.dt)
    interior = psi.values[1:-1].copy()
    steps = [0]
    states = [psi]
    for step in range(1, plan.n_steps + 1):
        interior = stepper.step(interior)
        if step % plan.record_every == 0 or step == plan.n_steps:
            out = np.zeros_like(psi.values)
            out[1:-1] = interior
            steps.append(step)
            states.append(WaveFunction(psi.grid, out, psi.time + step * plan.dt))
    return PropagationResult(plan, tuple(steps), states)


def solve_stationary(potential: Potential, config: SystemConfig, n_states: int) -> list[EigenPair]:
    """Lowest n_states eigenpairs of the discrete Hamiltonian.

    States are real, normalized in the trapezoid inner product and signed
    so that their largest-magnitude sample is positive; energies ascend.
    """
    grid = config.grid
    if n_states < 1:
        raise InvalidSpecError(f"n_states must be at least 1, got {n_states}")
    if n_states > (grid.n_points - 2) // 2:
        raise InvalidSpecError(
            f"n_states = {n_states} is not well below the {grid.n_points - 2} interior points"
        )
    diag, off = _interior_hamiltonian(potential, config)
    try:
        energies, vectors = scipy.linalg.eigh_tridiagonal(
            diag, np.full(diag.size - 1, off), select="i", select_range=(0, n_states - 1)
        )
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigensolverError(f"tridiagonal eigensolver failed: {exc}") from exc
    if np.any(np.diff(energies) <= 0):
        raise EigensolverError("eigenvalues are not strictly ascending")
    pairs = []
    for i in range(n_states):
        full = np.zeros(grid.n_points)
        full[1:-1] = vectors[:, i]
        # trapezoid norm; endpoint weights vanish with the Dirichlet zeros
        full /= np.sqrt(np.sum(full**2) * grid.dx)
        if full[np.argmax(np.abs(full))] < 0:
            full = -full
        pairs.append(EigenPair(i, float(energies[i]), WaveFunction(grid, full.astype(complex))))
    return pairs


def stationary_state(pair: EigenPair, time: float, config: SystemConfig) -> WaveFunction:
    """The eigenstate carried to the given time, psi = state * e^{-i E t / hbar}."""
    phase = np.exp(-1j * pair.energy * time / config.hbar)
    return WaveFunction(pair.state.grid, pair.state.values * phase, time)
