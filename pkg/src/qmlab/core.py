"""Grids, wavefunctions, potentials and the basic Hilbert-space operations.

Everything downstream (propagation, polar decomposition, classical
comparison) builds on the types here.  All types are immutable values;
all operations are pure functions.

Conventions
-----------
* natural units hbar = m = 1 by default, both overridable in SystemConfig
* uniform grid with both endpoints included; dx = (x_max - x_min)/(n_points - 1)
* inner products use the trapezoid rule, which matches the Dirichlet
  (hard-wall) boundaries used by the evolution module
* momentum is -i*hbar * central difference, the Laplacian a 3-point stencil
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    GridMismatchError,
    GridTooCoarseWarning,
    InvalidSpecError,
    NotNormalizedError,
)

#: |norm - 1| below this counts as normalized.  Well above accumulated
#: round-off, well below anything physical.
NORMALIZATION_TOL = 1e-6

#: relative imaginary residue above which a Hermitian expectation value
#: emits GridTooCoarseWarning
IMAG_RESIDUE_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    """Uniform 1-D grid, endpoints included."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise InvalidSpecError(f"x_max must exceed x_min, got [{self.x_min}, {self.x_max}]")
        if self.n_points < 2:
            raise InvalidSpecError(f"n_points must be at least 2, got {self.n_points}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return build_grid(self)


@dataclass(frozen=True)
class SystemConfig:
    """Physical constants plus the grid they live on.

    Grid-free computations (classical trajectories, coincidence models)
    may leave ``grid`` unset; the field equations and the eigensolver
    require it.
    """

    grid: GridSpec | None = None
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise InvalidSpecError(f"hbar must be positive, got {self.hbar}")
        if not self.mass > 0:
            raise InvalidSpecError(f"mass must be positive, got {self.mass}")


def build_grid(spec: GridSpec) -> np.ndarray:
    """Return the n_points equally spaced coordinates of ``spec``, endpoints included."""
    return np.linspace(spec.x_min, spec.x_max, spec.n_points)


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Free:
    """V(x) = 0 everywhere."""


@dataclass(frozen=True)
class HarmonicOscillator:
    """V(x) = m omega^2 x^2 / 2."""

    omega: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise InvalidSpecError(f"omega must be positive, got {self.omega}")


@dataclass(frozen=True)
class InfiniteWell:
    """Hard walls at x = 0 and x = length, V = 0 between them.

    On a grid the walls coincide with the Dirichlet boundary, so the grid
    must span exactly [0, length].
    """

    length: float = 1.0

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidSpecError(f"length must be positive, got {self.length}")


@dataclass(frozen=True)
class FiniteBarrier:
    """Rectangular step of the given height (negative = attractive well)."""

    height: float
    width: float
    center: float = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise InvalidSpecError(f"width must be positive, got {self.width}")

    @property
    def edges(self) -> tuple[float, float]:
        return (self.center - self.width / 2, self.center + self.width / 2)


Potential = Free | HarmonicOscillator | InfiniteWell | FiniteBarrier

_WALL_TOL = 1e-9


def check_well_alignment(potential: Potential, grid: GridSpec) -> None:
    """Raise unless an InfiniteWell's walls coincide with the grid endpoints."""
    if isinstance(potential, InfiniteWell):
        scale = max(1.0, potential.length)
        if abs(grid.x_min - 0.0) > _WALL_TOL * scale or abs(grid.x_max - potential.length) > _WALL_TOL * scale:
            raise InvalidSpecError(
                f"infinite well of length {potential.length} needs a grid spanning exactly "
                f"[0, {potential.length}], got [{grid.x_min}, {grid.x_max}]"
            )


def potential_values(potential: Potential, x: np.ndarray, mass: float = 1.0) -> np.ndarray:
    """Evaluate V(x) on the given coordinates."""
    x = np.asarray(x, dtype=float)
    if isinstance(potential, Free):
        return np.zeros_like(x)
    if isinstance(potential, HarmonicOscillator):
        return 0.5 * mass * potential.omega**2 * x**2
    if isinstance(potential, InfiniteWell):
        if np.any(x < -_WALL_TOL * max(1.0, potential.length)) or np.any(
            x > potential.length * (1 + _WALL_TOL) + _WALL_TOL
        ):
            raise InvalidSpecError("coordinates extend past the well walls")
        return np.zeros_like(x)
    if isinstance(potential, FiniteBarrier):
        lo, hi = potential.edges
        return np.where((x >= lo) & (x <= hi), potential.height, 0.0)
    raise InvalidSpecError(f"unknown potential {potential!r}")


# ---------------------------------------------------------------------------
# wavefunctions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WaveFunction:
    """Complex field sampled on a grid at one instant."""

    grid: GridSpec
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise InvalidSpecError(
                f"values shape {values.shape} does not match grid with {self.grid.n_points} points"
            )
        if not (np.all(np.isfinite(values.real)) and np.all(np.isfinite(values.imag))):
            raise InvalidSpecError("wavefunction contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return build_grid(self.grid)

    def norm(self) -> float:
        return float(np.sqrt(np.real(inner_product(self, self))))

    def normalized(self) -> "WaveFunction":
        n = self.norm()
        if n == 0.0:
            raise InvalidSpecError("cannot normalize the zero field")
        return WaveFunction(self.grid, self.values / n, self.time)

    def is_normalized(self, tol: float = NORMALIZATION_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol


def _trapezoid_weights(grid: GridSpec) -> np.ndarray:
    w = np.full(grid.n_points, grid.dx)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def inner_product(a: WaveFunction, b: WaveFunction) -> complex:
    """<a|b> by the trapezoid rule on the shared grid."""
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")
    w = _trapezoid_weights(a.grid)
    return complex(np.sum(w * np.conj(a.values) * b.values))


def superpose(a: WaveFunction, ca: complex, b: WaveFunction, cb: complex,
              renormalize: bool = False) -> WaveFunction:
    """Pointwise ca*a + cb*b (a mathematical Hilbert-space operation)."""
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")
    out = WaveFunction(a.grid, ca * a.values + cb * b.values, a.time)
    return out.normalized() if renormalize else out


# ---------------------------------------------------------------------------
# observables and expectation values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Position:
    pass


@dataclass(frozen=True)
class Momentum:
    pass


@dataclass(frozen=True)
class Hamiltonian:
    potential: Potential


Observable = Position | Momentum | Hamiltonian


def laplacian(values: np.ndarray, dx: float) -> np.ndarray:
    """3-point stencil with zero (Dirichlet) ghost values beyond the ends."""
    out = -2.0 * values.astype(complex, copy=True)
    out[1:] += values[:-1]
    out[:-1] += values[1:]
    return out / dx**2


def gradient(values: np.ndarray, dx: float) -> np.ndarray:
    """Central difference with zero ghost values beyond the ends."""
    out = np.zeros_like(values, dtype=values.dtype if np.iscomplexobj(values) else float)
    out[1:-1] = (values[2:] - values[:-2]) / (2 * dx)
    out[0] = values[1] / (2 * dx)
    out[-1] = -values[-2] / (2 * dx)
    return out


def apply_observable(psi: WaveFunction, observable: Observable, config: SystemConfig) -> np.ndarray:
    """Return (A psi) on the grid for one of the three supported operators."""
    x = psi.x
    if isinstance(observable, Position):
        return x * psi.values
    if isinstance(observable, Momentum):
        return -1j * config.hbar * gradient(psi.values, psi.grid.dx)
    if isinstance(observable, Hamiltonian):
        check_well_alignment(observable.potential, psi.grid)
        v = potential_values(observable.potential, x, config.mass)
        kinetic = -(config.hbar**2 / (2 * config.mass)) * laplacian(psi.values, psi.grid.dx)
        return kinetic + v * psi.values
    raise InvalidSpecError(f"unknown observable {observable!r}")


def expectation_value(psi: WaveFunction, observable: Observable, config: SystemConfig) -> float:
    """Real part of <psi|A|psi> for a normalized psi.

    The imaginary residue of a Hermitian expectation must be tiny; if it
    is not, the grid is too coarse for this operator and a
    GridTooCoarseWarning is emitted.
    """
    if not psi.is_normalized():
        raise NotNormalizedError(f"|norm - 1| = {abs(psi.norm() - 1.0):.3e} exceeds {NORMALIZATION_TOL}")
    val = inner_product(psi, WaveFunction(psi.grid, apply_observable(psi, observable, config), psi.time))
    if abs(val.imag) > IMAG_RESIDUE_TOL * (1.0 + abs(val.real)):
        warnings.warn(
            f"imaginary residue {val.imag:.3e} on a Hermitian expectation value; grid too coarse",
            GridTooCoarseWarning,
            stacklevel=2,
        )
    return float(val.real)


# ---------------------------------------------------------------------------
# ready-made states
# ---------------------------------------------------------------------------

def gaussian_packet(grid: GridSpec, x0: float, sigma: float, k0: float = 0.0,
                    normalize: bool = True) -> WaveFunction:
    """Gaussian packet whose |psi|^2 has mean x0 and standard deviation sigma.

    The carrier e^{i k0 x} gives it mean momentum hbar*k0.  With
    ``normalize`` the discrete trapezoid norm is set to exactly 1.
    """
    if not sigma > 0:
        raise InvalidSpecError(f"sigma must be positive, got {sigma}")
    x = build_grid(grid)
    values = (2 * np.pi * sigma**2) ** (-0.25) * np.exp(
        -((x - x0) ** 2) / (4 * sigma**2) + 1j * k0 * x
    )
    psi = WaveFunction(grid, values)
    return psi.normalized() if normalize else psi


def plane_wave(grid: GridSpec, k: float, phase: float = 0.0) -> WaveFunction:
    """e^{i(kx + phase)} sampled on the grid (not normalizable; used for field tests).

    The grid must resolve the oscillation: |k| dx < pi.
    """
    if abs(k) * grid.dx >= np.pi:
        raise InvalidSpecError(f"|k| dx = {abs(k) * grid.dx:.3f} must stay below pi")
    x = build_grid(grid)
    return WaveFunction(grid, np.exp(1j * (k * x + phase)))
