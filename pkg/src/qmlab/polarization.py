"""Transmission of (partially) polarized light through chains of polarizers.

Angles are degrees everywhere at the interface (radians never leak out);
``scipy.special.cosdg`` keeps the right angles exact, e.g. crossed
polarizers give a transmission of exactly zero.  Each polarizer is an
idealized projector with two transmittances: k_parallel along its axis
and k_perp across it, so a stage at relative angle d contributes

    k_perp + (k_parallel - k_perp) * cos(d)^2

and resets the transmitted polarization onto its own axis.  Ideal
polarizers (k_parallel=1, k_perp=0) reduce every stage to the plain
cos^2 law.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import cosdg

from .errors import EmptyGridError, InvalidSpecError

#: absolute angular tolerance of the golden-section refinement, in degrees
SCAN_TOL_DEG = 1e-4

_INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def malus(theta_deg: float) -> float:
    """Ideal transmitted fraction cos^2(theta) at relative angle theta (degrees)."""
    return cosdg(theta_deg) ** 2


def three_polarizer_probability(alpha_deg: float, beta_deg: float) -> float:
    """cos^2(alpha) * cos^2(alpha - beta) for the ideal 0/alpha/beta chain.

    alpha and beta are the axis angles of the second and third polarizers
    measured from the first; the first polarizer is absorbed into the
    source normalization.
    """
    return cosdg(alpha_deg) ** 2 * cosdg(alpha_deg - beta_deg) ** 2


@dataclass(frozen=True)
class Polarizer:
    axis_deg: float
    k_parallel: float = 1.0
    k_perp: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.k_perp < self.k_parallel <= 1.0:
            raise InvalidSpecError(
                f"need 0 <= k_perp < k_parallel <= 1, got k_perp={self.k_perp}, k_parallel={self.k_parallel}"
            )

    def stage_factor(self, incoming_deg: float) -> float:
        return self.k_perp + (self.k_parallel - self.k_perp) * malus(self.axis_deg - incoming_deg)


@dataclass(frozen=True)
class PolarizerChain:
    """Ordered polarizers; source is linear at ``source_deg`` or unpolarized when None."""

    polarizers: tuple[Polarizer, ...]
    source_deg: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "polarizers", tuple(self.polarizers))
        if not self.polarizers:
            raise InvalidSpecError("a polarizer chain needs at least one polarizer")


def chain_transmission(chain: PolarizerChain) -> float:
    """Total transmitted fraction through the chain.

    An unpolarized source contributes (k_parallel + k_perp)/2 at the first
    polarizer; after every stage the polarization is reset onto that
    stage's axis.
    """
    first = chain.polarizers[0]
    if chain.source_deg is None:
        p = (first.k_parallel + first.k_perp) / 2.0
    else:
        p = first.stage_factor(chain.source_deg)
    axis = first.axis_deg
    for pol in chain.polarizers[1:]:
        p *= pol.stage_factor(axis)
        axis = pol.axis_deg
    return p


@dataclass(frozen=True)
class ThreePolarizerModel:
    """P(alpha, beta) of the 0/alpha/beta chain, with optional imperfection."""

    k_parallel: float = 1.0
    k_perp: float = 0.0
    model_id: str = "quantum"

    def __call__(self, alpha_deg: float, beta_deg: float) -> float:
        mk = lambda axis: Polarizer(axis, self.k_parallel, self.k_perp)
        chain = PolarizerChain((mk(0.0), mk(alpha_deg), mk(beta_deg)), source_deg=0.0)
        return chain_transmission(chain)


TransmissionFn = Callable[[float, float], float]


@dataclass(frozen=True)
class TransmissionCurve:
    """(alpha, beta, probability) triples plus model metadata."""

    alphas_deg: np.ndarray
    betas_deg: np.ndarray
    probabilities: np.ndarray
    model_id: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.alphas_deg, dtype=float)
        b = np.asarray(self.betas_deg, dtype=float)
        p = np.asarray(self.probabilities, dtype=float)
        if not (a.shape == b.shape == p.shape):
            raise InvalidSpecError("curve columns must have matching shapes")
        if np.any(p < 0) or np.any(p > 1):
            raise InvalidSpecError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "alphas_deg", a)
        object.__setattr__(self, "betas_deg", b)
        object.__setattr__(self, "probabilities", p)

    def __len__(self):
        return self.alphas_deg.size


def _golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    c = hi - _INV_GOLDEN * (hi - lo)
    d = lo + _INV_GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_GOLDEN * (hi - lo)
            fd = f(d)
    mid = 0.5 * (lo + hi)
    return mid, f(mid)


def scan_min_beta(alpha_deg: float, beta_grid_deg: Sequence[float],
                  model: TransmissionFn) -> tuple[float, float]:
    """beta (mod 180, in [0, 180)) minimizing model(alpha, .), with the minimum value.

    Grid scan over ``beta_grid_deg`` followed by golden-section refinement
    around every grid minimum; ties go to the smallest normalized beta.
    The grid must cover at least a 180 degree span.
    """
    betas = np.asarray(beta_grid_deg, dtype=float)
    if betas.size == 0:
        raise EmptyGridError("beta grid is empty")
    if betas.size < 2 or np.ptp(betas) < 180.0 - 1e-9:
        raise EmptyGridError(f"beta grid must span at least 180 degrees, got {np.ptp(betas):.3f}")
    betas = np.sort(betas)
    values = np.array([model(alpha_deg, b) for b in betas])
    p_grid = values.min()
    candidates = np.flatnonzero(values <= p_grid + 1e-12)

    best_beta, best_p = None, np.inf
    for i in candidates:
        lo = betas[i - 1] if i > 0 else betas[i] - (betas[i + 1] - betas[i])
        hi = betas[i + 1] if i < betas.size - 1 else betas[i] + (betas[i] - betas[i - 1])
        beta, p = _golden_section(lambda b: model(alpha_deg, b), lo, hi, SCAN_TOL_DEG)
        beta %= 180.0
        if p < best_p - 1e-15 or (abs(p - best_p) <= 1e-15 and beta < best_beta):
            best_beta, best_p = beta, p
    return float(best_beta), float(best_p)


def transmission_along(pairs_deg: Sequence[tuple[float, float]], model: TransmissionFn,
                       model_id: str | None = None) -> TransmissionCurve:
    """Evaluate the model along an arbitrary path of (alpha, beta) pairs."""
    pairs = list(pairs_deg)
    alphas = np.array([a for a, _ in pairs], dtype=float)
    betas = np.array([b for _, b in pairs], dtype=float)
    probs = np.array([model(a, b) for a, b in pairs])
    return TransmissionCurve(alphas, betas, probs, _model_id(model, model_id))


def extrema_curve(alpha_list_deg: Sequence[float], model: TransmissionFn,
                  beta_grid_deg: Sequence[float] | None = None,
                  model_id: str | None = None) -> TransmissionCurve:
    """The minimal-transmission path: for each alpha, (alpha, beta*, P(alpha, beta*))."""
    alphas = np.asarray(alpha_list_deg, dtype=float)
    if alphas.size == 0:
        raise EmptyGridError("alpha list is empty")
    if beta_grid_deg is None:
        beta_grid_deg = np.linspace(0.0, 180.0, 181)
    stars, mins = [], []
    for a in alphas:
        b, p = scan_min_beta(float(a), beta_grid_deg, model)
        stars.append(b)
        mins.append(p)
    return TransmissionCurve(alphas, np.array(stars), np.array(mins), _model_id(model, model_id))


def _model_id(model, explicit: str | None) -> str:
    if explicit is not None:
        return explicit
    return getattr(model, "model_id", getattr(model, "__name__", "model"))
