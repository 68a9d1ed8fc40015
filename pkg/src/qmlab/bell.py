"""Two-photon coincidence experiments: quantum model, local models, CHSH statistic.

The quantum two-photon source predicts a coincidence probability
p11 = cos^2(a - b) / 2 and a two-channel correlation E = cos 2(a - b).
The local models draw one hidden polarization angle per pair, shared by
both photons, and let each side respond only to its own analyzer angle
and that shared angle:

* malus_stochastic - each side transmits with probability cos^2(analyzer - hidden)
* deterministic_threshold - each side transmits iff cos^2(analyzer - hidden) >= threshold

Monte Carlo runs use the counter-based Philox generator under a 64-bit
master seed; per-setting substreams are spawned deterministically, so
every count is reproducible bit for bit regardless of how the work is
scheduled.  Non-detection counts as the "0" channel, which makes the
coincidence counts and the two-channel correlations come from the same
quadruple of counters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import cosdg

from .errors import InvalidSpecError, UnsupportedModelError

#: minimum Monte Carlo sample for a CHSH estimate
MIN_CHSH_PAIRS = 10_000


@dataclass(frozen=True)
class AnalyzerPair:
    """Analyzer angles (degrees) on the two sides."""

    a_deg: float
    b_deg: float

    def __post_init__(self):
        if not (np.isfinite(self.a_deg) and np.isfinite(self.b_deg)):
            raise InvalidSpecError("analyzer angles must be finite")

    @property
    def delta_deg(self) -> float:
        return self.a_deg - self.b_deg


@dataclass(frozen=True)
class QuantumModel:
    model_id: str = "qm"


@dataclass(frozen=True)
class MalusStochastic:
    model_id: str = "malus_stochastic"


@dataclass(frozen=True)
class DeterministicThreshold:
    threshold: float = 0.5
    model_id: str = "deterministic_threshold"

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise InvalidSpecError(f"threshold must lie in (0, 1], got {self.threshold}")


LHVModel = MalusStochastic | DeterministicThreshold


@dataclass(frozen=True)
class CoincidenceStats:
    """Joint detection counters of one Monte Carlo run."""

    n_pairs: int
    n11: int
    n10: int
    n01: int
    n00: int
    rng_seed: int

    def __post_init__(self):
        if self.n11 + self.n10 + self.n01 + self.n00 != self.n_pairs:
            raise InvalidSpecError("outcome counts must sum to n_pairs")

    @property
    def p11(self) -> float:
        return self.n11 / self.n_pairs

    @property
    def p11_stderr(self) -> float:
        p = self.p11
        return math.sqrt(p * (1.0 - p) / self.n_pairs)

    @property
    def correlation(self) -> float:
        """Two-channel E = p11 + p00 - p10 - p01."""
        return (self.n11 + self.n00 - self.n10 - self.n01) / self.n_pairs

    @property
    def correlation_stderr(self) -> float:
        e = self.correlation
        return math.sqrt(max(1.0 - e * e, 0.0) / self.n_pairs)


@dataclass(frozen=True)
class CHSHResult:
    settings: tuple[AnalyzerPair, AnalyzerPair, AnalyzerPair, AnalyzerPair]
    correlations: tuple[float, float, float, float]
    s_value: float
    stderr: float
    model_id: str
    n_pairs: int | None
    rng_seed: int | None

    def __post_init__(self):
        for e in self.correlations:
            if abs(e) > 1.0 + 1e-12:
                raise InvalidSpecError(f"correlation {e} outside [-1, 1]")


def qm_coincidence(pair: AnalyzerPair) -> float:
    """Quantum coincidence probability cos^2(a - b) / 2."""
    return 0.5 * cosdg(pair.delta_deg) ** 2


def qm_correlation(pair: AnalyzerPair) -> float:
    """Quantum two-channel correlation cos 2(a - b)."""
    return float(cosdg(2.0 * pair.delta_deg))


def lhv_coincidence_analytic(pair: AnalyzerPair, model: LHVModel) -> float:
    """Closed-form coincidence probability, where one exists.

    For malus_stochastic the uniform average of
    cos^2(a - h) cos^2(b - h) over the hidden angle h is (2 + cos 2(a-b)) / 8.
    """
    if isinstance(model, MalusStochastic):
        return (2.0 + cosdg(2.0 * pair.delta_deg)) / 8.0
    raise UnsupportedModelError(f"no closed form for {model!r}")


def _detections(model: LHVModel, analyzer_deg: float, hidden_deg: np.ndarray,
                uniforms: np.ndarray) -> np.ndarray:
    response = cosdg(analyzer_deg - hidden_deg) ** 2
    if isinstance(model, MalusStochastic):
        return uniforms < response
    if isinstance(model, DeterministicThreshold):
        return response >= model.threshold
    raise UnsupportedModelError(f"unknown local model {model!r}")


def _mc_counts(pair: AnalyzerPair, model: LHVModel, n_pairs: int,
               rng: np.random.Generator) -> tuple[int, int, int, int]:
    # fixed draw layout: hidden angles, then side-A uniforms, then side-B
    hidden = rng.random(n_pairs) * 180.0
    u_a = rng.random(n_pairs)
    u_b = rng.random(n_pairs)
    det_a = _detections(model, pair.a_deg, hidden, u_a)
    det_b = _detections(model, pair.b_deg, hidden, u_b)
    n11 = int(np.sum(det_a & det_b))
    n10 = int(np.sum(det_a & ~det_b))
    n01 = int(np.sum(~det_a & det_b))
    return n11, n10, n01, n_pairs - n11 - n10 - n01


def lhv_coincidence_mc(pair: AnalyzerPair, model: LHVModel, n_pairs: int,
                       seed: int) -> CoincidenceStats:
    """Monte Carlo coincidence counts for a local model; bit-reproducible per seed."""
    if n_pairs < 1:
        raise InvalidSpecError(f"n_pairs must be at least 1, got {n_pairs}")
    rng = np.random.Generator(np.random.Philox(seed))
    n11, n10, n01, n00 = _mc_counts(pair, model, n_pairs, rng)
    return CoincidenceStats(n_pairs, n11, n10, n01, n00, rng_seed=seed)


def chsh_statistic(a_deg: float, a_prime_deg: float, b_deg: float, b_prime_deg: float,
                   model: QuantumModel | LHVModel, n_pairs: int | None = None,
                   seed: int | None = None) -> CHSHResult:
    """S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')| for the given model.

    The quantum correlations are analytic (no sampling); local models run
    one Monte Carlo batch of ``n_pairs`` per setting on substreams spawned
    from ``seed``.
    """
    settings = (
        AnalyzerPair(a_deg, b_deg),
        AnalyzerPair(a_deg, b_prime_deg),
        AnalyzerPair(a_prime_deg, b_deg),
        AnalyzerPair(a_prime_deg, b_prime_deg),
    )
    if isinstance(model, QuantumModel):
        correlations = tuple(qm_correlation(s) for s in settings)
        variances = (0.0, 0.0, 0.0, 0.0)
        n_used, seed_used = None, None
    else:
        if n_pairs is None or n_pairs < MIN_CHSH_PAIRS:
            raise InvalidSpecError(f"Monte Carlo CHSH needs n_pairs >= {MIN_CHSH_PAIRS}")
        if seed is None:
            raise InvalidSpecError("Monte Carlo CHSH needs a seed")
        children = np.random.SeedSequence(seed).spawn(4)
        correlations, variances = [], []
        for s, child in zip(settings, children):
            rng = np.random.Generator(np.random.Philox(child))
            n11, n10, n01, n00 = _mc_counts(s, model, n_pairs, rng)
            e = (n11 + n00 - n10 - n01) / n_pairs
            correlations.append(e)
            variances.append(max(1.0 - e * e, 0.0) / n_pairs)
        correlations = tuple(correlations)
        n_used, seed_used = n_pairs, seed
    e_ab, e_ab2, e_a2b, e_a2b2 = correlations
    s_value = abs(e_ab - e_ab2 + e_a2b + e_a2b2)
    stderr = math.sqrt(sum(variances))
    return CHSHResult(settings, correlations, s_value, stderr, model.model_id, n_used, seed_used)


@dataclass(frozen=True)
class PredictionRow:
    delta_deg: float
    p_qm: float
    p_lhv: float
    stderr: float


def compare_predictions(deltas_deg, model: LHVModel, n_pairs: int | None = None,
                        seed: int | None = None) -> list[PredictionRow]:
    """Quantum vs local coincidence probabilities over a grid of relative angles.

    With ``n_pairs`` the local value is a Monte Carlo estimate (substream
    per grid point, spawned from ``seed``); otherwise the closed form is
    used and the standard error is zero.
    """
    deltas = [float(d) for d in deltas_deg]
    if not deltas:
        raise InvalidSpecError("delta grid is empty")
    rows = []
    if n_pairs is None:
        for d in deltas:
            pair = AnalyzerPair(d, 0.0)
            rows.append(PredictionRow(d, qm_coincidence(pair), lhv_coincidence_analytic(pair, model), 0.0))
        return rows
    if seed is None:
        raise InvalidSpecError("Monte Carlo comparison needs a seed")
    children = np.random.SeedSequence(seed).spawn(len(deltas))
    for d, child in zip(deltas, children):
        pair = AnalyzerPair(d, 0.0)
        rng = np.random.Generator(np.random.Philox(child))
        n11, n10, n01, n00 = _mc_counts(pair, model, n_pairs, rng)
        stats = CoincidenceStats(n_pairs, n11, n10, n01, n00, rng_seed=_seed_entropy(child))
        rows.append(PredictionRow(d, qm_coincidence(pair), stats.p11, stats.p11_stderr))
    return rows


def _seed_entropy(seq: np.random.SeedSequence) -> int:
    state = seq.generate_state(1, dtype=np.uint64)
    return int(state[0])
