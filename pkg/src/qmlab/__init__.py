"""qmlab: a numerical laboratory for 1-D wave mechanics and polarization statistics.

Modules
-------
core         grids, wavefunctions, potentials, inner products, expectation values
evolution    Crank-Nicolson propagation and the tridiagonal eigensolver
madelung     polar decomposition, quantum potential, real-field-equation residuals
classical    symplectic trajectories, principal function, Hamilton-Jacobi residual
polarization Malus law, polarizer chains, minimal-transmission scans
bell         two-photon coincidence models and the CHSH statistic
runner       JSON-config batch experiments with checksummed outputs
cli          the ``qmlab`` command
"""

__version__ = "0.1.0"

from .core import (
    FiniteBarrier,
    Free,
    GridSpec,
    Hamiltonian,
    HarmonicOscillator,
    InfiniteWell,
    Momentum,
    Position,
    SystemConfig,
    WaveFunction,
    build_grid,
    expectation_value,
    gaussian_packet,
    inner_product,
    plane_wave,
    potential_values,
    superpose,
)
from .evolution import (
    EigenPair,
    PropagationPlan,
    PropagationResult,
    crank_nicolson_step,
    propagate,
    solve_stationary,
    stationary_state,
)
from .madelung import (
    MadelungFields,
    MadelungResiduals,
    bohm_momentum,
    decompose,
    decompose_series,
    madelung_residuals,
    quantum_potential,
)
from .classical import (
    ClassicalState,
    Trajectory,
    hj_residual,
    integrate_hamilton,
    principal_function,
)
from .polarization import (
    Polarizer,
    PolarizerChain,
    ThreePolarizerModel,
    TransmissionCurve,
    chain_transmission,
    extrema_curve,
    malus,
    scan_min_beta,
    three_polarizer_probability,
    transmission_along,
)
from .bell import (
    AnalyzerPair,
    CHSHResult,
    CoincidenceStats,
    DeterministicThreshold,
    MalusStochastic,
    QuantumModel,
    chsh_statistic,
    compare_predictions,
    lhv_coincidence_analytic,
    lhv_coincidence_mc,
    qm_coincidence,
    qm_correlation,
)
