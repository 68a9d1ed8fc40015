import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmlab import (
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
from qmlab.errors import EmptyGridError, InvalidSpecError

BETA_GRID = np.linspace(0.0, 180.0, 181)


def test_malus_values():
    assert malus(0.0) == 1.0
    assert malus(90.0) == 0.0
    assert malus(60.0) == pytest.approx(0.25, abs=1e-15)
    assert malus(45.0) == pytest.approx(0.5, abs=1e-15)


def test_three_polarizer_values():
    assert three_polarizer_probability(0.0, 0.0) == 1.0
    assert three_polarizer_probability(45.0, 90.0) == pytest.approx(0.25, abs=1e-15)
    # second and third crossed: exactly zero
    assert three_polarizer_probability(30.0, 120.0) == 0.0


def test_three_polarizer_matches_direct_formula():
    # independent evaluation in radians
    for alpha in range(0, 181, 3):
        for beta in range(0, 181, 7):
            direct = (np.cos(np.deg2rad(alpha)) ** 2
                      * np.cos(np.deg2rad(alpha - beta)) ** 2)
            assert three_polarizer_probability(alpha, beta) == pytest.approx(direct, abs=2e-15)


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------

def test_polarizer_invariants():
    with pytest.raises(InvalidSpecError):
        Polarizer(0.0, k_parallel=0.5, k_perp=0.5)
    with pytest.raises(InvalidSpecError):
        Polarizer(0.0, k_parallel=1.2)
    with pytest.raises(InvalidSpecError):
        PolarizerChain(())


def test_ideal_chain_reduces_to_three_polarizer_formula():
    for alpha in range(0, 181, 15):
        for beta in range(0, 181, 15):
            chain = PolarizerChain(
                (Polarizer(0.0), Polarizer(float(alpha)), Polarizer(float(beta))),
                source_deg=0.0,
            )
            assert chain_transmission(chain) == three_polarizer_probability(alpha, beta)


def test_unpolarized_source_halves():
    chain = PolarizerChain((Polarizer(17.0),))
    assert chain_transmission(chain) == 0.5


def test_inserted_polarizer_resurrects_transmission():
    # crossed pair blocks everything; a 45 degree stage in between passes 1/4
    crossed = PolarizerChain((Polarizer(0.0), Polarizer(90.0)), source_deg=0.0)
    assert chain_transmission(crossed) == 0.0
    inserted = PolarizerChain((Polarizer(0.0), Polarizer(45.0), Polarizer(90.0)), source_deg=0.0)
    assert chain_transmission(inserted) == pytest.approx(0.25, abs=1e-15)


def test_imperfect_stage_floor():
    pol = Polarizer(0.0, k_parallel=0.95, k_perp=0.02)
    chain = PolarizerChain((pol, Polarizer(90.0, 0.95, 0.02)), source_deg=0.0)
    assert chain_transmission(chain) == pytest.approx(0.95 * 0.02, rel=1e-12)


# ---------------------------------------------------------------------------
# probability bounds and symmetry
# ---------------------------------------------------------------------------

def test_probability_bounds_on_degree_grid():
    angles = np.arange(0.0, 181.0)
    ideal = ThreePolarizerModel()
    imperfect = ThreePolarizerModel(0.95, 0.02, model_id="quantum_imperfect")
    for alpha in angles:
        for beta in angles:
            p = ideal(alpha, beta)
            assert 0.0 <= p <= 1.0
    for alpha in angles[::5]:
        for beta in angles[::5]:
            p = imperfect(alpha, beta)
            assert 0.0 <= p <= 1.0


def test_periodicity_exact_on_integer_grid():
    for alpha in range(0, 180, 10):
        for beta in range(0, 180, 10):
            p = three_polarizer_probability(alpha, beta)
            assert three_polarizer_probability(alpha + 180, beta) == p
            assert three_polarizer_probability(alpha, beta + 180) == p


@given(st.floats(min_value=-720, max_value=720, allow_nan=False))
@settings(max_examples=100, deadline=None)
def test_malus_bounded(theta):
    assert 0.0 <= malus(theta) <= 1.0


# ---------------------------------------------------------------------------
# minimal-transmission scan
# ---------------------------------------------------------------------------

def test_scan_quantum_minima():
    model = ThreePolarizerModel()
    beta, p = scan_min_beta(30.0, BETA_GRID, model)
    assert beta == pytest.approx(120.0, abs=1e-3)
    assert p <= 1e-9
    beta, p = scan_min_beta(0.0, BETA_GRID, model)
    assert beta == pytest.approx(90.0, abs=1e-3)
    assert p <= 1e-9


def test_scan_degenerate_alpha_breaks_ties_small():
    # alpha = 90 blanks the whole curve; smallest beta in [0, 180) wins
    beta, p = scan_min_beta(90.0, BETA_GRID, ThreePolarizerModel())
    assert p == 0.0
    assert beta == pytest.approx(0.0, abs=1e-3)


def test_scan_imperfect_model_shifts_value_not_argmin():
    model = ThreePolarizerModel(0.95, 0.02, model_id="quantum_imperfect")
    for alpha in (10.0, 30.0, 75.0):
        beta, p = scan_min_beta(alpha, BETA_GRID, model)
        assert p > 0.0
        assert beta == pytest.approx((alpha + 90.0) % 180.0, abs=1e-3)
        # brute-force oracle on a fine grid
        fine = np.arange(0.0, 180.0, 0.01)
        values = np.array([model(alpha, b) for b in fine])
        assert abs(beta - fine[np.argmin(values)]) <= 0.02
        assert p <= values.min() + 1e-12


def test_scan_argmin_invariant_under_common_scaling():
    base = ThreePolarizerModel(0.9, 0.1, model_id="a")
    scaled = ThreePolarizerModel(0.45, 0.05, model_id="b")
    for alpha in (20.0, 55.0):
        beta_a, p_a = scan_min_beta(alpha, BETA_GRID, base)
        beta_b, p_b = scan_min_beta(alpha, BETA_GRID, scaled)
        assert beta_b == pytest.approx(beta_a, abs=2e-4)
        # three stages, each scaled by 1/2
        assert p_b / p_a == pytest.approx(0.125, rel=1e-6)


def test_scan_grid_preconditions():
    model = ThreePolarizerModel()
    with pytest.raises(EmptyGridError):
        scan_min_beta(0.0, [], model)
    with pytest.raises(EmptyGridError):
        scan_min_beta(0.0, np.linspace(0, 90, 10), model)


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

def test_extrema_curve_quantum_is_identically_zero():
    curve = extrema_curve(np.arange(0.0, 181.0, 5.0), ThreePolarizerModel())
    assert len(curve) == 37
    assert np.all(curve.probabilities <= 1e-9)
    assert np.allclose(curve.betas_deg, (curve.alphas_deg + 90.0) % 180.0, atol=1e-3)


def test_curve_along_equal_angles_path():
    alphas = np.arange(0.0, 181.0, 5.0)
    curve = transmission_along([(a, a) for a in alphas], ThreePolarizerModel())
    expected = np.cos(np.deg2rad(alphas)) ** 2
    assert np.allclose(curve.probabilities, expected, atol=1e-14)


def test_curve_rejects_bad_probabilities():
    with pytest.raises(InvalidSpecError):
        TransmissionCurve(np.array([0.0]), np.array([0.0]), np.array([1.5]), "bad")


def test_extrema_requires_alphas():
    with pytest.raises(EmptyGridError):
        extrema_curve([], ThreePolarizerModel())
