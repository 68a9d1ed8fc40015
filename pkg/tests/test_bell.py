import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qmlab import (
    AnalyzerPair,
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
from qmlab.errors import InvalidSpecError, UnsupportedModelError

CANONICAL = (0.0, 45.0, 22.5, 67.5)


def test_qm_coincidence_values():
    assert qm_coincidence(AnalyzerPair(10.0, 10.0)) == 0.5
    assert qm_coincidence(AnalyzerPair(90.0, 0.0)) == 0.0
    assert qm_coincidence(AnalyzerPair(45.0, 0.0)) == pytest.approx(0.25, abs=1e-15)


def test_lhv_analytic_values():
    model = MalusStochastic()
    assert lhv_coincidence_analytic(AnalyzerPair(0.0, 0.0), model) == pytest.approx(3 / 8, abs=1e-15)
    assert lhv_coincidence_analytic(AnalyzerPair(90.0, 0.0), model) == pytest.approx(1 / 8, abs=1e-15)
    assert lhv_coincidence_analytic(AnalyzerPair(45.0, 0.0), model) == pytest.approx(1 / 4, abs=1e-15)


def test_lhv_analytic_against_quadrature_oracle():
    # independent oracle: average cos^2(d - h) cos^2(h) over the hidden angle
    model = MalusStochastic()
    for delta in range(0, 95, 15):
        d = np.deg2rad(delta)
        integral, _ = quad(lambda h: np.cos(d - h) ** 2 * np.cos(h) ** 2 / np.pi, 0.0, np.pi)
        assert lhv_coincidence_analytic(AnalyzerPair(float(delta), 0.0), model) == pytest.approx(
            integral, abs=1e-10
        )


def test_no_closed_form_for_threshold_model():
    with pytest.raises(UnsupportedModelError):
        lhv_coincidence_analytic(AnalyzerPair(0, 0), DeterministicThreshold(0.5))


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def test_mc_matches_closed_form():
    stats = lhv_coincidence_mc(AnalyzerPair(0.0, 0.0), MalusStochastic(), 1_000_000, seed=42)
    exact = 3 / 8
    sigma = np.sqrt(exact * (1 - exact) / 1_000_000)
    assert abs(stats.p11 - exact) <= 3 * sigma


def test_single_pair_counts():
    stats = lhv_coincidence_mc(AnalyzerPair(30.0, 60.0), MalusStochastic(), 1, seed=3)
    assert stats.n11 + stats.n10 + stats.n01 + stats.n00 == 1
    assert 0.0 <= stats.p11 <= 1.0


def test_same_seed_reproduces_exactly():
    a = lhv_coincidence_mc(AnalyzerPair(12.0, 57.0), MalusStochastic(), 50_000, seed=9)
    b = lhv_coincidence_mc(AnalyzerPair(12.0, 57.0), MalusStochastic(), 50_000, seed=9)
    assert a == b


def test_threshold_model_is_deterministic_given_hidden_angle():
    a = lhv_coincidence_mc(AnalyzerPair(0.0, 0.0), DeterministicThreshold(0.5), 10_000, seed=1)
    # both sides share the hidden angle and the same analyzer: always agree
    assert a.n10 == 0 and a.n01 == 0
    assert a.n11 + a.n00 == 10_000


def test_mc_preconditions():
    with pytest.raises(InvalidSpecError):
        lhv_coincidence_mc(AnalyzerPair(0, 0), MalusStochastic(), 0, seed=1)


def test_locality_marginal_independent_of_far_setting():
    # side A's detection rate must not depend on side B's analyzer
    for model in (MalusStochastic(), DeterministicThreshold(0.5)):
        for i, b in enumerate(range(0, 180, 36)):
            stats = lhv_coincidence_mc(AnalyzerPair(17.0, float(b)), model, 200_000, seed=100 + i)
            p_a = (stats.n11 + stats.n10) / stats.n_pairs
            sigma = np.sqrt(0.25 / stats.n_pairs)
            assert abs(p_a - 0.5) <= 3.5 * sigma


def test_rotational_invariance_analytic():
    assert qm_coincidence(AnalyzerPair(10.0, 4.0)) == qm_coincidence(AnalyzerPair(40.0, 34.0))
    model = MalusStochastic()
    assert lhv_coincidence_analytic(AnalyzerPair(10.0, 4.0), model) == lhv_coincidence_analytic(
        AnalyzerPair(40.0, 34.0), model
    )


@given(st.floats(min_value=-180, max_value=180, allow_nan=False),
       st.floats(min_value=-180, max_value=180, allow_nan=False),
       st.floats(min_value=-180, max_value=180, allow_nan=False))
@settings(max_examples=100, deadline=None)
def test_rotational_invariance_floats(a, b, c):
    lhs = qm_coincidence(AnalyzerPair(a, b))
    rhs = qm_coincidence(AnalyzerPair(a + c, b + c))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_rotational_invariance_mc():
    model = MalusStochastic()
    base = lhv_coincidence_mc(AnalyzerPair(0.0, 30.0), model, 400_000, seed=21)
    rotated = lhv_coincidence_mc(AnalyzerPair(50.0, 80.0), model, 400_000, seed=22)
    sigma = np.sqrt(base.p11_stderr**2 + rotated.p11_stderr**2)
    assert abs(base.p11 - rotated.p11) <= 3 * sigma


# ---------------------------------------------------------------------------
# CHSH
# ---------------------------------------------------------------------------

def test_qm_chsh_reaches_tsirelson_value():
    result = chsh_statistic(*CANONICAL, QuantumModel())
    assert abs(result.s_value - 2 * np.sqrt(2)) <= 1e-15
    assert result.stderr == 0.0
    expected = np.sqrt(0.5)
    signs = (1, -1, 1, 1)
    for e, sign in zip(result.correlations, signs):
        assert e == pytest.approx(sign * expected, abs=1e-15)


def test_qm_correlation_is_cosine_of_double_angle():
    assert qm_correlation(AnalyzerPair(0.0, 0.0)) == 1.0
    assert qm_correlation(AnalyzerPair(45.0, 0.0)) == 0.0
    assert qm_correlation(AnalyzerPair(90.0, 0.0)) == -1.0


def test_degenerate_settings_cap_at_two():
    result = chsh_statistic(0.0, 0.0, 30.0, 30.0, QuantumModel())
    assert result.s_value == pytest.approx(2 * abs(qm_correlation(AnalyzerPair(0.0, 30.0))), abs=1e-15)
    assert result.s_value <= 2.0


def test_lhv_models_respect_chsh_bound_at_canonical_settings():
    for model, seed in ((MalusStochastic(), 5), (DeterministicThreshold(0.5), 6)):
        result = chsh_statistic(*CANONICAL, model, n_pairs=100_000, seed=seed)
        assert result.s_value <= 2.0 + 3.0 * result.stderr


def test_lhv_bound_over_random_settings():
    rng = np.random.default_rng(2024)
    for model in (MalusStochastic(), DeterministicThreshold(0.5)):
        for i in range(25):
            a, ap, b, bp = rng.uniform(0.0, 360.0, 4)
            result = chsh_statistic(a, ap, b, bp, model, n_pairs=20_000, seed=3000 + i)
            assert result.s_value <= 2.0 + 3.0 * result.stderr


def test_malus_stochastic_correlation_is_half_cosine():
    # E(delta) = cos(2 delta)/2 for this model: well inside the bound
    result = chsh_statistic(*CANONICAL, MalusStochastic(), n_pairs=400_000, seed=77)
    for setting, e in zip(result.settings, result.correlations):
        expected = 0.5 * np.cos(np.deg2rad(2 * setting.delta_deg))
        assert e == pytest.approx(expected, abs=4 * result.stderr)


def test_chsh_mc_preconditions():
    with pytest.raises(InvalidSpecError):
        chsh_statistic(*CANONICAL, MalusStochastic(), n_pairs=100, seed=1)
    with pytest.raises(InvalidSpecError):
        chsh_statistic(*CANONICAL, MalusStochastic(), n_pairs=20_000)


# ---------------------------------------------------------------------------
# prediction tables
# ---------------------------------------------------------------------------

def test_compare_predictions_analytic():
    deltas = list(range(0, 91, 5))
    rows = compare_predictions(deltas, MalusStochastic())
    assert len(rows) == len(deltas)
    by_delta = {r.delta_deg: r for r in rows}
    # the two models cross at 45 degrees and differ at 0
    assert by_delta[45.0].p_qm == pytest.approx(by_delta[45.0].p_lhv, abs=1e-15)
    assert by_delta[0.0].p_qm == pytest.approx(0.5, abs=1e-15)
    assert by_delta[0.0].p_lhv == pytest.approx(0.375, abs=1e-15)
    assert all(r.stderr == 0.0 for r in rows)


def test_compare_predictions_mc():
    deltas = [0.0, 45.0, 90.0]
    rows = compare_predictions(deltas, MalusStochastic(), n_pairs=200_000, seed=13)
    for row in rows:
        exact = lhv_coincidence_analytic(AnalyzerPair(row.delta_deg, 0.0), MalusStochastic())
        assert abs(row.p_lhv - exact) <= 3.5 * row.stderr


def test_compare_predictions_requires_grid():
    with pytest.raises(InvalidSpecError):
        compare_predictions([], MalusStochastic())
