import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given, strategies as st

from cureopt import material
from cureopt.material import KineticsConstants, cure_rate, cure_rate_partials, validate_card


@pytest.fixture
def unit_kin():
    return material.synthetic_card().kinetics


@pytest.fixture
def as4_kin():
    return material.default_card().kinetics


def test_rate_vanishes_at_cure_boundaries(as4_kin):
    assert cure_rate(1.0, 450.0, as4_kin) == 0.0
    assert cure_rate(0.0, 450.0, as4_kin) == 0.0


def test_rate_hand_evaluated_unit_card(unit_kin):
    # A=1, dE=0, C=0, m=n=1: 1 * 0.5*0.5 / (1 + e^0) = 0.125
    assert cure_rate(0.5, 450.0, unit_kin) == pytest.approx(0.125, abs=1e-15)


def test_rate_domain_errors(as4_kin):
    with pytest.raises(ValueError):
        cure_rate(-0.1, 450.0, as4_kin)
    with pytest.raises(ValueError):
        cure_rate(1.1, 450.0, as4_kin)
    with pytest.raises(ValueError):
        cure_rate(0.5, -5.0, as4_kin)


def test_rate_nonnegative_and_finite(as4_kin):
    rng = np.random.default_rng(0)
    alpha = rng.uniform(0.0, 1.0, 500)
    T = rng.uniform(250.0, 550.0, 500)
    r = cure_rate(alpha, T, as4_kin)
    assert np.all(r >= 0.0)
    assert np.all(np.isfinite(r))


def test_rate_monotone_in_T_without_sigmoid(unit_kin):
    kin = replace(unit_kin, dE=50e3)
    T = np.linspace(300.0, 500.0, 50)
    r = cure_rate(0.4, T, kin)
    assert np.all(np.diff(r) > 0.0)


def test_partials_symmetric_point_unit_card(unit_kin):
    d_alpha, d_T = cure_rate_partials(0.5, 450.0, unit_kin)
    # alpha(1-alpha)/2 has zero slope at 0.5; no T dependence on the unit card
    assert d_alpha == pytest.approx(0.0, abs=1e-12)
    assert d_T == pytest.approx(0.0, abs=1e-12)


def test_partials_finite_at_boundaries(as4_kin):
    d_alpha, d_T = cure_rate_partials(1.0, 450.0, as4_kin)
    assert np.isfinite(d_alpha) and np.isfinite(d_T)
    d_alpha, d_T = cure_rate_partials(0.0, 450.0, as4_kin)
    assert np.isfinite(d_alpha) and np.isfinite(d_T)


def test_partials_match_finite_differences(as4_kin):
    rng = np.random.default_rng(42)
    h = 1e-6
    for _ in range(100):
        alpha = rng.uniform(0.05, 0.95)
        T = rng.uniform(300.0, 500.0)
        d_alpha, d_T = cure_rate_partials(alpha, T, as4_kin)
        fd_alpha = (cure_rate(alpha + h, T, as4_kin) - cure_rate(alpha - h, T, as4_kin)) / (2 * h)
        fd_T = (cure_rate(alpha, T + h, as4_kin) - cure_rate(alpha, T - h, as4_kin)) / (2 * h)
        assert d_alpha == pytest.approx(fd_alpha, rel=1e-5, abs=1e-12)
        assert d_T == pytest.approx(fd_T, rel=1e-5, abs=1e-12)


def test_expr_matches_validated_rate_in_interior(as4_kin):
    rng = np.random.default_rng(3)
    alpha = rng.uniform(0.01, 0.99, 200)
    T = rng.uniform(293.0, 520.0, 200)
    np.testing.assert_allclose(material.cure_rate_expr(alpha, T, as4_kin),
                               cure_rate(alpha, T, as4_kin), rtol=1e-12)


def test_expr_tolerates_out_of_range_alpha(as4_kin):
    r = material.cure_rate_expr(np.array([-0.2, 1.3]), np.array([400.0, 400.0]), as4_kin)
    assert np.all(np.isfinite(r))


@given(st.floats(0.0, 1.0), st.floats(200.0, 600.0))
def test_rate_bounds_property(alpha, T):
    kin = material.default_card().kinetics
    r = cure_rate(alpha, T, kin)
    assert r >= 0.0 and np.isfinite(r)


def test_validate_default_card_clean():
    assert validate_card(material.default_card()) == []
    assert validate_card(material.synthetic_card()) == []


def test_validate_flags_negative_diffusivity():
    card = replace(material.default_card(), a_c=-1.0)
    assert "a_c > 0" in validate_card(card)


def test_validate_flags_zero_exponent():
    card = material.default_card()
    card = replace(card, kinetics=replace(card.kinetics, m=0.0))
    assert "m > 0" in validate_card(card)


def test_card_json_round_trip(tmp_path):
    card = material.default_card()
    path = tmp_path / "card.json"
    material.save_card(card, path)
    loaded = material.load_card(path)
    assert loaded == card
