import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indefinite_neumann import Nonlinearity
from indefinite_neumann.errors import DomainError, ValidationError


@pytest.mark.parametrize("s, expected", [(0.5, 0.125), (1.7, 0.0), (-0.3, 0.0), (0.0, 0.0),
                                         (1.0, 0.0)])
def test_eval_ext(g, s, expected):
    assert g.eval_ext(s) == pytest.approx(expected, abs=1e-16)


@pytest.mark.parametrize("k1, k2, expected", [(0.25, 0.75, 0.046875), (0.4, 0.8, 0.096),
                                              (0.0, 0.5, 0.0)])
def test_g_min_oracle(g, k1, k2, expected):
    # values frozen from a 10^6-point grid minimization of s^2 (1 - s)
    assert g.g_min(k1, k2) == pytest.approx(expected, abs=1e-12)


def test_g_min_rejects_empty_interval(g):
    with pytest.raises(DomainError):
        g.g_min(0.6, 0.4)


def test_g_max(g):
    assert g.g_max() == pytest.approx(4 / 27, abs=1e-12)


@pytest.mark.parametrize("k1, k2", [(0.1, 0.3), (0.2, 0.95), (0.05, 0.99), (0.6, 0.7)])
def test_g_min_matches_grid(k1, k2):
    for g in (Nonlinearity.logistic2(), Nonlinearity.logistic()):
        s = np.linspace(k1, k2, 10 ** 6 + 1)
        assert g.g_min(k1, k2) == pytest.approx(g.eval_core(s).min(), abs=1e-9)


def test_samples_nonlinearity():
    s = np.linspace(0, 1, 101)
    v = np.sin(np.pi * s)
    v[-1] = 0.0
    g = Nonlinearity.from_samples(s, v)
    assert g.eval_ext(0.5) == pytest.approx(1.0)
    assert g.eval_ext(1.2) == 0.0
    assert g.g_min(0.2, 0.6) == pytest.approx(np.sin(0.2 * np.pi), abs=1e-12)


def test_polynomial_must_vanish_at_ends():
    with pytest.raises(ValidationError):
        Nonlinearity.from_polynomial([0.1, 1.0, -1.0])


def test_conditions_report(g):
    rep = g.check_conditions()
    assert rep.ok and rep.endpoints_zero and rep.positive


def test_dict_round_trip(g):
    g2 = Nonlinearity.from_dict(g.to_dict())
    s = np.linspace(-0.5, 1.5, 301)
    assert np.array_equal(g.eval_ext(s), g2.eval_ext(s))


def test_delta_for_bounds_ratio(g):
    delta = g.delta_for(0.05, cap=0.4)
    s = np.linspace(1e-9, delta, 1000)
    assert 0 < delta <= 0.4
    assert np.all(g.eval_core(s) / s <= 0.05 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10, allow_nan=False))
def test_zero_extension_and_sign(s):
    g = Nonlinearity.logistic2()
    v = g.eval_ext(s)
    assert v >= 0
    if s <= 0 or s >= 1:
        assert v == 0
    else:
        assert v == pytest.approx(s * s * (1 - s), rel=1e-12, abs=1e-300)
