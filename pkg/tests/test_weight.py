import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from indefinite_neumann import Piece, ScaledWeight, WeightSpec, example_weight
from indefinite_neumann.errors import (DomainError, SignStructureError,
                                       UnsupportedStructureError, ValidationError)


@pytest.mark.parametrize("t, expected", [(0.25, 1.75), (0.75, -1.0), (1.5, 1.0), (0.0, 1.75)])
def test_example_values(weight, t, expected):
    assert weight.eval(t) == expected


def test_example_structure(weight):
    s = weight.structure
    assert (s.sigma, s.tau, s.t0, s.t_end) == (0.5, 1.0, 0.0, 2.0)


def test_constant_within_pieces(weight):
    for a, b, v in [(0, 0.5, 1.75), (0.5, 1.0, -1.0), (1.0, 2.0, 1.0)]:
        t = np.linspace(a, b, 50)[1:-1]
        assert np.all(weight.eval(t) == v)


def test_leading_zero_piece_reports_t0():
    w = WeightSpec.piecewise_constant([0, 0.2, 0.7, 1.2, 2.2], [0.0, 1.75, -1.0, 1.0])
    s = w.structure
    assert s.t0 == pytest.approx(0.2)
    assert (s.sigma, s.tau) == pytest.approx((0.7, 1.2))
    # oracle: A+(0, t) vanishes up to t0 and is positive right after it
    grid = np.linspace(0, 0.7, 701)
    cum = np.array([w.cum_pos(0, t) for t in grid])
    assert np.all(cum[grid <= 0.2] == 0) and np.all(cum[grid > 0.2] > 0)


@pytest.mark.parametrize("values, exc", [
    ([1.0], SignStructureError),
    ([-1.0], SignStructureError),
    ([1.0, -1.0], SignStructureError),
    ([1.0, -1.0, 1.0, -1.0, 1.0], UnsupportedStructureError),
])
def test_bad_sign_structures(values, exc):
    breaks = np.linspace(0, 2, len(values) + 1)
    with pytest.raises(exc):
        WeightSpec.piecewise_constant(breaks, values).structure


def test_tiling_is_validated():
    with pytest.raises(ValidationError):
        WeightSpec((Piece(0, 1, "constant", 1.0), Piece(1.1, 2, "constant", -1.0)), 2.0)
    with pytest.raises(ValidationError):
        Piece(0, 1, "wavelet", 1.0)


def test_eval_outside_domain(weight):
    with pytest.raises(DomainError):
        weight.eval(2.5)


def test_closed_form_integrals(weight):
    assert weight.cum_pos(0, 0.5) == pytest.approx(0.875, abs=1e-15)
    assert weight.cum_neg(0.5, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert weight.iterated_pos_from_left(0, 0.25) == pytest.approx(1.75 * 0.25 ** 2 / 2, abs=1e-15)
    assert weight.iterated_pos_from_right(1.75, 2.0) == pytest.approx(0.03125, abs=1e-15)
    assert weight.iterated_neg_from_left(0.5, 0.75) == pytest.approx(0.25 ** 2 / 2, abs=1e-15)
    assert weight.sup_pos() == 1.75


def _random_weight(rng):
    breaks = np.sort(rng.uniform(0.1, 2.9, 4))
    breaks = np.concatenate([[0.0], breaks, [3.0]])
    pieces = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        kind = rng.choice(["constant", "poly", "samples"])
        if kind == "constant":
            pieces.append(Piece(a, b, "constant", rng.normal()))
        elif kind == "poly":
            pieces.append(Piece(a, b, "poly", rng.normal(size=3)))
        else:
            ts = np.linspace(a, b, 5)
            pieces.append(Piece(a, b, "samples", (ts, rng.normal(size=5))))
    return WeightSpec(tuple(pieces), 3.0)


@pytest.mark.parametrize("seed", range(5))
def test_integrals_against_quadrature(seed):
    rng = np.random.default_rng(seed)
    w = _random_weight(rng)
    pos = lambda t: max(w.eval(t), 0.0)  # noqa: E731
    neg = lambda t: max(-w.eval(t), 0.0)  # noqa: E731
    pts = list(w.knots)
    a, b = sorted(rng.uniform(0, 3, 2))
    inner = [k for k in pts if a < k < b]
    assert w.cum_pos(a, b) == pytest.approx(quad(pos, a, b, points=inner, limit=200)[0],
                                            rel=1e-9, abs=1e-12)
    assert w.cum_neg(a, b) == pytest.approx(quad(neg, a, b, points=inner, limit=200)[0],
                                            rel=1e-9, abs=1e-12)
    # iterated integral: int_a^b A+(a, xi) d xi = int_a^b (b - s) a+(s) ds
    ref = quad(lambda s: (b - s) * pos(s), a, b, points=inner, limit=200)[0]
    assert w.iterated_pos_from_left(a, b) == pytest.approx(ref, rel=1e-9, abs=1e-12)
    ref = quad(lambda s: (s - a) * pos(s), a, b, points=inner, limit=200)[0]
    assert w.iterated_pos_from_right(a, b) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_dict_round_trip():
    w = _random_weight(np.random.default_rng(3))
    w2 = WeightSpec.from_dict(w.to_dict())
    t = np.linspace(0, 3, 777)
    assert np.array_equal(w.eval(t), w2.eval(t))


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2), st.floats(0, 2), st.floats(0, 2))
def test_additivity(a, b, c):
    a, b, c = sorted((a, b, c))
    w = example_weight()
    assert w.cum_pos(a, b) + w.cum_pos(b, c) == pytest.approx(w.cum_pos(a, c), rel=1e-12,
                                                              abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 2), min_size=2, max_size=20))
def test_cum_pos_monotone(ts):
    w = example_weight()
    ts = sorted(ts)
    vals = [w.cum_pos(0, t) for t in ts]
    assert all(u <= v for u, v in zip(vals, vals[1:]))


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2), st.floats(0, 1e3), st.floats(0, 1e3))
def test_scaling(t, lam, mu):
    w = example_weight()
    sw = ScaledWeight(w, lam, mu)
    v = w.eval(t)
    assert sw.eval(t) == pytest.approx(lam * max(v, 0) - mu * max(-v, 0))


def test_scaled_weight_rejects_negative():
    with pytest.raises(ValidationError):
        ScaledWeight(example_weight(), -1.0, 1.0)
