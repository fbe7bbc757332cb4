import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indefinite_neumann import WeightSpec
from indefinite_neumann.errors import DomainError, InfeasibleError, ValidationError
from indefinite_neumann.thresholds import (ThresholdParams, certify, epsilon_hat,
                                           lambda_star_left, lambda_star_right, mu_star,
                                           omega_sigma, step1_crossings, t2_upper)

# Closed-form values worked out with mpmath at 50 digits for the example weight
# (1.75 on [0, .5], -1 on [.5, 1], 1 on [1, 2]) and g(s) = s^2 (1 - s).
LAMBDA_LEFT = 76.190476190476190476   # 0.4 / (g(.4) * 0.875 * 0.25^2)
LAMBDA_RIGHT = 133.33333333333333333  # 0.4 / (g(.4) * 0.25^2 / 2)
OMEGA_400_3 = 17.283950617283950617   # (400/3) * 0.875 * 4/27
T2_TOP = 0.50578571428571428571       # 0.5 + 0.2 / (2 * OMEGA_400_3)
MU_STAR = 3319277.2104523              # 0.5 / (g(.1) * (T2_TOP - .5)^2 / 2)
EPS_HAT = 0.022857142857142857


def test_lambda_left_oracle(weight, g):
    assert lambda_star_left(weight, g, 0.8, 0.4, 0.25) == pytest.approx(LAMBDA_LEFT, rel=1e-12)


def test_lambda_right_oracle(weight, g):
    assert lambda_star_right(weight, g, 0.4, 0.8, 1.75) == pytest.approx(LAMBDA_RIGHT, rel=1e-12)


def test_omega_sigma_oracle_and_linearity(weight, g):
    assert omega_sigma(weight, g, 400 / 3) == pytest.approx(OMEGA_400_3, rel=1e-12)
    assert omega_sigma(weight, g, 800 / 3) == pytest.approx(2 * OMEGA_400_3, rel=1e-12)
    with pytest.raises(DomainError):
        omega_sigma(weight, g, 0.0)


def test_mu_star_oracle(weight, g):
    t2 = t2_upper(weight, 0.2, 0.6, OMEGA_400_3)
    assert t2 == pytest.approx(T2_TOP, rel=1e-14)
    assert mu_star(weight, g, 0.6, 0.2, t2, OMEGA_400_3) == pytest.approx(MU_STAR, rel=1e-10)


def test_mu_star_without_omega(weight, g):
    # omega = 0: numerator k2 - ks, window limited by the second bound only
    assert t2_upper(weight, 0.2, 0.6, 0.0) == pytest.approx(0.75)
    assert mu_star(weight, g, 0.6, 0.2, 0.6, 0.0) == pytest.approx(0.4 / (0.009 * 0.005))


@pytest.mark.parametrize("t2", [0.5, 0.45])
def test_mu_star_empty_window(weight, g, t2):
    with pytest.raises(InfeasibleError):
        mu_star(weight, g, 0.6, 0.2, t2, OMEGA_400_3)


def test_mu_star_outside_window(weight, g):
    with pytest.raises(InfeasibleError):
        mu_star(weight, g, 0.6, 0.2, T2_TOP + 1e-3, OMEGA_400_3)


def test_lambda_left_vanishes_as_kappas_merge(weight, g):
    vals = [lambda_star_left(weight, g, 0.5, 0.5 - d, 0.1) for d in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    # asymptotically linear in k0 - k1 (g* tends to g(k0))
    assert vals[-1] == pytest.approx(vals[-2] / 10, rel=5e-3)
    assert vals[-1] < 0.1


@pytest.mark.parametrize("k0, k1", [(0.4, 0.8), (0.5, 0.5), (1.2, 0.4), (0.8, 0.0)])
def test_lambda_left_kappa_order(weight, g, k0, k1):
    with pytest.raises(ValidationError):
        lambda_star_left(weight, g, k0, k1, 0.1)


@pytest.mark.parametrize("t1", [0.0, 0.5, 0.7])
def test_lambda_left_t1_range(weight, g, t1):
    with pytest.raises(ValidationError):
        lambda_star_left(weight, g, 0.8, 0.4, t1)


def test_t1_must_pass_leading_zero_stretch(g):
    w = WeightSpec.piecewise_constant([0, 0.2, 0.5, 1.0, 2.0], [0.0, 1.0, -1.0, 1.0])
    assert w.structure.t0 == 0.2
    with pytest.raises(ValidationError, match="t0"):
        lambda_star_left(w, g, 0.8, 0.4, 0.1)
    # only the part of [0, t1] beyond t0 counts: 0.4 / (g(.4) * 0.1^2 / 2)
    assert lambda_star_left(w, g, 0.8, 0.4, 0.3) == pytest.approx(0.4 / (0.096 * 0.005))


def test_trailing_zero_stretch_is_infeasible(g):
    w = WeightSpec.piecewise_constant([0, 0.5, 1.0, 1.5, 2.0], [1.0, -1.0, 1.0, 0.0])
    with pytest.raises(InfeasibleError):
        lambda_star_right(w, g, 0.4, 0.8, 1.75)


def test_epsilon_hat_oracle():
    assert epsilon_hat(25.0, 0.5, 1.75, 0.5) == pytest.approx(EPS_HAT, rel=1e-10)


def test_epsilon_hat_scaling_and_cap():
    assert epsilon_hat(50.0, 0.5, 1.75, 0.5) == pytest.approx(EPS_HAT / 2, rel=1e-10)
    cap = math.pi ** 2 / (4 * 0.25 * 25 * 1.75)
    near = epsilon_hat(25.0, math.pi / 2 - 1e-6, 1.75, 0.5)
    assert near < cap and near == pytest.approx(cap, rel=1e-3)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 500), st.floats(0.05, 1.5), st.floats(0.1, 5), st.floats(0.1, 2))
def test_epsilon_hat_is_the_crossing(lam, nu, a_sup, sigma):
    e = epsilon_hat(lam, nu, a_sup, sigma)
    r = math.sqrt(lam * a_sup * e)
    assert math.atan(r * math.tan(sigma * r)) == pytest.approx(nu, abs=1e-8)


@pytest.mark.parametrize("args", [(25.0, 0.0, 1.75, 0.5), (25.0, 2.0, 1.75, 0.5),
                                  (0.0, 0.5, 1.75, 0.5), (25.0, 0.5, 1.75, -1.0)])
def test_epsilon_hat_domain(args):
    with pytest.raises(DomainError):
        epsilon_hat(*args)


def test_params_defaults_and_windows(weight):
    prm = ThresholdParams().resolved(weight)
    assert prm.t1 == pytest.approx(0.9 * 0.5 * 0.5)
    assert prm.t3 == pytest.approx(2.0 - 0.9 * (2.0 - 1.5))
    with pytest.raises(ValidationError):
        ThresholdParams(t1=0.3).resolved(weight)
    with pytest.raises(ValidationError):
        ThresholdParams(t3=1.2).resolved(weight)
    with pytest.raises(ValidationError):
        ThresholdParams(kappa0=0.3, kappa1=0.4).resolved(weight)
    with pytest.raises(ValidationError):
        ThresholdParams(nu=2.0).resolved(weight)


def test_step1_crossings_bracket_kappa0(problem, report):
    q = problem.with_params(report.lam, 0.0)
    r1, l1 = step1_crossings(q, report.params.kappa0)
    assert 0.0 < r1 <= report.params.kappa0 <= l1 < 1.0
    assert (r1, l1) == pytest.approx((report.r1, report.l1), rel=1e-12)


def test_step1_requires_large_lambda(problem):
    with pytest.raises(InfeasibleError):
        step1_crossings(problem.with_params(1.0, 0.0), 0.8)


def test_certify_auto(report):
    assert report.feasible and report.mode == "auto"
    assert report.lambda_star == max(report.lambda_star_1, report.lambda_star_2)
    assert report.lam == pytest.approx(1.01 * report.lambda_star)
    assert report.mu_star == max(report.mu_star_components)
    assert 0.0 < report.r1 < report.l1 < 1.0
    for ks, k2 in zip(report.kappa_sigma, report.kappa2):
        assert 0.0 < ks < k2 < 1.0
    # the grid search can only improve on the fixed construction
    assert report.lambda_star <= LAMBDA_RIGHT
    d = report.to_dict()
    assert d["params"]["kappa0"] == report.params.kappa0


def test_certify_manual(problem):
    rep = certify(problem, ThresholdParams(t1=0.25, t3=1.75))
    assert rep.mode == "manual"
    assert rep.lambda_star_1 == pytest.approx(LAMBDA_LEFT, rel=1e-12)
    assert rep.lambda_star_2 == pytest.approx(LAMBDA_RIGHT, rel=1e-12)
    assert rep.lambda_star == rep.lambda_star_2


def test_certify_rejects_small_working_lambda(problem, report):
    with pytest.raises(InfeasibleError):
        certify(problem, lam=0.5 * report.lambda_star)
    with pytest.raises(ValidationError):
        certify(problem, params="fast")
