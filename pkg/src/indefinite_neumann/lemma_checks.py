"""Randomized numerical checks of the phase-plane lemmas behind the construction.

Each lemma fixes a time window, a hypothesis set of states and a conclusion
set.  A :class:`LemmaCase` records one trial: the sampled constants, the
initial state, the integrated end state and the verdict.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import PreconditionError, ValidationError
from .integrator import ProblemDef, Tolerance, integrate, poincare
from .thresholds import (ThresholdReport, epsilon_hat, lambda_star_left, lambda_star_right,
                         mu_star)

LEMMAS = ("2.1", "2.2", "ang", "2.4", "2.5", "2.6", "2.7")
SLACK = 1e-9


@dataclass
class LemmaCase:
    lemma_id: str
    trial: int
    seed: int
    params: dict
    t_from: float
    t_to: float
    start: tuple[float, float]
    end: tuple[float, float]
    passed: bool
    detail: str = ""
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _require(cond: bool, what: str) -> None:
    if not cond:
        raise PreconditionError(f"precondition violated: {what}")


def _u(rng: np.random.Generator, a: float, b: float) -> float:
    return float(rng.uniform(a, b))


# Each sampler returns (params, t_from, t_to, start, verify) where verify maps
# the end state (and the problem/trajectory data) to (passed, detail, witness).


def _lemma_21(p, prm, rng, fixed):
    s = p.weight.structure
    k1 = prm.get("kappa1") if fixed else _u(rng, 0.05, 0.95)
    t1 = prm.get("t1") if fixed else _u(rng, 0.05, 0.95) * s.sigma
    _require(0 < k1 < 1, "0 < kappa1 < 1")
    _require(0 < t1 < s.sigma, "0 < t1 < sigma")
    g_lo = k1 / (s.sigma - t1)
    gamma = prm.get("gamma1") if fixed and "gamma1" in prm else g_lo * (1 + _u(rng, 0, 1))
    _require(gamma >= g_lo * (1 - 1e-12), "gamma1 >= kappa1 / (sigma - t1)")
    x0 = k1 - _u(rng, 0, 1) * (k1 + 0.5)
    y0 = -gamma - _u(rng, 0, 5)

    def verify(end):
        ok = end[0] <= SLACK and end[1] <= -gamma + SLACK
        return ok, "x(sigma) <= 0 and y(sigma) <= -gamma1"

    return dict(kappa1=k1, t1=t1, gamma1=gamma), t1, s.sigma, (x0, y0), verify


def _lemma_22(p, prm, rng, fixed):
    s = p.weight.structure
    for _ in range(1000):
        if fixed:
            k0, k1, t1 = prm["kappa0"], prm["kappa1"], prm["t1"]
        else:
            k0 = _u(rng, 0.1, 0.95)
            k1 = _u(rng, 0.05, 0.95) * k0
            t1 = _u(rng, 0.05, 0.999) * s.sigma
        lstar = lambda_star_left(p.weight, p.g, k0, k1, t1)
        if p.lam > lstar or fixed:
            break
    _require(p.lam > lstar, f"lambda = {p.lam} > lambda_star_left = {lstar}")
    g_hi = (k0 - k1) / t1
    gamma = g_hi * _u(rng, 1e-3, 1.0)
    if fixed and "gamma1" in prm:
        gamma = prm["gamma1"]
    _require(0 < gamma <= g_hi * (1 + 1e-12), "0 < gamma1 <= (kappa0 - kappa1) / t1")

    def verify(end):
        ok = end[0] < k1 + SLACK and end[1] < -gamma + SLACK
        return ok, "x(t1) < kappa1 and y(t1) < -gamma1"

    params = dict(kappa0=k0, kappa1=k1, t1=t1, gamma1=gamma, lambda_star=lstar)
    return params, 0.0, t1, (k0, 0.0), verify


def _lemma_ang(p, prm, rng, fixed):
    s = p.weight.structure
    nu = prm.get("nu") if fixed else _u(rng, 0.1, 1.4)
    k1 = prm.get("kappa1") if fixed else _u(rng, 0.05, 0.95)
    _require(0 < nu < math.pi / 2, "0 < nu < pi/2")
    _require(0 < k1 < 1, "0 < kappa1 < 1")
    eps_hat = epsilon_hat(p.lam, nu, p.weight.sup_pos(), s.sigma)
    eps = eps_hat * _u(rng, 0.01, 1.0)
    delta = min(p.g.delta_for(eps, cap=k1), k1 * (1 - 1e-9))
    _require(delta > 0, "delta_eps > 0")
    # kappa log-uniform in ]1e-6 delta, delta]
    kappa = delta * 10.0 ** (-6.0 * rng.uniform(0.0, 1.0))

    def verify(end, traj):
        t = np.linspace(0.0, s.sigma, 1001)
        x, y = traj.dense(t)
        if np.any(x <= 0):
            return False, "x reached 0 before sigma"
        ang = np.arctan(y / x)
        ok = bool(np.all(ang >= -nu - SLACK) and np.all(ang <= SLACK))
        return ok, "-nu <= arctan(y/x) <= 0 on [0, sigma]", {"min_angle": float(ang.min())}

    params = dict(nu=nu, kappa1=k1, eps_hat=eps_hat, eps=eps, delta_eps=delta, kappa=kappa)
    return params, 0.0, s.sigma, (kappa, 0.0), verify


def _lemma_24(p, prm, rng, fixed):
    s, T = p.weight.structure, p.T
    k3 = prm.get("kappa3") if fixed else _u(rng, 0.05, 0.95)
    t3 = prm.get("t3") if fixed else s.tau + _u(rng, 0.05, 0.95) * (T - s.tau)
    _require(0 < k3 < 1, "0 < kappa3 < 1")
    _require(s.tau < t3 < T, "tau < t3 < T")
    g_lo = k3 / (t3 - s.tau)
    gamma = prm.get("gamma3") if fixed and "gamma3" in prm else g_lo * (1 + _u(rng, 0, 1))
    _require(gamma >= g_lo * (1 - 1e-12), "gamma3 >= kappa3 / (t3 - tau)")
    x0 = k3 - _u(rng, 0, 1) * (k3 + 0.5)
    y0 = gamma + _u(rng, 0, 5)

    def verify(end):
        ok = end[0] <= SLACK and end[1] >= gamma - SLACK
        return ok, "x(tau) <= 0 and y(tau) >= gamma3"

    return dict(kappa3=k3, t3=t3, gamma3=gamma), t3, s.tau, (x0, y0), verify


def _lemma_25(p, prm, rng, fixed):
    s, T = p.weight.structure, p.T
    for _ in range(1000):
        if fixed:
            k3, kT, t3 = prm["kappa3"], prm["kappaT"], prm["t3"]
        else:
            kT = _u(rng, 0.1, 0.95)
            k3 = _u(rng, 0.05, 0.95) * kT
            t3 = s.tau + _u(rng, 0.001, 0.95) * (T - s.tau)
        lstar = lambda_star_right(p.weight, p.g, k3, kT, t3)
        if p.lam > lstar or fixed:
            break
    _require(p.lam > lstar, f"lambda = {p.lam} > lambda_star_right = {lstar}")
    g_hi = (kT - k3) / (T - t3)
    gamma = g_hi * _u(rng, 1e-3, 1.0)
    if fixed and "gamma3" in prm:
        gamma = prm["gamma3"]
    _require(0 < gamma <= g_hi * (1 + 1e-12), "0 < gamma3 <= (kappaT - kappa3) / (T - t3)")

    def verify(end):
        ok = end[0] < k3 + SLACK and end[1] > gamma - SLACK
        return ok, "x(t3) < kappa3 and y(t3) > gamma3"

    params = dict(kappa3=k3, kappaT=kT, t3=t3, gamma3=gamma, lambda_star=lstar)
    return params, T, t3, (kT, 0.0), verify


def _lemma_26(p, prm, rng, fixed):
    s = p.weight.structure
    k2 = prm.get("kappa2") if fixed else _u(rng, 0.05, 0.95)
    t2 = prm.get("t2") if fixed else s.sigma + _u(rng, 0.05, 0.95) * (s.tau - s.sigma)
    _require(0 < k2 < 1, "0 < kappa2 < 1")
    _require(s.sigma < t2 < s.tau, "sigma < t2 < tau")
    w_lo = (1 - k2) / (s.tau - t2)
    omega = prm.get("omega") if fixed and "omega" in prm else w_lo * (1 + _u(rng, 0, 1))
    _require(omega >= w_lo * (1 - 1e-12), "omega >= (1 - kappa2) / (tau - t2)")
    x0 = k2 + _u(rng, 0, 1) * (1.5 - k2)
    y0 = omega + _u(rng, 0, 5)
    if fixed and prm.get("boundary"):
        x0, y0 = k2, omega

    def verify(end):
        ok = end[0] >= 1 - SLACK and end[1] >= omega - SLACK
        return ok, "x(tau) >= 1 and y(tau) >= omega"

    return dict(kappa2=k2, t2=t2, omega=omega), t2, s.tau, (x0, y0), verify


def _lemma_27(p, prm, rng, fixed):
    s = p.weight.structure
    for _ in range(1000):
        if fixed:
            ks, k2, t2, ws = prm["kappa_sigma"], prm["kappa2"], prm["t2"], prm["omega_sigma"]
        else:
            ks = _u(rng, 0.05, 0.9)
            k2 = ks + _u(rng, 0.05, 0.95) * (1 - ks)
            ws = _u(rng, 0.5, 20.0)
            ub = min(s.sigma + ks / (2 * ws), s.tau)
            t2 = s.sigma + _u(rng, 0.05, 1.0) * (ub - s.sigma)
        _require(0 < ks < k2 < 1, "0 < kappa_sigma < kappa2 < 1")
        _require(ws > 0, "omega_sigma > 0")
        ub = min(s.sigma + ks / (2 * ws), s.tau)
        _require(s.sigma < t2 <= ub * (1 + 1e-12),
                 "sigma < t2 <= min(sigma + kappa_sigma / (2 omega_sigma), tau)")
        mstar = mu_star(p.weight, p.g, k2, ks, t2, ws, check_window=False)
        if p.mu > mstar or fixed:
            break
    _require(p.mu > mstar, f"mu = {p.mu} > mu_star = {mstar}")
    w_hi = (k2 - ks) / (t2 - s.sigma)
    omega = w_hi * _u(rng, 1e-3, 1.0)
    y0 = -ws + _u(rng, 0, 1) * 2 * ws

    def verify(end):
        ok = end[0] > k2 - SLACK and end[1] > omega - SLACK
        return ok, "x(t2) > kappa2 and y(t2) > omega"

    params = dict(kappa_sigma=ks, kappa2=k2, t2=t2, omega_sigma=ws, omega=omega, mu_star=mstar)
    return params, s.sigma, t2, (ks, y0), verify


_SAMPLERS: dict[str, Callable] = {
    "2.1": _lemma_21, "2.2": _lemma_22, "ang": _lemma_ang, "2.4": _lemma_24,
    "2.5": _lemma_25, "2.6": _lemma_26, "2.7": _lemma_27,
}


def check(lemma_id: str, p: ProblemDef, params: dict | None = None, trials: int = 100,
          seed: int = 0, tol: Tolerance | None = None) -> list[LemmaCase]:
    """Run ``trials`` randomized instances of one lemma on problem ``p``.

    With ``params`` the lemma constants are held fixed (and validated, raising
    :class:`PreconditionError` naming the violated inequality) while the
    initial states and the remaining free constants are drawn at random.
    Without ``params`` every trial draws admissible constants as well.
    Each trial uses its own generator ``default_rng([seed, trial])``.
    """
    if lemma_id not in _SAMPLERS:
        raise ValidationError(f"unknown lemma {lemma_id!r}; expected one of {LEMMAS}")
    tol = tol or Tolerance()
    sampler = _SAMPLERS[lemma_id]
    fixed = params is not None
    prm = dict(params or {})
    cases = []
    for k in range(trials):
        rng = np.random.default_rng([seed, k])
        sampled, t_from, t_to, start, verify = sampler(p, prm, rng, fixed)
        if lemma_id == "ang":
            traj = integrate(p, t_from, t_to, start, tol)
            end = traj.end
            ok, detail, wit = verify(end, traj)
        else:
            end = poincare(p, t_from, t_to, start, tol)
            ok, detail = verify(end)
            wit = {}
        cases.append(LemmaCase(lemma_id, k, seed, sampled, t_from, t_to,
                               (float(start[0]), float(start[1])),
                               (float(end[0]), float(end[1])), bool(ok), detail, wit))
    return cases


def suite_params(report: ThresholdReport, i: int = 0) -> dict[str, dict]:
    """Lemma constants taken from a threshold certificate (middle-hump branch ``i``)."""
    prm = report.params
    return {
        "2.1": {"kappa1": prm.kappa1, "t1": prm.t1},
        "2.2": {"kappa0": prm.kappa0, "kappa1": prm.kappa1, "t1": prm.t1},
        "ang": {"nu": prm.nu, "kappa1": prm.kappa1},
        "2.4": {"kappa3": prm.kappa3, "t3": prm.t3},
        "2.5": {"kappa3": prm.kappa3, "kappaT": prm.kappaT, "t3": prm.t3},
        "2.6": {"kappa2": report.kappa2[i], "t2": report.t2[i]},
        "2.7": {"kappa_sigma": report.kappa_sigma[i], "kappa2": report.kappa2[i],
                "t2": report.t2[i], "omega_sigma": report.omega_sigma},
    }


def run_suite(p: ProblemDef, report: ThresholdReport, trials: int = 100, seed: int = 0,
              tol: Tolerance | None = None) -> dict[str, list[LemmaCase]]:
    """All seven lemmas with constants from ``report``; both middle-hump branches for 2.6/2.7.

    ``p`` should carry the certified ``(lambda, mu)``.
    """
    out: dict[str, list[LemmaCase]] = {}
    for lid, prm in suite_params(report, 0).items():
        cases = check(lid, p, prm, trials, seed, tol)
        if lid in ("2.6", "2.7"):
            half = trials // 2
            alt = suite_params(report, 1)[lid]
            cases = cases[:trials - half] + check(lid, p, alt, half, seed + 1, tol)
        out[lid] = cases
    return out


def summarize(results: dict[str, list[LemmaCase]]) -> dict:
    return {lid: {"trials": len(c), "failures": sum(not x.passed for x in c)}
            for lid, c in results.items()}


def export_json(results: dict[str, list[LemmaCase]]) -> dict:
    """JUnit-like structure: one test suite per lemma, one test case per trial."""
    suites = []
    for lid, cases in results.items():
        suites.append({
            "name": f"lemma-{lid}",
            "tests": len(cases),
            "failures": sum(not c.passed for c in cases),
            "cases": [c.to_dict() for c in cases],
        })
    return {"testsuites": suites}


def export_csv(results: dict[str, list[LemmaCase]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lemma", "trial", "seed", "passed", "t_from", "t_to",
                    "x0", "y0", "x_end", "y_end"])
        for lid, cases in results.items():
            for c in cases:
                w.writerow([lid, c.trial, c.seed, int(c.passed)]
                           + ["%.17g" % v for v in (c.t_from, c.t_to, *c.start, *c.end)])
