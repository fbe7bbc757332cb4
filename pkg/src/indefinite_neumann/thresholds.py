"""Explicit sufficiency thresholds for three positive solutions.

``lambda_star_left`` and ``lambda_star_right`` push the two positive humps
hard enough that large starting values are thrown out of ``[0, 1]``;
``mu_star`` makes the negative hump strong enough to throw selected states
above ``x = 1``.  :func:`certify` chains them into a pair
``(lambda*, mu*(lambda))`` following the shooting construction.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InfeasibleError, ValidationError
from .integrator import ProblemDef, Tolerance, shoot
from .nonlinearity import Nonlinearity
from .weight import WeightSpec

_REL = 1e-12


def _check_kappas(lo: float, hi: float, names: str) -> None:
    if not (0.0 < lo < hi < 1.0):
        raise ValidationError(f"need 0 < {names} < 1, got {lo}, {hi}")


def lambda_star_left(w: WeightSpec, g: Nonlinearity, kappa0: float, kappa1: float,
                     t1: float) -> float:
    """``(k0 - k1) / (g*(k1, k0) * int_0^t1 A+(0, xi) dxi)``."""
    _check_kappas(kappa1, kappa0, "kappa1 < kappa0")
    s = w.structure
    # a leading zero stretch [0, t0] contributes nothing; t1 must reach past it
    if not (s.t0 < t1 < s.sigma):
        raise ValidationError(f"need t0 = {s.t0} < t1 < sigma = {s.sigma}, got {t1}")
    den = g.g_min(kappa1, kappa0) * w.iterated_pos_from_left(0.0, t1)
    if not den > 0.0:
        raise InfeasibleError("zero denominator: a+ vanishes on [0, t1] or g* = 0")
    return (kappa0 - kappa1) / den


def lambda_star_right(w: WeightSpec, g: Nonlinearity, kappa3: float, kappaT: float,
                      t3: float) -> float:
    """``(kT - k3) / (g*(k3, kT) * int_t3^T A+(xi, T) dxi)``."""
    _check_kappas(kappa3, kappaT, "kappa3 < kappaT")
    tau, T = w.structure.tau, w.horizon
    if not (tau < t3 < T):
        raise ValidationError(f"need tau = {tau} < t3 < T = {T}, got {t3}")
    den = g.g_min(kappa3, kappaT) * w.iterated_pos_from_right(t3, T)
    if not den > 0.0:
        raise InfeasibleError("zero denominator: a+ vanishes on [t3, T] or g* = 0")
    return (kappaT - kappa3) / den


def omega_sigma(w: WeightSpec, g: Nonlinearity, lam: float) -> float:
    """``lam * A+(0, sigma) * max g``: a lower bound on ``-y(sigma)`` for starts on the axis."""
    if lam <= 0:
        raise DomainError("lambda must be positive")
    return lam * w.cum_pos(0.0, w.structure.sigma) * g.g_max()


def t2_upper(w: WeightSpec, kappa_sigma: float, kappa2: float, omega_s: float) -> float:
    """Largest admissible ``t2`` for the middle-hump step."""
    s = w.structure
    b1 = s.sigma + kappa_sigma / (2.0 * omega_s) if omega_s > 0 else math.inf
    b2 = (s.sigma * (1 - kappa2) + s.tau * (kappa2 - kappa_sigma)) / (1 - kappa_sigma)
    return min(b1, b2)


def mu_star(w: WeightSpec, g: Nonlinearity, kappa2: float, kappa_sigma: float, t2: float,
            omega_s: float, check_window: bool = True) -> float:
    """``[k2 - ks + (t2 - sigma) ws] / [g*(ks/2, k2) * int_sigma^t2 A-(sigma, xi) dxi]``."""
    _check_kappas(kappa_sigma, kappa2, "kappa_sigma < kappa2")
    if omega_s < 0:
        raise DomainError("omega_sigma must be nonnegative")
    sigma = w.structure.sigma
    if not t2 > sigma:
        raise InfeasibleError(f"empty window: t2 = {t2} must exceed sigma = {sigma}")
    if check_window:
        ub = t2_upper(w, kappa_sigma, kappa2, omega_s)
        if t2 > ub * (1 + _REL):
            raise InfeasibleError(f"t2 = {t2} outside the admissible window ]{sigma}, {ub}]")
    den = g.g_min(0.5 * kappa_sigma, kappa2) * w.iterated_neg_from_left(sigma, t2)
    if not den > 0.0:
        raise InfeasibleError("zero denominator: a- vanishes on [sigma, t2]")
    return (kappa2 - kappa_sigma + (t2 - sigma) * omega_s) / den


def _angle_bound(c: float, sigma: float, eps: float) -> float:
    r = math.sqrt(c * eps)
    return math.atan(r * math.tan(sigma * r))


def epsilon_hat(lam: float, nu: float, a_sup: float, sigma: float) -> float:
    """Supremum of ``eps`` with ``arctan(r tan(sigma r)) < nu``, ``r = sqrt(lam a_sup eps)``.

    The left side increases with ``eps`` and tends to ``pi/2`` at the tangent
    pole ``eps = pi^2 / (4 sigma^2 lam a_sup)``, so the answer is the unique
    crossing below that cap, found by bisection.
    """
    if not (0.0 < nu < math.pi / 2):
        raise DomainError("nu must lie in ]0, pi/2[")
    if lam <= 0 or a_sup <= 0 or sigma <= 0:
        raise DomainError("lambda, a_sup and sigma must be positive")
    c = lam * a_sup
    cap = math.pi ** 2 / (4.0 * sigma ** 2 * c)
    lo, hi = 0.0, cap
    while hi - lo > 1e-12 * cap:
        mid = 0.5 * (lo + hi)
        if _angle_bound(c, sigma, mid) < nu:
            lo = mid
        else:
            hi = mid
    return lo


# -- parameter bookkeeping ----------------------------------------------------


@dataclass(frozen=True)
class ThresholdParams:
    """Free constants of the construction; ``None`` entries take documented defaults.

    Defaults: ``t1 = 0.9 sigma (1 - k1/k0)``, ``t3 = T - 0.9 (T - tau)(1 - k3/kT)``,
    ``p1 = r1/2``, ``p2 = (l1 + 1)/2``, ``kappa2_i = (kappa_sigma_i + 1)/2`` and
    ``t2_i`` at the top of its window.
    """

    kappa0: float = 0.8
    kappa1: float = 0.4
    t1: float | None = None
    kappa3: float = 0.4
    kappaT: float = 0.8
    t3: float | None = None
    kappa2: tuple[float | None, float | None] = (None, None)
    t2: tuple[float | None, float | None] = (None, None)
    p: tuple[float | None, float | None] = (None, None)
    nu: float = 0.5

    def resolved(self, w: WeightSpec) -> "ThresholdParams":
        """Fill defaults for ``t1``/``t3`` and check the compatibility windows."""
        _check_kappas(self.kappa1, self.kappa0, "kappa1 < kappa0")
        _check_kappas(self.kappa3, self.kappaT, "kappa3 < kappaT")
        if not (0.0 < self.nu < math.pi / 2):
            raise ValidationError("nu must lie in ]0, pi/2[")
        s, T = w.structure, w.horizon
        b1 = s.sigma * (1 - self.kappa1 / self.kappa0)
        b3 = s.tau + (T - s.tau) * self.kappa3 / self.kappaT
        t1 = 0.9 * b1 if self.t1 is None else self.t1
        t3 = T - 0.9 * (T - b3) if self.t3 is None else self.t3
        if not (0.0 < t1 <= b1 * (1 + _REL)):
            raise ValidationError(f"t1 = {t1} violates 0 < t1 <= sigma (1 - k1/k0) = {b1}")
        if not (b3 * (1 - _REL) <= t3 < T):
            raise ValidationError(f"t3 = {t3} violates tau + (T - tau) k3/kT = {b3} <= t3 < T")
        return replace(self, t1=float(t1), t3=float(t3))

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("kappa2", "t2", "p"):
            d[k] = list(d[k])
        return d


@dataclass(frozen=True)
class ThresholdReport:
    lambda_star_1: float
    lambda_star_2: float
    lambda_star: float
    lam: float
    omega_sigma: float
    r1: float
    l1: float
    p: tuple[float, float]
    kappa_sigma: tuple[float, float]
    kappa2: tuple[float, float]
    t2: tuple[float, float]
    mu_star_components: tuple[float, float]
    mu_star: float
    params: ThresholdParams
    mode: str
    eps_hat: float
    delta_eps: float
    feasible: bool
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.to_dict()
        for k in ("p", "kappa_sigma", "kappa2", "t2", "mu_star_components"):
            d[k] = list(d[k])
        return d


# -- first-hump geometry ------------------------------------------------------


def _x_sigma(p: ProblemDef, xi, tol: Tolerance) -> np.ndarray:
    x, _ = shoot(p, 0.0, p.sigma, xi, tol=tol)
    return x


def step1_crossings(p: ProblemDef, kappa0: float, n: int = 4001,
                    tol: Tolerance | None = None) -> tuple[float, float]:
    """``(r1, l1)``: first zero of ``xi -> x(sigma; 0, xi, 0)`` in ``]0, k0]`` and last in ``[k0, 1[``."""
    tol = tol or Tolerance()
    f = lambda v: float(_x_sigma(p, [v], tol)[0])  # noqa: E731
    if f(kappa0) > 0.0:
        raise InfeasibleError(f"x(sigma) > 0 from kappa0 = {kappa0}; lambda too small")
    grid = np.linspace(0.0, kappa0, n)[1:]
    xs = _x_sigma(p, grid, tol)
    k = int(np.argmax(xs <= 0.0))
    r1 = kappa0 if k == 0 and xs[0] <= 0 else float(brentq(f, grid[k - 1], grid[k], xtol=1e-15))
    grid = np.linspace(kappa0, 1.0, n)[:-1]
    xs = _x_sigma(p, grid, tol)
    k = len(grid) - 1 - int(np.argmax(xs[::-1] <= 0.0))
    l1 = float(brentq(f, grid[k], grid[k + 1], xtol=1e-15)) if k + 1 < len(grid) else kappa0
    return r1, l1


# -- searches -----------------------------------------------------------------


def _kappa_grid(step: float = 0.025) -> np.ndarray:
    return np.round(np.arange(step, 1.0 - step / 2, step), 10)


def best_left(w: WeightSpec, g: Nonlinearity) -> tuple[float, float, float, float]:
    """Minimize ``lambda_star_left`` over a ``kappa`` grid with ``t1`` at its upper limit."""
    best = (math.inf, 0.0, 0.0, 0.0)
    sigma = w.structure.sigma
    for k0 in _kappa_grid():
        for k1 in _kappa_grid():
            if k1 >= k0:
                break
            t1 = sigma * (1 - k1 / k0)
            try:
                v = lambda_star_left(w, g, k0, k1, t1)
            except (InfeasibleError, ValidationError):
                continue
            best = min(best, (v, k0, k1, t1))
    if not math.isfinite(best[0]):
        raise InfeasibleError("no admissible (kappa0, kappa1, t1)")
    return best


def best_right(w: WeightSpec, g: Nonlinearity) -> tuple[float, float, float, float]:
    """Minimize ``lambda_star_right`` with ``t3`` at its lower limit."""
    best = (math.inf, 0.0, 0.0, 0.0)
    s, T = w.structure, w.horizon
    for kT in _kappa_grid():
        for k3 in _kappa_grid():
            if k3 >= kT:
                break
            t3 = s.tau + (T - s.tau) * k3 / kT
            try:
                v = lambda_star_right(w, g, k3, kT, t3)
            except (InfeasibleError, ValidationError):
                continue
            best = min(best, (v, k3, kT, t3))
    if not math.isfinite(best[0]):
        raise InfeasibleError("no admissible (kappa3, kappaT, t3)")
    return best


def _best_mu(w: WeightSpec, g: Nonlinearity, ks: float, omega_s: float,
             fracs=(0.5, 0.75, 0.9, 1.0), n_k2: int = 40) -> tuple[float, float, float]:
    sigma = w.structure.sigma
    best = (math.inf, 0.0, 0.0)
    for k2 in ks + (1.0 - ks) * (np.arange(1, n_k2 + 1) / (n_k2 + 1)):
        ub = t2_upper(w, ks, k2, omega_s)
        for f in fracs:
            t2 = sigma + f * (ub - sigma)
            try:
                v = mu_star(w, g, float(k2), ks, t2, omega_s)
            except (InfeasibleError, ValidationError):
                continue
            best = min(best, (v, float(k2), float(t2)))
    return best


def certify(p: ProblemDef, params: ThresholdParams | Literal["auto"] = "auto",
            lam: float | None = None, lam_factor: float = 1.01,
            tol: Tolerance | None = None, n_p: int = 40) -> ThresholdReport:
    """Assemble ``lambda*`` and ``mu*(lambda)`` for the weight and ``g`` of ``p``.

    ``lam`` is the working ``lambda`` (default ``lam_factor * lambda*``); ``p.lam``
    and ``p.mu`` are ignored.  In ``"auto"`` mode ``(k0, k1, t1)`` and
    ``(k3, kT, t3)`` are grid-searched to minimize each ``lambda`` threshold and
    ``(p_i, kappa2_i, t2_i)`` to minimize each ``mu`` component.  Infeasible
    windows are reported through ``feasible`` and ``flags``.
    """
    tol = tol or Tolerance()
    w, g = p.weight, p.g
    s = w.structure
    flags: dict = {"delta_eps_heuristic": True}
    if params == "auto":
        l1v, k0, k1, t1 = best_left(w, g)
        l2v, k3, kT, t3 = best_right(w, g)
        prm = ThresholdParams(kappa0=k0, kappa1=k1, t1=t1, kappa3=k3, kappaT=kT, t3=t3)
        mode = "auto"
    elif isinstance(params, ThresholdParams):
        prm = params.resolved(w)
        l1v = lambda_star_left(w, g, prm.kappa0, prm.kappa1, prm.t1)
        l2v = lambda_star_right(w, g, prm.kappa3, prm.kappaT, prm.t3)
        mode = "manual"
    else:
        raise ValidationError("params must be a ThresholdParams or 'auto'")
    lstar = max(l1v, l2v)
    lam_w = lam_factor * lstar if lam is None else float(lam)
    if not lam_w > lstar:
        raise InfeasibleError(f"working lambda {lam_w} does not exceed lambda* = {lstar}")
    ws = omega_sigma(w, g, lam_w)
    pw = p.with_params(lam_w, p.mu)
    r1, l1 = step1_crossings(pw, prm.kappa0, tol=tol)

    a_sup = w.sup_pos()
    eps = epsilon_hat(lam_w, prm.nu, a_sup, s.sigma)
    delta = min(g.delta_for(0.5 * eps, cap=prm.kappa1), prm.kappa1 * (1 - 1e-9))

    feasible = True
    out_p, out_ks, out_k2, out_t2, out_mu = [], [], [], [], []
    ranges = [(0.0, r1), (l1, 1.0)]
    for i in range(2):
        a, b = ranges[i]
        if mode == "auto" and prm.p[i] is None:
            cand = a + (b - a) * (np.arange(1, n_p + 1) / (n_p + 1))
        else:
            cand = np.array([prm.p[i] if prm.p[i] is not None else 0.5 * (a + b)])
        ks_all = _x_sigma(pw, cand, tol)
        best = (math.inf, math.nan, math.nan, math.nan, math.nan)
        for pi, ks in zip(cand, ks_all):
            if not (0.0 < ks < 1.0):
                continue
            ks = float(ks)
            if mode == "auto" and prm.kappa2[i] is None:
                v, k2, t2 = _best_mu(w, g, ks, ws)
            else:
                k2 = prm.kappa2[i] if prm.kappa2[i] is not None else 0.5 * (ks + 1.0)
                if not ks < k2 < 1.0:
                    continue
                t2 = prm.t2[i] if prm.t2[i] is not None else t2_upper(w, ks, k2, ws)
                try:
                    v = mu_star(w, g, k2, ks, t2, ws)
                except InfeasibleError as exc:
                    flags[f"mu_{i + 1}"] = str(exc)
                    continue
            best = min(best, (v, float(pi), ks, k2, t2))
        if not math.isfinite(best[0]):
            feasible = False
            flags.setdefault(f"mu_{i + 1}", "no admissible (p, kappa2, t2)")
        out_mu.append(best[0])
        out_p.append(best[1])
        out_ks.append(best[2])
        out_k2.append(best[3])
        out_t2.append(best[4])
    mstar = max(out_mu)
    return ThresholdReport(
        lambda_star_1=l1v, lambda_star_2=l2v, lambda_star=lstar, lam=lam_w, omega_sigma=ws,
        r1=r1, l1=l1, p=tuple(out_p), kappa_sigma=tuple(out_ks), kappa2=tuple(out_k2),
        t2=tuple(out_t2), mu_star_components=tuple(out_mu), mu_star=mstar, params=prm,
        mode=mode, eps_hat=eps, delta_eps=delta, feasible=feasible and math.isfinite(mstar),
        flags=flags)
