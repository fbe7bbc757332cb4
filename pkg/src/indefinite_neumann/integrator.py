"""Planar system ``x' = y, y' = -(lambda a+(t) - mu a-(t)) g(x)`` and its Poincare maps."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import DomainError, NumericalBlowUpError, ValidationError
from .nonlinearity import Nonlinearity
from .weight import ScaledWeight, WeightSpec

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
MAX_STEPS = 2_000_000


class PlanarState(NamedTuple):
    x: float
    y: float

    def distance(self, other: "PlanarState") -> float:
        return float(np.hypot(self.x - other.x, self.y - other.y))


@dataclass(frozen=True)
class Tolerance:
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    h_max: float = np.inf
    h_fixed: float = 0.0  # > 0 switches to fixed-step RK5 (used for order checks)

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0 or self.h_max <= 0 or self.h_fixed < 0:
            raise ValidationError("tolerances and step bounds must be positive")


@dataclass(frozen=True, eq=False)
class ProblemDef:
    """Full instance: weight, nonlinearity and the pair ``(lambda, mu)``.

    ``lam`` and ``mu`` may be zero (degenerate scalings), but the unscaled
    weight must carry the positive/negative/positive pattern.
    """

    weight: WeightSpec
    g: Nonlinearity
    lam: float
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "mu", float(self.mu))
        self.weight.structure  # raises on a malformed sign pattern
        self.scaled  # raises on negative or nonfinite parameters

    @property
    def T(self) -> float:
        return self.weight.horizon

    @property
    def sigma(self) -> float:
        return self.weight.structure.sigma

    @property
    def tau(self) -> float:
        return self.weight.structure.tau

    @cached_property
    def scaled(self) -> ScaledWeight:
        return ScaledWeight(self.weight, self.lam, self.mu)

    @cached_property
    def _arrays(self):
        return (np.ascontiguousarray(self.scaled.knots), self.scaled.coeffs,
                np.ascontiguousarray(self.g.knots), self.g.coeffs)

    def a(self, t):
        """Scaled weight ``a_{lambda,mu}(t)``."""
        return self.scaled.eval(t)

    def with_params(self, lam: float | None = None, mu: float | None = None) -> "ProblemDef":
        return ProblemDef(self.weight, self.g,
                          self.lam if lam is None else lam,
                          self.mu if mu is None else mu)


def _hermite(t, t0, t1, v0, v1, d0, d1):
    h = t1 - t0
    s = np.where(h > 0, (t - t0) / np.where(h > 0, h, 1.0), 0.0)
    s2, s3 = s * s, s * s * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    val = h00 * v0 + h10 * h * d0 + h01 * v1 + h11 * h * d1
    hs = np.where(h > 0, h, 1.0)
    dval = ((6 * s2 - 6 * s) * (v0 - v1) / hs
            + (3 * s2 - 4 * s + 1) * d0 + (3 * s2 - 2 * s) * d1)
    return val, dval


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted knots of one integration run, in the order they were produced.

    ``dy_in``/``dy_out`` are the values of ``y'`` at each knot on the side of
    the step that arrives at / leaves from that knot; they differ only at
    weight breakpoints.  ``dense`` evaluates a piecewise cubic Hermite
    interpolant in ``x`` and ``y`` at arbitrary times in the span.
    """

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dy_in: np.ndarray
    dy_out: np.ndarray
    tol: Tolerance = field(default_factory=Tolerance)

    @property
    def forward(self) -> bool:
        return len(self.times) < 2 or self.times[-1] > self.times[0]

    @property
    def states(self) -> list[PlanarState]:
        return [PlanarState(float(a), float(b)) for a, b in zip(self.x, self.y)]

    @property
    def start(self) -> PlanarState:
        return PlanarState(float(self.x[0]), float(self.y[0]))

    @property
    def end(self) -> PlanarState:
        return PlanarState(float(self.x[-1]), float(self.y[-1]))

    @cached_property
    def _ascending(self):
        if self.forward:
            return self.times, self.x, self.y, self.dy_out, self.dy_in
        # reversing a backward run: the step leaving knot k in time order
        # arrives at it in ascending order, so the one-sided slopes swap
        r = slice(None, None, -1)
        return self.times[r], self.x[r], self.y[r], self.dy_in[r], self.dy_out[r]

    def dense(self, t, derivative: bool = False):
        """``(x, y)`` at ``t`` (and ``(x', y')`` if ``derivative``)."""
        ts, xs, ys, d_right, d_left = self._ascending
        ta = np.asarray(t, dtype=float)
        if np.any((ta < ts[0] - 1e-12) | (ta > ts[-1] + 1e-12)):
            raise DomainError("dense evaluation outside the trajectory span")
        if len(ts) == 1:
            xv = np.full_like(ta, xs[0])
            yv = np.full_like(ta, ys[0])
            zero = np.zeros_like(ta)
            return (xv, yv, zero, zero) if derivative else (xv, yv)
        i = np.clip(np.searchsorted(ts, ta, side="right") - 1, 0, len(ts) - 2)
        t0, t1 = ts[i], ts[i + 1]
        xv, xd = _hermite(ta, t0, t1, xs[i], xs[i + 1], ys[i], ys[i + 1])
        yv, yd = _hermite(ta, t0, t1, ys[i], ys[i + 1], d_right[i], d_left[i + 1])
        if derivative:
            return xv, yv, xd, yd
        return xv, yv

    def x_range(self, n: int = 10_000) -> tuple[float, float]:
        """Min and max of ``x`` over the knots and a uniform ``n``-point grid."""
        lo, hi = sorted((self.times[0], self.times[-1]))
        xv, _ = self.dense(np.linspace(lo, hi, n))
        return float(min(xv.min(), self.x.min())), float(max(xv.max(), self.x.max()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y"])
            for row in zip(self.times, self.x, self.y):
                w.writerow(["%.17g" % v for v in row])


def _check_span(p: ProblemDef, *ts: float) -> None:
    for t in ts:
        if not (0.0 <= t <= p.T):
            raise DomainError(f"time {t} outside [0, {p.T}]")


def _raise_status(status: int, where: str) -> None:
    if status == _kernels.OK:
        return
    msg = {
        _kernels.NONFINITE: "non-finite state",
        _kernels.UNDERFLOW: "step size underflow",
        _kernels.MAX_STEPS: "step budget exhausted",
        _kernels.BUFFER_FULL: "knot buffer exhausted",
    }.get(status, f"status {status}")
    raise NumericalBlowUpError(f"{msg} while integrating {where}")


def integrate(p: ProblemDef, t_from: float, t_to: float, s0, tol: Tolerance | None = None,
              capacity: int = 200_000) -> Trajectory:
    """Integrate from ``t_from`` to ``t_to`` (either direction), recording every knot."""
    tol = tol or Tolerance()
    _check_span(p, t_from, t_to)
    x0, y0 = map(float, s0)
    if not (np.isfinite(x0) and np.isfinite(y0)):
        raise DomainError("initial state must be finite")
    wk, wc, gk, gc = p._arrays
    bufs = [np.empty(capacity) for _ in range(5)]
    status, n, _, _ = _kernels.run(float(t_from), float(t_to), x0, y0, wk, wc, gk, gc,
                                   tol.rtol, tol.atol, tol.h_max, tol.h_fixed, MAX_STEPS,
                                   True, *bufs)
    if status == _kernels.BUFFER_FULL:
        return integrate(p, t_from, t_to, s0, tol, capacity * 8)
    _raise_status(status, f"[{t_from}, {t_to}]")
    t, x, y, din, dout = (b[:n].copy() for b in bufs)
    return Trajectory(t, x, y, din, dout, tol)


def poincare(p: ProblemDef, alpha: float, beta: float, s, tol: Tolerance | None = None
             ) -> PlanarState:
    """``Phi_alpha^beta(s)``: the state at ``beta`` of the solution through ``s`` at ``alpha``."""
    tol = tol or Tolerance()
    _check_span(p, alpha, beta)
    x0, y0 = map(float, s)
    if alpha == beta:
        return PlanarState(x0, y0)
    wk, wc, gk, gc = p._arrays
    dummy = np.empty(0)
    status, _, x, y = _kernels.run(float(alpha), float(beta), x0, y0, wk, wc, gk, gc,
                                   tol.rtol, tol.atol, tol.h_max, tol.h_fixed, MAX_STEPS,
                                   False, dummy, dummy, dummy, dummy, dummy)
    _raise_status(status, f"[{alpha}, {beta}]")
    return PlanarState(x, y)


def shoot(p: ProblemDef, alpha: float, beta: float, x0, y0=None,
          tol: Tolerance | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Poincare map for many starting states."""
    tol = tol or Tolerance()
    _check_span(p, alpha, beta)
    x0 = np.ascontiguousarray(np.atleast_1d(np.asarray(x0, dtype=float)))
    y0 = np.zeros_like(x0) if y0 is None else np.ascontiguousarray(
        np.broadcast_to(np.asarray(y0, dtype=float), x0.shape))
    if alpha == beta:
        return x0.copy(), y0.copy()
    wk, wc, gk, gc = p._arrays
    xs, ys, status = _kernels.shoot_batch(float(alpha), float(beta), x0, y0, wk, wc, gk, gc,
                                          tol.rtol, tol.atol, tol.h_max, tol.h_fixed,
                                          MAX_STEPS)
    bad = np.flatnonzero(status != _kernels.OK)
    if bad.size:
        _raise_status(int(status[bad[0]]), f"[{alpha}, {beta}] from x0={x0[bad[0]]}")
    return xs, ys


def ode_residual(p: ProblemDef, traj: Trajectory, t) -> np.ndarray:
    """Pointwise ``max(|x' - y|, |y' + a g(x)|)`` of the dense interpolant."""
    x, y, xd, yd = traj.dense(t, derivative=True)
    a = p.scaled.eval(np.asarray(t, dtype=float))
    return np.maximum(np.abs(xd - y), np.abs(yd + a * p.g.eval_ext(x)))
