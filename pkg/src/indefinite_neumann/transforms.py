"""Periodic extension of Neumann solutions and the radial reduction on an annulus.

Radial problem on ``R_i < |x| < R_e`` in dimension ``N``::

    U'' + (N - 1)/r U' + W(r) g(U) = 0,   U'(R_i) = U'(R_e) = 0.

The substitution ``t = h(r) = int_{R_i}^r s^(1-N) ds`` turns it into the 1D
Neumann problem with weight ``a(t) = r(t)^(2(N-1)) W(r(t))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _pp
from .errors import DomainError, ValidationError
from .integrator import ProblemDef, Trajectory
from .nonlinearity import Nonlinearity
from .weight import Piece, WeightSpec

DEFAULT_SAMPLES = 2048


# -- radial reduction ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialSpec:
    """Annulus ``R_i < |x| < R_e`` in ``R^N`` with radial weight ``W``.

    ``weight`` is stored on ``[0, R_e]`` and vanishes on ``[0, R_i]``, so its
    sign markers ``sigma`` and ``tau`` are radii.
    """

    N: int
    R_i: float
    R_e: float
    weight: WeightSpec

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"dimension N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not (0 < self.R_i < self.R_e and math.isfinite(self.R_e)):
            raise DomainError("radii must satisfy 0 < R_i < R_e")
        if abs(self.weight.horizon - self.R_e) > 1e-12:
            raise ValidationError("radial weight must end at R_e")
        if np.any(self.weight.eval(np.linspace(0.0, self.R_i, 5)[:-1]) != 0):
            raise ValidationError("radial weight must vanish below R_i")
        self.weight.structure

    @classmethod
    def from_pieces(cls, N: int, R_i: float, R_e: float, pieces) -> "RadialSpec":
        """Build from pieces tiling ``[R_i, R_e]``."""
        pieces = [Piece(0.0, R_i, "constant", 0.0), *pieces]
        return cls(N, R_i, R_e, WeightSpec(tuple(pieces), R_e))

    @classmethod
    def piecewise_constant(cls, N: int, radii, values) -> "RadialSpec":
        radii = [float(r) for r in radii]
        pieces = [Piece(a, b, "constant", v) for a, b, v in zip(radii[:-1], radii[1:], values)]
        return cls.from_pieces(N, radii[0], radii[-1], pieces)

    @classmethod
    def from_dict(cls, d: dict) -> "RadialSpec":
        w = d["weight"]
        pieces = [Piece.from_dict(p) for p in w["pieces"]]
        return cls.from_pieces(int(d["N"]), float(d["R_i"]), float(d["R_e"]), pieces)

    def to_dict(self) -> dict:
        pieces = [p.to_dict() for p in self.weight.pieces[1:]]
        return {"N": self.N, "R_i": self.R_i, "R_e": self.R_e,
                "weight": {"horizon": self.R_e, "pieces": pieces}}

    # change of variables

    def h(self, r):
        """``t = int_{R_i}^r s^(1-N) ds``."""
        r = np.asarray(r, dtype=float)
        if self.N == 2:
            out = np.log(r / self.R_i)
        else:
            k = self.N - 2
            out = (self.R_i ** -k - r ** -k) / k
        return float(out) if out.ndim == 0 else out

    def h_inv(self, t):
        t = np.asarray(t, dtype=float)
        if self.N == 2:
            out = self.R_i * np.exp(t)
        else:
            k = self.N - 2
            out = (self.R_i ** -k - k * t) ** (-1.0 / k)
        return float(out) if out.ndim == 0 else out

    @property
    def T(self) -> float:
        return self.h(self.R_e)

    def W(self, r):
        return self.weight.eval(r)


@dataclass(frozen=True, eq=False)
class RadialReduction:
    spec: RadialSpec
    weight: WeightSpec
    h: Callable
    h_inv: Callable

    @property
    def T(self) -> float:
        return self.weight.horizon

    def problem(self, g: Nonlinearity, lam: float, mu: float) -> ProblemDef:
        return ProblemDef(self.weight, g, lam, mu)


def radial_reduce(rs: RadialSpec, n_samples: int = DEFAULT_SAMPLES) -> RadialReduction:
    """Reduced 1D weight sampled on about ``n_samples`` points, split at the radial knots."""
    knots, coeffs = rs.weight.knots, rs.weight.coeffs
    T = rs.T
    lo = int(np.searchsorted(knots, rs.R_i, side="right")) - 1
    rows = range(max(lo, 0), len(knots) - 1)
    pieces = []
    for k in rows:
        r0, r1 = max(knots[k], rs.R_i), knots[k + 1]
        if r1 <= r0:
            continue
        t0, t1 = rs.h(r0), rs.h(r1)
        if k == rows[-1]:
            t1 = T
        m = max(2, int(round(n_samples * (t1 - t0) / T)) + 1)
        ts = np.linspace(t0, t1, m)
        r = rs.h_inv(ts)
        r[0], r[-1] = r0, r1
        vals = r ** (2 * (rs.N - 1)) * _pp.horner(coeffs[np.full(m, k)], r - knots[k])
        pieces.append(Piece(float(t0), float(t1), "samples", (ts, vals)))
    pieces[0] = Piece(0.0, pieces[0].end, "samples", ([0.0, *pieces[0].data[0][1:]],
                                                      pieces[0].data[1]))
    return RadialReduction(rs, WeightSpec(tuple(pieces), T), rs.h, rs.h_inv)


@dataclass
class RadialProfile:
    r: np.ndarray
    U: np.ndarray
    dU: np.ndarray
    residual: np.ndarray  # nan where the stencil straddles a weight knot
    max_residual: float
    boundary_residual: tuple[float, float]


def radial_lift(v, red: RadialReduction, lam: float, mu: float, g: Nonlinearity,
                n: int = 1000, fd_step: float | None = None) -> RadialProfile:
    """``U(r) = v(h(r))`` on ``n + 1`` radii, with the radial-equation residual.

    ``v`` is a :class:`Trajectory` (or anything with one as ``.trajectory``)
    of the reduced problem, or a constant for the trivial solutions.  The
    residual uses three-point central differences, with step ``fd_step``
    (the grid spacing by default) around each interior grid point; points
    whose stencil straddles a knot of ``W`` are reported as ``nan`` and left
    out of the maximum.  The stencil truncation error is ``O(fd_step^2)``.
    """
    rs = red.spec
    r = np.linspace(rs.R_i, rs.R_e, n + 1)
    dr = r[1] - r[0]
    step = dr if fd_step is None else float(fd_step)
    if not 0 < step <= dr:
        raise ValidationError("fd_step must lie in ]0, grid spacing]")
    traj = getattr(v, "trajectory", v)

    def profile(rr):
        if isinstance(traj, Trajectory):
            U, y = traj.dense(np.clip(rs.h(rr), 0.0, red.T))
            return U, y * rr ** (1 - rs.N)
        return np.full_like(rr, float(traj)), np.zeros_like(rr)

    U, dU = profile(r)
    scaled = ProblemDef(rs.weight, g, lam, mu).scaled
    res = np.full_like(r, np.nan)
    rc = r[1:-1]
    rm, rp = rc - step, rc + step
    Um, Up = (U[:-2], U[2:]) if fd_step is None else (profile(rm)[0], profile(rp)[0])
    d2 = (Up - 2 * U[1:-1] + Um) / step ** 2
    d1 = (Up - Um) / (2 * step)
    inner = np.abs(d2 + (rs.N - 1) / rc * d1 + scaled.eval(rc) * g.eval_ext(U[1:-1]))
    kn = rs.weight.knots
    straddle = np.array([np.any((kn > a) & (kn < b)) for a, b in zip(rm, rp)], dtype=bool)
    inner[straddle] = np.nan
    res[1:-1] = inner
    finite = res[np.isfinite(res)]
    return RadialProfile(r, U, dU, res, float(finite.max()) if finite.size else 0.0,
                         (abs(float(dU[0])), abs(float(dU[-1]))))


# -- periodic extension ------------------------------------------------------------


@dataclass
class PeriodicExtension:
    t: np.ndarray
    u: np.ndarray
    du: np.ndarray
    T: float
    period: float
    n_periods: int

    def to_dict(self) -> dict:
        return {"T": self.T, "period": self.period, "n_periods": self.n_periods,
                "t": self.t.tolist(), "u": self.u.tolist(), "du": self.du.tolist()}


def even_periodic_time(t, T: float):
    """Fold ``t`` onto ``[0, T]`` by even reflection and ``2T``-periodicity; returns (s, sign)."""
    t = np.asarray(t, dtype=float)
    m = np.mod(t + T, 2 * T) - T  # in [-T, T)
    return np.abs(m), np.where(m < 0, -1.0, 1.0)


def periodic_extend(v, n_periods: int = 1, samples_per_T: int = 1000) -> PeriodicExtension:
    """Even reflection about 0 and ``2T``-periodic repetition, sampled on ``[-T, (2n-1)T]``.

    Samples are taken on one base period and tiled, so ``u(t + 2T) = u(t)``
    holds exactly on the grid; the reflection makes ``u(-t) = u(t)`` exact too.
    """
    if n_periods < 1:
        raise ValidationError("n_periods must be >= 1")
    traj = getattr(v, "trajectory", v)
    ts = np.sort(np.asarray([traj.times[0], traj.times[-1]]))
    T = float(ts[1])
    if abs(ts[0]) > 1e-12:
        raise ValidationError("solution must be defined on [0, T]")
    s = np.linspace(0.0, T, samples_per_T + 1)
    x, y = traj.dense(s)
    # one period [-T, T): mirrored half then the original half
    base_u = np.concatenate([x[::-1], x[1:-1]])
    base_du = np.concatenate([-y[::-1], y[1:-1]])
    base_t = np.concatenate([-s[::-1], s[1:-1]])
    k = np.arange(n_periods)
    t = (base_t[None, :] + 2 * T * k[:, None]).ravel()
    u = np.tile(base_u, n_periods)
    du = np.tile(base_du, n_periods)
    t = np.append(t, (2 * n_periods - 1) * T)
    u = np.append(u, x[-1])
    du = np.append(du, y[-1])
    return PeriodicExtension(t, u, du, T, 2 * T, n_periods)


def even_periodic_weight(w: WeightSpec) -> WeightSpec:
    """Weight on ``[0, 2T]`` equal to ``a(t)`` then ``a(2T - t)``: one period of the even extension."""
    T = w.horizon
    mirrored = []
    for p in reversed(w.pieces):
        if p.kind == "constant":
            mirrored.append(Piece(2 * T - p.end, 2 * T - p.start, "constant", p.data))
        elif p.kind == "samples":
            ts, vs = p.data
            mirrored.append(Piece(2 * T - p.end, 2 * T - p.start, "samples",
                                  ([2 * T - v for v in ts[::-1]], list(vs[::-1]))))
        else:
            c = np.polynomial.Polynomial(p.data)
            # q(s) = c(L - s), expanded in s = t - (2T - end)
            L = p.end - p.start
            q = c(np.polynomial.Polynomial([L, -1.0]))
            mirrored.append(Piece(2 * T - p.end, 2 * T - p.start, "poly", tuple(q.coef)))
    return WeightSpec(tuple(w.pieces) + tuple(mirrored), 2 * T)


def periodic_residual(ext: PeriodicExtension, p: ProblemDef, v, n: int = 20000) -> float:
    """Max ODE residual of the even periodic extension over one full period ``[-T, T]``.

    Derivatives come from the solution's dense output at the folded time; the
    weight is evaluated as the even ``2T``-periodic extension of ``a``.
    """
    traj = getattr(v, "trajectory", v)
    T = ext.T
    t = np.linspace(-T, T, n + 1)
    s, sgn = even_periodic_time(t, T)
    x, y, xd, yd = traj.dense(s, derivative=True)
    # chain rule through the reflection: u~'(t) = sgn u'(s), u~''(t) = u''(s)
    up, upp = sgn * xd, yd
    a = p.a(s)
    r1 = np.abs(up - sgn * y)
    r2 = np.abs(upp + a * p.g.eval_ext(x))
    return float(np.maximum(r1, r2).max())
