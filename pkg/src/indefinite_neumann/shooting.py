"""Phase-plane continua at ``t = tau`` and their intersections.

The forward continuum is the image of ``[0, 1] x {0}`` under ``Phi_0^tau``,
the backward continuum its image under ``Phi_T^tau``.  Every point where the
two polylines cross seeds a scalar root search on ``h(xi) = y(T; 0, xi, 0)``;
converged roots are re-integrated and certified as positive solutions.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import NeumannError, RefinementError, ValidationError
from .integrator import (PlanarState, ProblemDef, Tolerance, Trajectory, integrate,
                         ode_residual, poincare, shoot)

log = logging.getLogger(__name__)

Direction = Literal["forward", "backward"]


@dataclass(frozen=True)
class ShootingOptions:
    gap_max: float = 0.05
    xi_budget: int = 200_000
    n_init: int = 257
    # distances are Euclidean inside [-R, R]^2 and grow logarithmically outside
    compact_radius: float = 10.0
    min_dxi: float = 1e-14
    dedup_radius: float = 1e-4
    boundary_tol: float = 1e-8
    trivial_tol: float = 1e-9
    range_grid: int = 10_000
    neighborhood: int = 3
    tol: Tolerance = field(default_factory=Tolerance)
    refine_tol: Tolerance = field(default_factory=lambda: Tolerance(rtol=1e-13, atol=1e-20))
    solution_tol: Tolerance = field(
        default_factory=lambda: Tolerance(rtol=1e-13, atol=1e-20, h_max=5e-4))

    def __post_init__(self):
        if self.gap_max <= 0 or self.xi_budget < 3 or self.n_init < 2:
            raise ValidationError("gap_max must be positive and budgets at least minimal")


@dataclass(frozen=True, eq=False)
class Continuum:
    """Images at ``tau`` of ``(xi, 0)`` launched from ``t = 0`` or ``t = T``."""

    direction: Direction
    xi: np.ndarray
    x: np.ndarray
    y: np.ndarray
    gap_achieved: float
    conforming: bool
    gap_max: float

    def __len__(self) -> int:
        return len(self.xi)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def to_rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.xi.tolist(), self.x.tolist(), self.y.tolist()))


@dataclass(frozen=True)
class IntersectionPoint:
    xi_forward: float
    xi_backward: float
    P: PlanarState
    residual: float
    segment_forward: int = -1
    segment_backward: int = -1

    def to_dict(self) -> dict:
        return {"xi_forward": self.xi_forward, "xi_backward": self.xi_backward,
                "x": self.P.x, "y": self.P.y, "residual": self.residual}


@dataclass(frozen=True, eq=False)
class Solution:
    xi: float
    trajectory: Trajectory
    residual_y0: float
    residual_yT: float
    x_min: float
    x_max: float
    ode_residual: float
    source: IntersectionPoint | None = None

    @property
    def xi_forward(self) -> float:
        return self.xi

    @property
    def P(self) -> PlanarState:
        """State at ``tau`` (the intersection point it represents)."""
        x, y = self.trajectory.dense(self._tau)
        return PlanarState(float(x), float(y))

    _tau: float = 0.0

    def summary(self) -> dict:
        P = self.P
        return {
            "xi": self.xi, "u0": self.xi, "uT": float(self.trajectory.x[-1]),
            "P_x": P.x, "P_y": P.y,
            "residual_y0": self.residual_y0, "residual_yT": self.residual_yT,
            "u_min": self.x_min, "u_max": self.x_max, "ode_residual": self.ode_residual,
        }


# -- continua ----------------------------------------------------------------


def compact(v: np.ndarray, R: float) -> np.ndarray:
    """Identity on ``[-R, R]``, logarithmic growth outside (C^1 at ``|v| = R``)."""
    a = np.abs(v)
    return np.where(a <= R, v, np.sign(v) * (R + np.log1p(np.maximum(a - R, 0.0))))


def _gaps(x: np.ndarray, y: np.ndarray, R: float) -> np.ndarray:
    cx, cy = compact(x, R), compact(y, R)
    return np.hypot(np.diff(cx), np.diff(cy))


def build_continuum(p: ProblemDef, direction: Direction, gap_max: float | None = None,
                    xi_budget: int | None = None, opts: ShootingOptions | None = None
                    ) -> Continuum:
    """Adaptive polyline of ``Phi(xi, 0)`` at ``tau`` for ``xi`` in ``[0, 1]``.

    Adjacent images further apart than ``gap_max`` get their midpoint in ``xi``
    inserted, level by level, until the contract holds or the budget runs
    out.  Gaps whose ``xi`` interval is already below ``min_dxi`` cannot be
    refined and make the continuum non-conforming.
    """
    opts = opts or ShootingOptions()
    gap_max = opts.gap_max if gap_max is None else gap_max
    budget = opts.xi_budget if xi_budget is None else xi_budget
    if gap_max <= 0:
        raise ValidationError("gap_max must be positive")
    if direction not in ("forward", "backward"):
        raise ValidationError(f"unknown direction {direction!r}")
    t0 = 0.0 if direction == "forward" else p.T
    tau = p.tau
    R = opts.compact_radius

    xi = np.linspace(0.0, 1.0, min(opts.n_init, budget))
    x, y = shoot(p, t0, tau, xi, tol=opts.tol)
    while True:
        gaps = _gaps(x, y, R)
        bad = np.flatnonzero((gaps > gap_max) & (np.diff(xi) > opts.min_dxi))
        room = budget - len(xi)
        if bad.size == 0 or room <= 0:
            break
        bad = bad[:room]
        mids = 0.5 * (xi[bad] + xi[bad + 1])
        mx, my = shoot(p, t0, tau, mids, tol=opts.tol)
        order = np.argsort(np.concatenate([xi, mids]), kind="stable")
        xi = np.concatenate([xi, mids])[order]
        x = np.concatenate([x, mx])[order]
        y = np.concatenate([y, my])[order]
    # the endpoints are equilibria; pin them exactly
    x[0], y[0], x[-1], y[-1] = 0.0, 0.0, 1.0, 0.0
    gaps = _gaps(x, y, R)
    achieved = float(gaps.max()) if gaps.size else 0.0
    conforming = achieved <= gap_max
    if not conforming:
        log.info("%s continuum non-conforming: gap %.3g after %d nodes",
                 direction, achieved, len(xi))
    return Continuum(direction, xi, x, y, achieved, conforming, gap_max)


# -- intersection ------------------------------------------------------------


def _same(a: IntersectionPoint, b: IntersectionPoint, radius: float) -> bool:
    return (abs(a.xi_forward - b.xi_forward) < radius
            and abs(a.xi_backward - b.xi_backward) < radius)


def _segment_hits(P: np.ndarray, Q: np.ndarray, chunk: int = 2048):
    """All ``(i, j, s, u)`` with segment ``P_i P_{i+1}`` crossing ``Q_j Q_{j+1}``.

    ``s`` and ``u`` are the crossing parameters along each segment.  Parallel
    (including collinear) pairs are skipped.
    """
    a0, a1 = P[:-1], P[1:]
    b0, b1 = Q[:-1], Q[1:]
    da = a1 - a0
    db = b1 - b0
    bmin = np.minimum(b0, b1)
    bmax = np.maximum(b0, b1)
    amin = np.minimum(a0, a1)
    amax = np.maximum(a0, a1)
    # forward segments that can meet the backward polyline at all
    lo, hi = bmin.min(axis=0), bmax.max(axis=0)
    cand = np.flatnonzero(np.all(amax >= lo, axis=1) & np.all(amin <= hi, axis=1))
    hits = []
    for k in range(0, cand.size, chunk):
        I = cand[k:k + chunk]
        ov = ((amax[I, None, 0] >= bmin[None, :, 0]) & (amin[I, None, 0] <= bmax[None, :, 0])
              & (amax[I, None, 1] >= bmin[None, :, 1]) & (amin[I, None, 1] <= bmax[None, :, 1]))
        ii, jj = np.nonzero(ov)
        if ii.size == 0:
            continue
        i = I[ii]
        den = da[i, 0] * db[jj, 1] - da[i, 1] * db[jj, 0]
        w = b0[jj] - a0[i]
        scale = np.hypot(*da[i].T) * np.hypot(*db[jj].T)
        ok = np.abs(den) > 1e-14 * scale
        den_safe = np.where(ok, den, 1.0)
        s = (w[:, 0] * db[jj, 1] - w[:, 1] * db[jj, 0]) / den_safe
        u = (w[:, 0] * da[i, 1] - w[:, 1] * da[i, 0]) / den_safe
        m = ok & (s >= 0.0) & (s <= 1.0) & (u >= 0.0) & (u <= 1.0)
        hits.extend(zip(i[m].tolist(), jj[m].tolist(), s[m].tolist(), u[m].tolist()))
    hits.sort()
    return hits


def intersect(c1: Continuum, c2: Continuum, dedup_radius: float = 1e-4,
              p: ProblemDef | None = None, opts: ShootingOptions | None = None
              ) -> list[IntersectionPoint]:
    """Transversal crossings of a forward and a backward continuum.

    Crossings at the shared equilibria ``(0, 0)`` and ``(1, 0)`` are dropped.
    With a problem attached each crossing is polished to a root of ``h`` and
    the residual is the phase-plane distance between the two shot images;
    otherwise the linear-interpolation estimate is returned as is.
    """
    if c1.direction != "forward" or c2.direction != "backward":
        raise ValidationError("intersect needs a forward and a backward continuum, in that order")
    if not (c1.conforming and c2.conforming):
        log.info("intersecting non-conforming continua")
    opts = opts or ShootingOptions()
    out: list[IntersectionPoint] = []
    for i, j, s, u in _segment_hits(c1.points, c2.points):
        xf = c1.xi[i] + s * (c1.xi[i + 1] - c1.xi[i])
        xb = c2.xi[j] + u * (c2.xi[j + 1] - c2.xi[j])
        Px = c1.x[i] + s * (c1.x[i + 1] - c1.x[i])
        Py = c1.y[i] + s * (c1.y[i + 1] - c1.y[i])
        at_end = (xf <= 0.0 and xb <= 0.0) or (xf >= 1.0 and xb >= 1.0)
        if at_end or not (-1e-12 <= Px <= 1.0 + 1e-12):
            continue
        ip = IntersectionPoint(float(xf), float(xb), PlanarState(float(Px), float(Py)), 0.0, i, j)
        if p is None and any(_same(ip, q, dedup_radius) for q in out):
            continue
        if p is not None:
            try:
                ip = polish(p, c1, ip, opts)
            except RefinementError as exc:
                log.debug("crossing at xi_f=%.6g dropped: %s", xf, exc.kind)
                continue
            if any(_same(ip, q, dedup_radius) for q in out):
                continue
        out.append(ip)
    out.sort(key=lambda q: q.xi_forward)
    return out


# -- scalar map and refinement ----------------------------------------------


def h_map(p: ProblemDef, xi, tol: Tolerance | None = None) -> np.ndarray:
    """``h(xi) = y(T; 0, xi, 0)``; its zeros are the Neumann solutions."""
    _, y = shoot(p, 0.0, p.T, xi, tol=tol)
    return y


def _bracket(p: ProblemDef, c: Continuum, seg: int, opts: ShootingOptions,
             xi_hint: float | None = None, n_sub: int = 64):
    """Sign-change bracket of ``h`` around forward segment ``seg``.

    Tries the segment and growing node neighborhoods first; when their ends
    share a sign (two nearby roots, or a fold), the neighborhood is sampled
    on ``n_sub`` points and the sign change closest to ``xi_hint`` is used.
    """
    n = len(c.xi)
    hint = 0.5 * (c.xi[seg] + c.xi[seg + 1]) if xi_hint is None else xi_hint
    for k in range(opts.neighborhood + 1):
        lo_i, hi_i = max(seg - k, 0), min(seg + 1 + k, n - 1)
        a, b = float(c.xi[lo_i]), float(c.xi[hi_i])
        ha, hb = h_map(p, [a, b], opts.refine_tol)
        if ha == 0.0:
            return a, a, ha, ha
        if hb == 0.0:
            return b, b, hb, hb
        if np.sign(ha) != np.sign(hb):
            return a, b, ha, hb
        grid = np.linspace(a, b, n_sub + 1)
        hg = h_map(p, grid, opts.refine_tol)
        idx = np.flatnonzero(np.sign(hg[:-1]) != np.sign(hg[1:]))
        if idx.size:
            j = idx[np.argmin(np.abs(0.5 * (grid[idx] + grid[idx + 1]) - hint))]
            return float(grid[j]), float(grid[j + 1]), float(hg[j]), float(hg[j + 1])
    raise RefinementError("bracket-lost", f"no sign change of h near segment {seg}")


def _root(p: ProblemDef, a: float, b: float, ha: float, hb: float, tol: Tolerance) -> float:
    if a == b:
        return a
    f = lambda v: float(h_map(p, [v], tol)[0])  # noqa: E731
    return float(brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))


def polish(p: ProblemDef, c: Continuum, seed: IntersectionPoint, opts: ShootingOptions
           ) -> IntersectionPoint:
    """Converge a crossing to a root of ``h`` and recompute both shot images."""
    if not (math.isfinite(seed.P.x) and math.isfinite(seed.P.y) and math.isfinite(seed.residual)):
        raise RefinementError("bracket-lost", "seed is not finite")
    seg = seed.segment_forward
    if seg < 0:
        seg = int(np.clip(np.searchsorted(c.xi, seed.xi_forward) - 1, 0, len(c.xi) - 2))
    a, b, ha, hb = _bracket(p, c, seg, opts, seed.xi_forward)
    xi = _root(p, a, b, ha, hb, opts.refine_tol)
    _classify_trivial_seed(xi, opts)
    Pf = poincare(p, 0.0, p.tau, (xi, 0.0), opts.refine_tol)
    end = poincare(p, 0.0, p.T, (xi, 0.0), opts.refine_tol)
    xb = end.x
    Pb = poincare(p, p.T, p.tau, (xb, 0.0), opts.refine_tol)
    return IntersectionPoint(xi, float(xb), Pf, Pf.distance(Pb), seg, seed.segment_backward)


def _classify_trivial_seed(xi: float, opts: ShootingOptions) -> None:
    if xi <= opts.trivial_tol:
        raise RefinementError("trivial-zero", "root at xi = 0 (u == 0)")
    if xi >= 1.0 - opts.trivial_tol:
        raise RefinementError("trivial-one", "root at xi = 1 (u == 1)")


def certify_solution(p: ProblemDef, xi: float, opts: ShootingOptions | None = None,
                     source: IntersectionPoint | None = None) -> Solution:
    """Re-integrate ``(xi, 0)`` over ``[0, T]`` and check residuals and range."""
    opts = opts or ShootingOptions()
    _classify_trivial_seed(xi, opts)
    traj = integrate(p, 0.0, p.T, (xi, 0.0), opts.solution_tol)
    lo, hi = traj.x_range(opts.range_grid)
    if max(abs(lo), abs(hi)) <= opts.trivial_tol:
        raise RefinementError("trivial-zero", "solution is identically zero")
    if max(abs(lo - 1.0), abs(hi - 1.0)) <= opts.trivial_tol:
        raise RefinementError("trivial-one", "solution is identically one")
    if not (lo > 0.0 and hi < 1.0):
        raise RefinementError("escaping", f"x leaves ]0, 1[: range [{lo:.6g}, {hi:.6g}]")
    ry0 = abs(float(traj.y[0]))
    ryT = abs(float(traj.y[-1]))
    if max(ry0, ryT) > opts.boundary_tol:
        raise RefinementError("bracket-lost",
                              f"boundary residual {max(ry0, ryT):.3g} above tolerance")
    mids = (np.arange(100) + 0.5) * (p.T / 100)
    res = float(np.max(ode_residual(p, traj, mids)))
    return Solution(float(xi), traj, ry0, ryT, lo, hi, res, source, p.tau)


def refine(p: ProblemDef, seed: IntersectionPoint, tol: ShootingOptions | None = None,
           continuum: Continuum | None = None) -> Solution:
    """Turn an intersection seed into a certified :class:`Solution`.

    Raises :class:`RefinementError` with kind ``trivial-zero``, ``trivial-one``,
    ``escaping`` or ``bracket-lost``.
    """
    opts = tol or ShootingOptions()
    if not (math.isfinite(seed.residual) and math.isfinite(seed.xi_forward)):
        raise RefinementError("bracket-lost", "seed is not finite")
    _classify_trivial_seed(seed.xi_forward, opts)
    if continuum is None:
        # a local three-node continuum around the seed is enough to bracket
        w = 1e-3
        xi = np.clip(seed.xi_forward + w * np.array([-1.0, 0.0, 1.0]), 0.0, 1.0)
        x, y = shoot(p, 0.0, p.tau, xi, tol=opts.tol)
        continuum = Continuum("forward", xi, x, y, np.inf, False, opts.gap_max)
        seed = IntersectionPoint(seed.xi_forward, seed.xi_backward, seed.P, seed.residual, 0, -1)
    polished = polish(p, continuum, seed, opts)
    return certify_solution(p, polished.xi_forward, opts, polished)


@dataclass(frozen=True, eq=False)
class SolveResult:
    problem: ProblemDef
    forward: Continuum
    backward: Continuum
    intersections: list[IntersectionPoint]
    solutions: list[Solution]
    rejected: list[tuple[IntersectionPoint, str]]

    @property
    def count(self) -> int:
        return len(self.solutions)


def solve(p: ProblemDef, opts: ShootingOptions | None = None) -> SolveResult:
    """Full pipeline: build both continua, intersect, refine, deduplicate."""
    opts = opts or ShootingOptions()
    fwd = build_continuum(p, "forward", opts=opts)
    bwd = build_continuum(p, "backward", opts=opts)
    points = intersect(fwd, bwd, opts.dedup_radius, p, opts)
    sols: list[Solution] = []
    rejected: list[tuple[IntersectionPoint, str]] = []
    for ip in points:
        try:
            s = certify_solution(p, ip.xi_forward, opts, ip)
        except RefinementError as exc:
            rejected.append((ip, exc.kind))
            continue
        if any(_same(ip, q.source, opts.dedup_radius) for q in sols):
            continue
        sols.append(s)
    sols.sort(key=lambda s: s.xi)
    log.info("lambda=%g mu=%g: %d crossings, %d solutions", p.lam, p.mu, len(points), len(sols))
    return SolveResult(p, fwd, bwd, points, sols, rejected)


def find_solutions(p: ProblemDef, opts: ShootingOptions | None = None) -> list[Solution]:
    """Nontrivial positive solutions sorted by initial value ``u(0)``."""
    return solve(p, opts).solutions


# -- sweeps and the brute-force oracle ----------------------------------------


@dataclass(frozen=True, eq=False)
class SweepResult:
    lambdas: np.ndarray
    mus: np.ndarray
    counts: np.ndarray  # -1 marks a failed cell
    errors: dict[tuple[int, int], str]

    def rows(self):
        for i, lam in enumerate(self.lambdas):
            for j, mu in enumerate(self.mus):
                yield float(lam), float(mu), int(self.counts[i, j])


def sweep(p_template: ProblemDef, lambda_grid: Sequence[float], mu_grid: Sequence[float],
          opts: ShootingOptions | None = None, jobs: int = 1) -> SweepResult:
    """Solution count for every ``(lambda, mu)`` cell; failures do not abort the sweep."""
    lambdas = np.asarray(lambda_grid, dtype=float)
    mus = np.asarray(mu_grid, dtype=float)
    if lambdas.size == 0 or mus.size == 0:
        raise ValidationError("sweep grids must be nonempty")
    cells = [(i, j) for i in range(lambdas.size) for j in range(mus.size)]

    def run(cell):
        i, j = cell
        try:
            return len(find_solutions(p_template.with_params(lambdas[i], mus[j]), opts)), None
        except (NeumannError, ValueError, ArithmeticError) as exc:
            return -1, f"{type(exc).__name__}: {exc}"

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]
    counts = np.empty((lambdas.size, mus.size), dtype=int)
    errors = {}
    for (i, j), (n, err) in zip(cells, results):
        counts[i, j] = n
        if err:
            errors[(i, j)] = err
    return SweepResult(lambdas, mus, counts, errors)


def scan_h(p: ProblemDef, n: int = 10_000, tol: Tolerance | None = None
           ) -> tuple[np.ndarray, np.ndarray]:
    """``h`` on a uniform grid of ``n`` interior points of ``]0, 1[``."""
    xi = np.linspace(0.0, 1.0, n + 2)[1:-1]
    return xi, h_map(p, xi, tol)


def scan_roots(p: ProblemDef, n: int = 10_000, opts: ShootingOptions | None = None,
               positive_only: bool = True) -> list[float]:
    """Roots of ``h`` bracketed by sign changes on an ``n``-point scan.

    With ``positive_only`` roots whose solution leaves ``]0, 1[`` are dropped.
    """
    opts = opts or ShootingOptions()
    xi, h = scan_h(p, n, opts.refine_tol)
    roots = []
    for k in np.flatnonzero(np.sign(h[:-1]) * np.sign(h[1:]) <= 0):
        a, b = float(xi[k]), float(xi[k + 1])
        if h[k] == 0.0 and k > 0 and np.sign(h[k - 1]) * np.sign(h[k + 1]) > 0:
            continue  # touching zero, not a crossing
        r = _root(p, a, b, h[k], h[k + 1], opts.refine_tol)
        if roots and abs(r - roots[-1]) < 1e-12:
            continue
        if positive_only:
            try:
                certify_solution(p, r, opts)
            except RefinementError:
                continue
        roots.append(r)
    return roots
