"""Nonlinearities ``g`` on ``[0, 1]`` with zero extension to the real line."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.interpolate import PchipInterpolator

from . import _pp
from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class ConditionReport:
    """Empirical check of the standing hypotheses on ``g``.

    ``g0_estimates`` maps each ``delta`` to ``max_{0 < s <= delta} g(s)/s``.
    The ``(g0)`` flag is a trend, not a proof: it passes when the estimates
    never grow as ``delta`` shrinks and fall by at least half overall.
    """

    positivity_margin: float
    positive: bool
    g0_estimates: dict[float, float]
    g0_decreasing: bool
    g0_pass: bool
    lipschitz_estimate: float
    endpoints_zero: bool

    @property
    def ok(self) -> bool:
        return self.positive and self.g0_pass and self.endpoints_zero

    def to_dict(self) -> dict:
        return {
            "positivity_margin": self.positivity_margin,
            "positive": self.positive,
            "g0_estimates": {repr(k): v for k, v in self.g0_estimates.items()},
            "g0_decreasing": self.g0_decreasing,
            "g0_pass": self.g0_pass,
            "lipschitz_estimate": self.lipschitz_estimate,
            "endpoints_zero": self.endpoints_zero,
        }


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """``g: [0, 1] -> [0, inf)`` stored as a piecewise polynomial.

    Use :meth:`logistic2`, :meth:`logistic`, :meth:`from_samples` or
    :meth:`from_polynomial` rather than the raw constructor.
    """

    name: str
    knots: np.ndarray
    coeffs: np.ndarray
    lipschitz: float | None = None
    kind: str = "poly"
    source: dict | None = None

    def __post_init__(self):
        knots = np.ascontiguousarray(self.knots, dtype=float)
        coeffs = np.ascontiguousarray(np.atleast_2d(self.coeffs), dtype=float)
        if knots[0] != 0.0 or knots[-1] != 1.0 or np.any(np.diff(knots) <= 0):
            raise ValidationError("nonlinearity knots must increase from 0 to 1")
        if coeffs.shape[0] != len(knots) - 1:
            raise ValidationError("one coefficient row per piece required")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "coeffs", coeffs)
        ends = self.eval_core(np.array([0.0, 1.0]), _clip_ends=False)
        if np.any(np.abs(ends) > 1e-12):
            raise ValidationError(f"g(0) and g(1) must vanish, got {ends.tolist()}")
        grid = np.linspace(0.0, 1.0, 2001)[1:-1]
        if np.any(self.eval_core(grid) <= 0.0):
            raise ValidationError("g must be positive on ]0, 1[")

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_polynomial(cls, coeffs: Sequence[float], name: str = "poly",
                        lipschitz: float | None = None) -> "Nonlinearity":
        """Polynomial ``g(s) = sum coeffs[k] s^k`` on ``[0, 1]``."""
        return cls(name, np.array([0.0, 1.0]), np.array([coeffs], dtype=float), lipschitz,
                   kind="poly", source={"coeffs": list(map(float, coeffs))})

    @classmethod
    def logistic2(cls) -> "Nonlinearity":
        """``g(s) = s^2 (1 - s)``."""
        g = cls.from_polynomial([0.0, 0.0, 1.0, -1.0], name="logistic2")
        object.__setattr__(g, "kind", "logistic2")
        object.__setattr__(g, "source", None)
        return g

    @classmethod
    def logistic(cls) -> "Nonlinearity":
        """``g(s) = s (1 - s)``; violates ``g(s)/s -> 0``."""
        g = cls.from_polynomial([0.0, 1.0, -1.0], name="logistic")
        object.__setattr__(g, "kind", "logistic")
        object.__setattr__(g, "source", None)
        return g

    @classmethod
    def from_samples(cls, s: Sequence[float], values: Sequence[float], name: str = "samples",
                     lipschitz: float | None = None) -> "Nonlinearity":
        """Monotone cubic (PCHIP) interpolant of sampled values on ``[0, 1]``."""
        s = np.asarray(s, dtype=float)
        v = np.asarray(values, dtype=float)
        if s[0] != 0.0 or s[-1] != 1.0:
            raise ValidationError("samples must start at s=0 and end at s=1")
        if v[0] != 0.0 or v[-1] != 0.0:
            raise ValidationError("sampled g must vanish at s=0 and s=1")
        interp = PchipInterpolator(s, v)
        coeffs = interp.c[::-1].T.copy()  # ascending powers per piece
        return cls(name, s.copy(), coeffs, lipschitz, kind="samples",
                   source={"s": s.tolist(), "values": v.tolist()})

    @classmethod
    def from_dict(cls, d: dict) -> "Nonlinearity":
        kind = d["kind"]
        lip = d.get("lipschitz")
        if kind == "logistic2":
            g = cls.logistic2()
        elif kind == "logistic":
            g = cls.logistic()
        elif kind == "samples":
            data = d["data"]
            if isinstance(data, dict):
                s, v = data["s"], data["values"]
            else:
                arr = np.asarray(data, dtype=float)
                s, v = arr[:, 0], arr[:, 1]
            g = cls.from_samples(s, v, lipschitz=lip)
        elif kind == "poly":
            g = cls.from_polynomial(d["data"], lipschitz=lip)
        else:
            raise ValidationError(f"unknown nonlinearity kind {kind!r}")
        if lip is not None:
            object.__setattr__(g, "lipschitz", float(lip))
        return g

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "samples":
            d["data"] = {"s": self.source["s"], "values": self.source["values"]}
        elif self.kind == "poly":
            d["data"] = self.source["coeffs"]
        if self.lipschitz is not None:
            d["lipschitz"] = self.lipschitz
        return d

    # -- evaluation ---------------------------------------------------------

    def eval_core(self, s, _clip_ends: bool = True):
        """``g`` on ``[0, 1]``; raises for arguments outside."""
        sa = np.asarray(s, dtype=float)
        if np.any((sa < 0.0) | (sa > 1.0)):
            raise DomainError("eval_core needs s in [0, 1]")
        idx = _pp.locate(self.knots, sa)
        out = _pp.horner(self.coeffs[idx], sa - self.knots[idx])
        if _clip_ends:
            out = np.where((sa <= 0.0) | (sa >= 1.0), 0.0, out)
        return float(out) if out.ndim == 0 else out

    def eval_ext(self, s):
        """Zero extension of ``g`` to the real line."""
        sa = np.asarray(s, dtype=float)
        inside = (sa > 0.0) & (sa < 1.0)
        sc = np.where(inside, sa, 0.5)
        idx = _pp.locate(self.knots, sc)
        out = np.where(inside, _pp.horner(self.coeffs[idx], sc - self.knots[idx]), 0.0)
        return float(out) if out.ndim == 0 else out

    __call__ = eval_ext

    def derivative(self, s):
        """``g'`` on ``]0, 1[`` (right derivative at interior knots)."""
        sa = np.asarray(s, dtype=float)
        idx = _pp.locate(self.knots, sa)
        dc = np.zeros_like(self.coeffs)
        k = self.coeffs.shape[1]
        dc[:, : k - 1] = self.coeffs[:, 1:] * np.arange(1, k)
        out = _pp.horner(dc[idx], sa - self.knots[idx])
        return float(out) if out.ndim == 0 else out

    # -- extremal values ------------------------------------------------------

    def _extrema(self, k1: float, k2: float) -> tuple[float, float]:
        lo_all, hi_all = np.inf, -np.inf
        for i in range(len(self.knots) - 1):
            a = max(k1, self.knots[i])
            b = min(k2, self.knots[i + 1])
            if b < a:
                continue
            lo, hi = _pp.extrema(self.coeffs[i], a - self.knots[i], b - self.knots[i])
            lo_all, hi_all = min(lo_all, lo), max(hi_all, hi)
        # exact zeros at the endpoints of [0, 1]
        if k1 <= 0.0 or k2 >= 1.0:
            lo_all = min(lo_all, 0.0)
        return max(lo_all, 0.0), hi_all

    def g_min(self, k1: float, k2: float) -> float:
        """``g*(k1, k2) = min_{[k1, k2]} g``, exact via critical points."""
        if not (0.0 <= k1 < k2 <= 1.0):
            raise DomainError(f"need 0 <= k1 < k2 <= 1, got [{k1}, {k2}]")
        return self._extrema(k1, k2)[0]

    def g_max(self, k1: float = 0.0, k2: float = 1.0) -> float:
        if not (0.0 <= k1 < k2 <= 1.0):
            raise DomainError(f"need 0 <= k1 < k2 <= 1, got [{k1}, {k2}]")
        return self._extrema(k1, k2)[1]

    @cached_property
    def lipschitz_bound(self) -> float:
        """Supplied bound, else ``max |g'|`` over ``[0, 1]`` from the polynomial pieces."""
        if self.lipschitz is not None:
            return float(self.lipschitz)
        best = 0.0
        for i in range(len(self.knots) - 1):
            dc = P.polyder(self.coeffs[i]) if self.coeffs.shape[1] > 1 else np.zeros(1)
            lo, hi = _pp.extrema(dc, 0.0, self.knots[i + 1] - self.knots[i])
            best = max(best, abs(lo), abs(hi))
        return best

    def delta_for(self, eps: float, cap: float = 1.0, n: int = 20000) -> float:
        """Largest ``delta <= cap`` with ``g(s) <= eps * s`` on ``[0, delta]``.

        Located on a log-spaced grid and refined by bisection; for sampled
        profiles this is a heuristic estimate.
        """
        if eps <= 0:
            raise DomainError("eps must be positive")
        s = np.geomspace(1e-12, cap, n)
        bad = self.eval_ext(s) > eps * s
        if not np.any(bad):
            return float(cap)
        j = int(np.argmax(bad))
        if j == 0:
            return 0.0
        lo, hi = s[j - 1], s[j]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.eval_ext(mid) > eps * mid:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-15 * hi:
                break
        return float(lo)

    def check_conditions(self, grid_n: int = 1000) -> ConditionReport:
        """Positivity margin, ``(g0)`` trend and a slope-based Lipschitz estimate."""
        if grid_n < 100:
            raise DomainError("grid_n must be at least 100")
        s = np.linspace(0.0, 1.0, grid_n + 1)
        vals = self.eval_core(s)
        margin = float(vals[1:-1].min())
        deltas = [10.0 ** (-k) for k in range(1, 7)]
        est = {}
        for d in deltas:
            ss = np.linspace(d / grid_n, d, grid_n)
            est[d] = float(np.max(self.eval_ext(ss) / ss))
        seq = [est[d] for d in deltas]
        decreasing = bool(np.all(np.diff(seq) <= 0.0))
        g0_pass = decreasing and seq[-1] <= 0.5 * seq[0]
        slopes = np.abs(np.diff(vals) / np.diff(s))
        raw_ends = self.eval_core(np.array([0.0, 1.0]), _clip_ends=False)
        ends_ok = bool(np.all(np.abs(raw_ends) <= 1e-12))
        return ConditionReport(
            positivity_margin=margin,
            positive=margin > 0.0,
            g0_estimates=est,
            g0_decreasing=decreasing,
            g0_pass=g0_pass,
            lipschitz_estimate=float(slopes.max()),
            endpoints_zero=ends_ok,
        )
