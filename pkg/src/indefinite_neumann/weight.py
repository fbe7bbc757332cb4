"""Piecewise sign-changing weights ``a(t)`` and their ``(lambda, mu)`` scaling."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from . import _pp
from .errors import DomainError, SignStructureError, UnsupportedStructureError, ValidationError

KINDS = ("constant", "poly", "samples")


@dataclass(frozen=True)
class Piece:
    """One piece of a weight on ``[start, end]``.

    ``data`` depends on ``kind``:

    * ``"constant"``: a float.
    * ``"poly"``: ascending coefficients in the local variable ``t - start``.
    * ``"samples"``: a pair ``(times, values)`` interpolated linearly; the
      sample times must start at ``start`` and end at ``end``.
    """

    start: float
    end: float
    kind: str
    data: Any

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown piece kind {self.kind!r}")
        if not (np.isfinite(self.start) and np.isfinite(self.end)) or self.end <= self.start:
            raise ValidationError(f"piece interval [{self.start}, {self.end}] is empty or invalid")
        if self.kind == "constant":
            object.__setattr__(self, "data", float(self.data))
        elif self.kind == "poly":
            coeffs = tuple(float(c) for c in np.atleast_1d(self.data))
            if not coeffs:
                raise ValidationError("poly piece needs at least one coefficient")
            object.__setattr__(self, "data", coeffs)
        else:
            ts, vs = self.data
            ts = tuple(float(v) for v in ts)
            vs = tuple(float(v) for v in vs)
            if len(ts) != len(vs) or len(ts) < 2:
                raise ValidationError("samples piece needs matching times/values, at least two")
            if np.any(np.diff(ts) <= 0):
                raise ValidationError("sample times must be strictly increasing")
            if not (np.isclose(ts[0], self.start, rtol=0, atol=1e-12)
                    and np.isclose(ts[-1], self.end, rtol=0, atol=1e-12)):
                raise ValidationError("sample times must span the piece exactly")
            object.__setattr__(self, "data", (ts, vs))

    def rows(self) -> tuple[np.ndarray, list[np.ndarray]]:
        """Knots and local ascending coefficient rows of this piece."""
        if self.kind == "constant":
            return np.array([self.start, self.end]), [np.array([self.data])]
        if self.kind == "poly":
            return np.array([self.start, self.end]), [np.array(self.data)]
        ts, vs = (np.asarray(v) for v in self.data)
        ts = ts.copy()
        ts[0], ts[-1] = self.start, self.end
        slopes = np.diff(vs) / np.diff(ts)
        return ts, [np.array([v, s]) for v, s in zip(vs[:-1], slopes)]

    def to_dict(self) -> dict:
        if self.kind == "samples":
            data = {"t": list(self.data[0]), "values": list(self.data[1])}
        elif self.kind == "poly":
            data = list(self.data)
        else:
            data = self.data
        kind = "poly" if self.kind == "poly" else self.kind
        return {"from": self.start, "to": self.end, "kind": kind, "data": data}

    @classmethod
    def from_dict(cls, d: dict) -> "Piece":
        kind = d["kind"]
        data = d["data"]
        if kind == "samples":
            if isinstance(data, dict):
                data = (data["t"], data["values"])
            else:
                arr = np.asarray(data, dtype=float)
                data = (arr[:, 0], arr[:, 1])
        return cls(float(d["from"]), float(d["to"]), kind, data)


@dataclass(frozen=True)
class SignStructure:
    """Sign markers of a validated weight.

    ``t0`` is the end of the maximal initial interval where ``a == 0`` (zero when
    the first positive hump starts at ``t = 0``); ``t_end`` is the start of the
    maximal final interval where ``a == 0`` (equal to ``T`` otherwise).
    """

    sigma: float
    tau: float
    t0: float
    t_end: float


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """A piecewise weight on ``[0, T]`` tiled by :class:`Piece` objects."""

    pieces: tuple[Piece, ...]
    horizon: float
    sign_markers: SignStructure | None = field(default=None, compare=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if not pieces:
            raise ValidationError("weight needs at least one piece")
        T = float(self.horizon)
        object.__setattr__(self, "horizon", T)
        if abs(pieces[0].start) > 1e-12 or abs(pieces[-1].end - T) > 1e-12:
            raise ValidationError("pieces must tile [0, T]")
        for p, q in zip(pieces[:-1], pieces[1:]):
            if abs(p.end - q.start) > 1e-12:
                raise ValidationError(f"gap or overlap between pieces at t={p.end} / t={q.start}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def piecewise_constant(cls, breaks: Sequence[float], values: Sequence[float]) -> "WeightSpec":
        """Weight equal to ``values[i]`` on ``[breaks[i], breaks[i+1]]``."""
        if len(breaks) != len(values) + 1:
            raise ValidationError("need len(breaks) == len(values) + 1")
        pieces = tuple(
            Piece(float(a), float(b), "constant", float(v))
            for a, b, v in zip(breaks[:-1], breaks[1:], values)
        )
        return cls(pieces, float(breaks[-1]))

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSpec":
        pieces = tuple(Piece.from_dict(p) for p in d["pieces"])
        return cls(pieces, float(d["horizon"]))

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "pieces": [p.to_dict() for p in self.pieces]}

    # -- compiled representation ------------------------------------------

    @cached_property
    def _compiled(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        knots = [0.0]
        rows: list[np.ndarray] = []
        for p in self.pieces:
            k, r = p.rows()
            knots.extend(k[1:].tolist())
            rows.extend(r)
        width = max(len(r) for r in rows)
        coeffs = np.zeros((len(rows), width))
        for i, r in enumerate(rows):
            coeffs[i, : len(r)] = r
        knots_arr, coeffs = _pp.split_at_roots(np.asarray(knots), coeffs)
        knots_arr[-1] = self.horizon
        return knots_arr, coeffs, _pp.piece_signs(knots_arr, coeffs)

    @property
    def knots(self) -> np.ndarray:
        """All breakpoints (piece ends, sample nodes and interior sign changes)."""
        return self._compiled[0]

    @property
    def coeffs(self) -> np.ndarray:
        return self._compiled[1]

    @property
    def signs(self) -> np.ndarray:
        return self._compiled[2]

    # -- evaluation and integrals ----------------------------------------

    def _check_t(self, t: np.ndarray) -> None:
        if np.any((t < 0.0) | (t > self.horizon)) or np.any(~np.isfinite(t)):
            raise DomainError(f"t outside [0, {self.horizon}]")

    def eval(self, t):
        """Weight value; right limit at breakpoints, left limit at ``t = T``."""
        ta = np.asarray(t, dtype=float)
        self._check_t(ta)
        knots, coeffs, _ = self._compiled
        idx = _pp.locate(knots, ta)
        out = _pp.horner(coeffs[idx], ta - knots[idx])
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def _cum(self, part: int, t1: float, t2: float, c0: float = 1.0, c1: float = 0.0) -> float:
        if t1 > t2:
            raise DomainError(f"need t1 <= t2, got {t1} > {t2}")
        self._check_t(np.array([t1, t2]))
        knots, coeffs, signs = self._compiled
        return part * _pp.moment_integral(knots, coeffs, signs == part, t1, t2, c0, c1)

    def cum_pos(self, t1: float, t2: float) -> float:
        """``A+(t1, t2)``, the integral of the positive part over ``[t1, t2]``."""
        return self._cum(1, t1, t2)

    def cum_neg(self, t1: float, t2: float) -> float:
        """``A-(t1, t2)``, the integral of the negative part over ``[t1, t2]``."""
        return self._cum(-1, t1, t2)

    def iterated_pos_from_left(self, t1: float, t2: float) -> float:
        """``int_{t1}^{t2} A+(t1, xi) d xi``."""
        return self._cum(1, t1, t2, t2, -1.0)

    def iterated_pos_from_right(self, t1: float, t2: float) -> float:
        """``int_{t1}^{t2} A+(xi, t2) d xi``."""
        return self._cum(1, t1, t2, -t1, 1.0)

    def iterated_neg_from_left(self, t1: float, t2: float) -> float:
        """``int_{t1}^{t2} A-(t1, xi) d xi``."""
        return self._cum(-1, t1, t2, t2, -1.0)

    def sup_pos(self) -> float:
        """Essential supremum of ``a+``."""
        knots, coeffs, signs = self._compiled
        best = 0.0
        for i in np.flatnonzero(signs > 0):
            best = max(best, _pp.extrema(coeffs[i], 0.0, knots[i + 1] - knots[i])[1])
        return best

    # -- sign structure ----------------------------------------------------

    def validate_sign_structure(self) -> SignStructure:
        """Locate ``sigma < tau`` realizing the positive/negative/positive pattern.

        ``sigma`` is the first time the negative part starts to accumulate and
        ``tau`` the last time it does, so ``A-(sigma, t) > 0`` on ``]sigma, tau]``.
        """
        knots, _, signs = self._compiled
        nz = np.flatnonzero(signs != 0)
        if not np.any(signs < 0):
            raise SignStructureError("weight is nonnegative; it must change sign")
        if not np.any(signs > 0):
            raise SignStructureError("weight is nonpositive; it must change sign")
        runs = []
        for i in nz:
            s = int(signs[i])
            if runs and runs[-1][0] == s:
                runs[-1][2] = i
            else:
                runs.append([s, i, i])
        pattern = [r[0] for r in runs]
        if pattern.count(-1) > 1:
            raise UnsupportedStructureError(
                f"weight has {pattern.count(-1)} negative humps; only one is supported"
            )
        if pattern != [1, -1, 1]:
            raise SignStructureError(
                "weight must be positive, then negative, then positive on [0, T]"
            )
        sigma = float(knots[runs[1][1]])
        tau = float(knots[runs[1][2] + 1])
        t0 = float(knots[runs[0][1]])
        t_end = float(knots[runs[2][2] + 1])
        return SignStructure(sigma, tau, t0, t_end)

    @cached_property
    def structure(self) -> SignStructure:
        if self.sign_markers is not None:
            return self.sign_markers
        return self.validate_sign_structure()


@dataclass(frozen=True, eq=False)
class ScaledWeight:
    """``lambda * a+(t) - mu * a-(t)``."""

    base: WeightSpec
    lam: float
    mu: float

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0 or not (np.isfinite(self.lam) and np.isfinite(self.mu)):
            raise ValidationError("lambda and mu must be finite and nonnegative")

    @property
    def horizon(self) -> float:
        return self.base.horizon

    @cached_property
    def _compiled(self) -> tuple[np.ndarray, np.ndarray]:
        knots, coeffs, signs = self.base._compiled
        factor = np.where(signs > 0, self.lam, np.where(signs < 0, self.mu, 0.0))
        return knots, np.ascontiguousarray(coeffs * factor[:, None])

    @property
    def knots(self) -> np.ndarray:
        return self._compiled[0]

    @property
    def coeffs(self) -> np.ndarray:
        return self._compiled[1]

    def eval(self, t):
        ta = np.asarray(t, dtype=float)
        self.base._check_t(ta)
        knots, coeffs = self._compiled
        idx = _pp.locate(knots, ta)
        out = _pp.horner(coeffs[idx], ta - knots[idx])
        return float(out) if out.ndim == 0 else out

    __call__ = eval


def example_weight(a1: float = 1.75, a2: float = 1.0, a3: float = 1.0,
                   sigma: float = 0.5, tau: float = 1.0, T: float = 2.0) -> WeightSpec:
    """Three-hump step weight ``a1 on [0,sigma], -a2 on ]sigma,tau[, a3 on [tau,T]``."""
    return WeightSpec.piecewise_constant([0.0, sigma, tau, T], [a1, -a2, a3])
