"""Piecewise-polynomial helpers shared by the weight and nonlinearity models.

A piecewise polynomial is stored as ``knots`` (shape ``(m + 1,)``, strictly
increasing) and ``coeffs`` (shape ``(m, k)``), where row ``i`` holds the
coefficients of piece ``i`` in ascending powers of the local variable
``u = t - knots[i]``.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P


def horner(coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate rows of ascending ``coeffs`` at matching local abscissae ``u``."""
    out = np.zeros_like(u, dtype=float)
    for j in range(coeffs.shape[-1] - 1, -1, -1):
        out = out * u + coeffs[..., j]
    return out


def shift(c: np.ndarray, delta: float) -> np.ndarray:
    """Coefficients of ``v -> p(v + delta)`` given ascending coefficients of ``p``."""
    c = np.asarray(c, dtype=float)
    out = np.zeros_like(c)
    # Taylor expansion around delta
    d = c.copy()
    fact = 1.0
    for k in range(len(c)):
        if k > 0:
            d = P.polyder(d) if len(d) > 1 else np.zeros(1)
            fact *= k
        out[k] = P.polyval(delta, d) / fact
    return out


def roots_inside(c: np.ndarray, length: float, rel: float = 1e-12) -> np.ndarray:
    """Real roots of ``c`` strictly inside ``(0, length)``, sorted."""
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    if len(c) <= 1:
        return np.empty(0)
    r = P.polyroots(c)
    r = r[np.abs(r.imag) <= 1e-12 * max(1.0, length)].real
    eps = rel * length
    r = r[(r > eps) & (r < length - eps)]
    return np.unique(r)


def extrema(c: np.ndarray, lo: float, hi: float) -> tuple[float, float]:
    """Exact (min, max) of the polynomial ``c`` over ``[lo, hi]``."""
    c = np.asarray(c, dtype=float)
    cand = [lo, hi]
    if len(c) > 2 and hi > lo:
        # roots_inside works on (0, length); re-center the derivative at lo
        crit = roots_inside(shift(P.polyder(c), lo), hi - lo) + lo
        cand.extend(crit.tolist())
    vals = P.polyval(np.asarray(cand), c)
    return float(vals.min()), float(vals.max())


def split_at_roots(
    knots: np.ndarray, coeffs: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Refine a piecewise polynomial so that no piece changes sign inside."""
    new_k = [float(knots[0])]
    new_c = []
    for i in range(len(coeffs)):
        a, b = float(knots[i]), float(knots[i + 1])
        c = coeffs[i]
        cuts = roots_inside(c, b - a)
        start = 0.0
        for r in cuts:
            new_c.append(shift(c, start))
            new_k.append(a + r)
            start = r
        new_c.append(shift(c, start))
        new_k.append(b)
    return np.asarray(new_k), np.asarray(new_c)


def piece_signs(knots: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Sign (-1, 0, +1) of each piece, assuming no interior sign change."""
    mid = 0.5 * np.diff(knots)
    vals = horner(coeffs, mid)
    signs = np.sign(vals).astype(int)
    signs[np.all(coeffs == 0.0, axis=1)] = 0
    return signs


def locate(knots: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Right-continuous piece index for ``t``; the last knot maps to the last piece."""
    idx = np.searchsorted(knots, t, side="right") - 1
    return np.clip(idx, 0, len(knots) - 2)


def moment_integral(
    knots: np.ndarray,
    coeffs: np.ndarray,
    mask: np.ndarray,
    t1: float,
    t2: float,
    c0: float = 1.0,
    c1: float = 0.0,
) -> float:
    """Integral of ``(c0 + c1 * s) * p(s)`` over ``[t1, t2]`` restricted to pieces in ``mask``.

    Exact for polynomial pieces.
    """
    if t2 <= t1:
        return 0.0
    lo = np.maximum(knots[:-1], t1)
    hi = np.minimum(knots[1:], t2)
    sel = mask & (hi > lo)
    if not np.any(sel):
        return 0.0
    k0 = knots[:-1][sel]
    c = coeffs[sel]
    m, k = c.shape
    # multiply each row by (c0 + c1*k0) + c1*u
    prod = np.zeros((m, k + 1))
    prod[:, :k] += (c0 + c1 * k0)[:, None] * c
    prod[:, 1:] += c1 * c
    anti = np.zeros((m, k + 2))
    anti[:, 1:] = prod / np.arange(1, k + 2)
    ul = lo[sel] - k0
    uh = hi[sel] - k0
    return float(np.sum(horner(anti, uh) - horner(anti, ul)))
