"""Compiled Dormand-Prince 5(4) kernel for ``x' = y, y' = -a(t) g(x)``.

The weight enters as a piecewise polynomial (``wk`` knots, ``wc`` ascending
local coefficients, already scaled by lambda/mu) and ``g`` likewise (``gk``,
``gc``) with zero extension outside ``]0, 1[``.  Integration never steps
across a weight knot: each inter-knot segment is integrated with its own
polynomial, and the step lands exactly on the knot.
"""

import math

import numba as nb
import numpy as np

OK = 0
NONFINITE = 1
UNDERFLOW = 2
MAX_STEPS = 3
BUFFER_FULL = 4

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


@nb.njit(cache=True, nogil=True)
def _poly(c, row, u):
    v = 0.0
    for j in range(c.shape[1] - 1, -1, -1):
        v = v * u + c[row, j]
    return v


@nb.njit(cache=True, nogil=True)
def g_ext(gk, gc, s):
    if not (s > 0.0 and s < 1.0):
        return 0.0
    lo = 0
    hi = gk.shape[0] - 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if gk[mid] <= s:
            lo = mid
        else:
            hi = mid - 1
    return _poly(gc, lo, s - gk[lo])


@nb.njit(cache=True, nogil=True)
def _fy(wk, wc, gk, gc, p, t, x):
    return -_poly(wc, p, t - wk[p]) * g_ext(gk, gc, x)


@nb.njit(cache=True, nogil=True)
def _start_piece(wk, t0, d):
    m = wk.shape[0] - 1
    # right-continuous piece for forward runs, left piece for backward runs
    p = 0
    while p < m - 1 and wk[p + 1] <= t0:
        p += 1
    if d < 0:
        while p > 0 and wk[p] >= t0:
            p -= 1
    return p


@nb.njit(cache=True, nogil=True)
def run(t0, t1, x0, y0, wk, wc, gk, gc, rtol, atol, h_max, h_fixed, max_steps,
        record, out_t, out_x, out_y, out_din, out_dout):
    """Integrate from ``t0`` to ``t1`` (either direction).

    Returns ``(status, n_knots, x, y)``.  With ``record`` the accepted knots
    and the one-sided values of ``y'`` at each knot are written to the
    output buffers.
    """
    d = 1.0 if t1 > t0 else -1.0
    t = t0
    x = x0
    y = y0
    n = 0
    cap = out_t.shape[0]
    if t0 == t1:
        if record:
            out_t[0] = t0
            out_x[0] = x0
            out_y[0] = y0
            out_din[0] = 0.0
            out_dout[0] = 0.0
        return OK, 1, x, y
    p = _start_piece(wk, t0, d)
    ky1 = _fy(wk, wc, gk, gc, p, t, x)
    if record:
        out_t[0] = t
        out_x[0] = x
        out_y[0] = y
        out_din[0] = ky1
        out_dout[0] = ky1
        n = 1
    h = 0.0
    steps = 0
    while True:
        seg_end = wk[p + 1] if d > 0 else wk[p]
        if (d > 0 and seg_end > t1) or (d < 0 and seg_end < t1):
            seg_end = t1
        ky1 = _fy(wk, wc, gk, gc, p, t, x)
        kx1 = y
        if record:
            out_dout[n - 1] = ky1
        seg_len = abs(seg_end - t)
        if h_fixed > 0.0:
            nsub = int(math.ceil(seg_len / h_fixed - 1e-9))
            if nsub < 1:
                nsub = 1
            hh = d * seg_len / nsub
        else:
            nsub = -1
            if h == 0.0:
                # initial step from the local scale of the solution
                sx = atol + rtol * abs(x)
                sy = atol + rtol * abs(y)
                d0 = math.sqrt(0.5 * ((x / sx) ** 2 + (y / sy) ** 2))
                d1 = math.sqrt(0.5 * ((kx1 / sx) ** 2 + (ky1 / sy) ** 2))
                if d0 < 1e-5 or d1 < 1e-5:
                    h0 = 1e-6
                else:
                    h0 = 0.01 * d0 / d1
                h = min(h0 * 100.0, seg_len)
                if d1 == 0.0:
                    h = seg_len
                h = max(h, 1e-12)
            hh = d * min(abs(h), h_max, seg_len)
        isub = 0
        while True:
            steps += 1
            if steps > max_steps:
                return MAX_STEPS, n, x, y
            last = False
            entry = -1.0
            if nsub > 0:
                isub += 1
                last = isub == nsub
            else:
                rem = seg_end - t
                # land on the segment end rather than leave a sliver step
                if abs(rem) - abs(hh) <= 1e-3 * abs(hh):
                    hh = rem
                    last = True
                # outside ]0, 1[ the motion is linear and every stage sees g = 0, so the
                # error estimate cannot stop a step that jumps across the strip:
                # land exactly on the strip when heading into it, and inside it
                # move at most a quarter of its width per step
                if (x < 0.0 and d * y > 0.0) or (x > 1.0 and d * y < 0.0):
                    bound = 0.0 if x < 0.0 else 1.0
                    he = (bound - x) / y
                    if abs(he) < abs(hh):
                        hh = he
                        last = False
                        entry = bound
                elif 0.0 <= x <= 1.0 and abs(hh * y) > 0.25:
                    hh = d * 0.25 / abs(y)
                    last = False
            # stages
            kx2 = y + hh * A21 * ky1
            ky2 = _fy(wk, wc, gk, gc, p, t + C2 * hh, x + hh * A21 * kx1)
            xs = x + hh * (A31 * kx1 + A32 * kx2)
            kx3 = y + hh * (A31 * ky1 + A32 * ky2)
            ky3 = _fy(wk, wc, gk, gc, p, t + C3 * hh, xs)
            xs = x + hh * (A41 * kx1 + A42 * kx2 + A43 * kx3)
            kx4 = y + hh * (A41 * ky1 + A42 * ky2 + A43 * ky3)
            ky4 = _fy(wk, wc, gk, gc, p, t + C4 * hh, xs)
            xs = x + hh * (A51 * kx1 + A52 * kx2 + A53 * kx3 + A54 * kx4)
            kx5 = y + hh * (A51 * ky1 + A52 * ky2 + A53 * ky3 + A54 * ky4)
            ky5 = _fy(wk, wc, gk, gc, p, t + C5 * hh, xs)
            xs = x + hh * (A61 * kx1 + A62 * kx2 + A63 * kx3 + A64 * kx4 + A65 * kx5)
            kx6 = y + hh * (A61 * ky1 + A62 * ky2 + A63 * ky3 + A64 * ky4 + A65 * ky5)
            tn = seg_end if last else t + hh
            ky6 = _fy(wk, wc, gk, gc, p, t + hh, xs)
            xn = x + hh * (B1 * kx1 + B3 * kx3 + B4 * kx4 + B5 * kx5 + B6 * kx6)
            yn = y + hh * (B1 * ky1 + B3 * ky3 + B4 * ky4 + B5 * ky5 + B6 * ky6)
            kx7 = yn
            ky7 = _fy(wk, wc, gk, gc, p, tn, xn)
            if not (math.isfinite(xn) and math.isfinite(yn)):
                return NONFINITE, n, x, y
            if nsub < 0:
                ex = hh * (E1 * kx1 + E3 * kx3 + E4 * kx4 + E5 * kx5 + E6 * kx6 + E7 * kx7)
                ey = hh * (E1 * ky1 + E3 * ky3 + E4 * ky4 + E5 * ky5 + E6 * ky6 + E7 * ky7)
                sx = atol + rtol * max(abs(x), abs(xn))
                sy = atol + rtol * max(abs(y), abs(yn))
                err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))
                if err > 1.0:
                    fac = max(0.2, 0.9 * err ** -0.2)
                    hh = hh * fac
                    if abs(hh) < 1e-15 * max(1.0, abs(t)):
                        return UNDERFLOW, n, x, y
                    continue
                fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
                h = abs(hh) * fac
                if entry >= 0.0:
                    xn = entry
                    ky7 = 0.0
                    kx7 = yn
            t = tn
            x = xn
            y = yn
            kx1 = kx7
            ky1 = ky7
            if record:
                if n >= cap:
                    return BUFFER_FULL, n, x, y
                out_t[n] = t
                out_x[n] = x
                out_y[n] = y
                out_din[n] = ky7
                out_dout[n] = ky7
                n += 1
            if last:
                break
            if nsub < 0:
                hh = d * min(h, h_max)
        if seg_end == t1:
            break
        p += 1 if d > 0 else -1
    return OK, n, x, y


@nb.njit(cache=True, nogil=True)
def shoot_batch(t0, t1, x0, y0, wk, wc, gk, gc, rtol, atol, h_max, h_fixed, max_steps):
    """Endpoints of many trajectories sharing the same time span."""
    n = x0.shape[0]
    xs = np.empty(n)
    ys = np.empty(n)
    status = np.empty(n, dtype=np.int64)
    dummy = np.empty(0)
    for i in range(n):
        st, _, xe, ye = run(t0, t1, x0[i], y0[i], wk, wc, gk, gc, rtol, atol, h_max,
                            h_fixed, max_steps, False, dummy, dummy, dummy, dummy, dummy)
        xs[i] = xe
        ys[i] = ye
        status[i] = st
    return xs, ys, status
