"""Batched fixed-step RK4 used to bracket shooting roots.

Integrates hundreds of initial angles at once with numpy.  Accuracy is only
good enough to locate sign changes; every bracket is re-solved with the
adaptive integrator afterwards.
"""
from __future__ import annotations

import math

import numpy as np

from .warping import WarpingFunction

MIN_STEPS = 32
MAX_STEP = 0.1
EXIT_SLACK = 1e-12


def _rhs(w: WarpingFunction, x, xd, yd):
    m = w.m(x)
    dm = w.dm(x)
    return xd, yd, m * dm * yd * yd, -2.0 * (dm / m) * xd * yd


def _rk4(w, x, y, xd, yd, h):
    k1 = _rhs(w, x, xd, yd)
    x2, y2 = x + 0.5 * h * k1[0], y + 0.5 * h * k1[1]
    xd2, yd2 = xd + 0.5 * h * k1[2], yd + 0.5 * h * k1[3]
    k2 = _rhs(w, x2, xd2, yd2)
    x3, y3 = x + 0.5 * h * k2[0], y + 0.5 * h * k2[1]
    xd3, yd3 = xd + 0.5 * h * k2[2], yd + 0.5 * h * k2[3]
    k3 = _rhs(w, x3, xd3, yd3)
    x4, y4 = x + h * k3[0], y + h * k3[1]
    xd4, yd4 = xd + h * k3[2], yd + h * k3[3]
    k4 = _rhs(w, x4, xd4, yd4)
    c = h / 6.0
    return (
        x + c * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        y + c * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        xd + c * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
        yd + c * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]),
    )


def _initial(w: WarpingFunction, x0: float, thetas: np.ndarray):
    n = thetas.size
    m0 = float(w.m(x0))
    return (
        np.full(n, float(x0)),
        np.zeros(n),
        np.cos(thetas),
        np.sin(thetas) / m0,
    )


def _steps(length: float) -> tuple[int, float]:
    n = max(MIN_STEPS, math.ceil(length / MAX_STEP))
    return n, length / n


def scan_to_height_crossing(w: WarpingFunction, x0: float, thetas: np.ndarray,
                            target_dy: float, s_max: float, target_x: float = math.inf):
    """Shoot from ``(x0, 0)`` and record where each ray first reaches ``y = target_dy``.

    Returns ``(x_at, s_at)``.  ``x_at`` is ``-inf`` for rays that leave
    through the boundary first and ``+inf`` for rays that leave through the
    top or do not reach the target within ``s_max``.  A ray above
    ``target_x`` is abandoned once the climb back down would exceed ``s_max``.
    """
    x, y, xd, yd = _initial(w, x0, thetas)
    n_total = thetas.size
    x_at = np.full(n_total, np.inf)
    s_at = np.full(n_total, np.nan)
    idx = np.arange(n_total)
    n_steps, h = _steps(s_max)
    top = w.domain_max
    for k in range(n_steps):
        xn, yn, xdn, ydn = _rk4(w, x, y, xd, yd, h)
        hit = yn >= target_dy
        if np.any(hit):
            # cubic Hermite for y on the step, two Newton iterations for the crossing
            y0, y1, v0, v1 = y[hit], yn[hit], yd[hit], ydn[hit]
            span = np.where(y1 > y0, y1 - y0, 1.0)
            sig = np.clip((target_dy - y0) / span, 0.0, 1.0)
            for _ in range(3):
                s2, s3 = sig * sig, sig * sig * sig
                yv = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + sig) * h * v0 \
                    + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * v1
                dy = (6 * s2 - 6 * sig) * y0 + (3 * s2 - 4 * sig + 1) * h * v0 \
                    + (-6 * s2 + 6 * sig) * y1 + (3 * s2 - 2 * sig) * h * v1
                sig = np.clip(sig - (yv - target_dy) / np.where(dy > 0, dy, 1.0), 0.0, 1.0)
            s2, s3 = sig * sig, sig * sig * sig
            xa, xb, ua, ub = x[hit], xn[hit], xd[hit], xdn[hit]
            xv = (2 * s3 - 3 * s2 + 1) * xa + (s3 - 2 * s2 + sig) * h * ua \
                + (-2 * s3 + 3 * s2) * xb + (s3 - s2) * h * ub
            ok = (xv >= -EXIT_SLACK) & (xn[hit] >= -EXIT_SLACK)
            sel = idx[hit]
            x_at[sel[ok]] = xv[ok]
            s_at[sel[ok]] = (k + sig[ok]) * h
        below = ~hit & (xn < -EXIT_SLACK)
        x_at[idx[below]] = -np.inf
        s_now = (k + 1) * h
        keep = ~hit & ~below & (xn <= top) & (s_now + np.maximum(xn - target_x, 0.0) <= s_max)
        if not np.any(keep):
            break
        idx, x, y, xd, yd = idx[keep], xn[keep], yn[keep], xdn[keep], ydn[keep]
    return x_at, s_at


def scan_fixed_length(w: WarpingFunction, x0: float, thetas: np.ndarray, length: float):
    """Heights reached after arc length ``length``; NaN where the ray exits."""
    x, y, xd, yd = _initial(w, x0, thetas)
    n_total = thetas.size
    out = np.full(n_total, np.nan)
    idx = np.arange(n_total)
    n_steps, h = _steps(length)
    top = w.domain_max
    for _ in range(n_steps):
        x, y, xd, yd = _rk4(w, x, y, xd, yd, h)
        keep = (x >= -EXIT_SLACK) & (x <= top)
        if not np.all(keep):
            idx, x, y, xd, yd = idx[keep], x[keep], y[keep], xd[keep], yd[keep]
            if idx.size == 0:
                return out
    out[idx] = x
    return out
