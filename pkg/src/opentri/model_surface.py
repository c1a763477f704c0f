"""Geodesics on the model half-plane ``{x >= 0}`` with metric ``dx^2 + m(x)^2 dy^2``.

Geodesics are integrated as the full second-order system

    x'' = m m' y'^2,        y'' = -2 (m'/m) x' y'

with an adaptive Dormand-Prince 8(5,3) integrator.  The Clairaut constant
``nu = m^2 |y'|`` and the unit-speed identity are *checked* along every path,
never imposed.

Angles of a tangent are measured against ``+d/dx``; ``heading`` says whether
``y`` increases (+1) or decreases (-1) along the path.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
from scipy.integrate import IntegrationWarning, ode, quad, solve_ivp
from scipy.optimize import brentq

from . import _scan
from .errors import (BranchError, ConnectivityError, DomainError, IntegrationError,
                     QuadratureError, TruncationError)
from .tolerances import ANGLE_XTOL, DISTANCE_TOL, INTEGRATOR_ATOL, INTEGRATOR_RTOL, \
    SHOOTING_BRACKETS, TIE_TOL
from .warping import WarpingFunction

log = logging.getLogger(__name__)

_EXIT_SLACK = 1e-12


@dataclass(frozen=True)
class ModelPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.x >= -_EXIT_SLACK:
            raise DomainError(f"model points need x >= 0, got x = {self.x!r}")

    def shifted(self, dy: float) -> "ModelPoint":
        return ModelPoint(self.x, self.y + dy)


@dataclass(frozen=True)
class GeodesicState:
    point: ModelPoint
    angle: float
    heading: int = 1

    def __post_init__(self):
        if not -1e-15 <= self.angle <= math.pi + 1e-15:
            raise DomainError(f"angle must lie in [0, pi], got {self.angle!r}")
        if self.heading not in (1, -1):
            raise ValueError("heading must be +1 or -1")

    def velocity(self, w: WarpingFunction) -> tuple[float, float]:
        """Coordinate velocity ``(x', y')``; unit length in the metric."""
        m = float(w.m(self.point.x))
        return math.cos(self.angle), self.heading * math.sin(self.angle) / m


def state_from_velocity(w: WarpingFunction, x: float, y: float, xd: float, yd: float) -> GeodesicState:
    m = float(w.m(x))
    angle = math.atan2(m * abs(yd), xd)
    return GeodesicState(ModelPoint(max(x, 0.0), y), angle, -1 if yd < 0 else 1)


@dataclass(frozen=True)
class GeodesicPath:
    """A sampled unit-speed geodesic.

    Sample arrays share one index; ``dense`` (when present) evaluates
    ``(x, y, x', y')`` at any arc length in ``[0, total_length]``.
    """

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    xdot: np.ndarray
    ydot: np.ndarray
    clairaut: float
    warping: WarpingFunction = field(repr=False, compare=False)
    truncated: bool = False
    dense: Callable[[float], np.ndarray] | None = field(default=None, repr=False, compare=False)

    @property
    def total_length(self) -> float:
        return float(self.s[-1])

    @property
    def start(self) -> ModelPoint:
        return ModelPoint(max(float(self.x[0]), 0.0), float(self.y[0]))

    @property
    def end(self) -> ModelPoint:
        return ModelPoint(max(float(self.x[-1]), 0.0), float(self.y[-1]))

    @property
    def samples(self) -> list[tuple[float, GeodesicState]]:
        return list(self.iter_states())

    def iter_states(self) -> Iterator[tuple[float, GeodesicState]]:
        for i in range(self.s.size):
            yield float(self.s[i]), state_from_velocity(
                self.warping, float(self.x[i]), float(self.y[i]), float(self.xdot[i]), float(self.ydot[i]))

    def start_state(self) -> GeodesicState:
        return state_from_velocity(self.warping, self.x[0], self.y[0], self.xdot[0], self.ydot[0])

    def end_state(self) -> GeodesicState:
        return state_from_velocity(self.warping, self.x[-1], self.y[-1], self.xdot[-1], self.ydot[-1])

    def at(self, s) -> np.ndarray:
        """``(x, y, x', y')`` at arc length ``s`` (dense output or linear interpolation)."""
        if self.dense is not None:
            return np.asarray(self.dense(s))
        s = np.asarray(s, dtype=float)
        return np.array([np.interp(s, self.s, a) for a in (self.x, self.y, self.xdot, self.ydot)])

    def unit_speed_residual(self) -> np.ndarray:
        m = np.asarray(self.warping.m(self.x), dtype=float)
        return self.xdot ** 2 + (m * self.ydot) ** 2 - 1.0

    def clairaut_residual(self) -> np.ndarray:
        m = np.asarray(self.warping.m(self.x), dtype=float)
        return m * m * np.abs(self.ydot) - self.clairaut

    def translated(self, dy: float) -> "GeodesicPath":
        dense = None
        if self.dense is not None:
            base = self.dense

            def dense(s):
                out = np.array(base(s), dtype=float)
                out[1] += dy
                return out
        return GeodesicPath(self.s, self.x, self.y + dy, self.xdot, self.ydot, self.clairaut,
                            self.warping, self.truncated, dense)

    def reflected(self, y0: float = 0.0) -> "GeodesicPath":
        """Mirror image under ``y -> 2 y0 - y`` (an isometry of the model)."""
        dense = None
        if self.dense is not None:
            base = self.dense

            def dense(s):
                out = np.array(base(s), dtype=float)
                out[1] = 2 * y0 - out[1]
                out[3] = -out[3]
                return out
        return GeodesicPath(self.s, self.x, 2 * y0 - self.y, self.xdot, -self.ydot, self.clairaut,
                            self.warping, self.truncated, dense)

    def reversed(self) -> "GeodesicPath":
        L = self.total_length
        dense = None
        if self.dense is not None:
            base = self.dense

            def dense(s):
                out = np.array(base(L - np.asarray(s, dtype=float)), dtype=float)
                out[2:] = -out[2:]
                return out
        return GeodesicPath(L - self.s[::-1], self.x[::-1], self.y[::-1], -self.xdot[::-1],
                            -self.ydot[::-1], self.clairaut, self.warping, self.truncated, dense)


@dataclass(frozen=True)
class SectorProbeReport:
    theta0: float
    pairs_tested: int
    violating_pair: tuple[ModelPoint, ModelPoint] | None
    verdict: str
    reason: str = ""
    unconnected: int = 0

    def __post_init__(self):
        if (self.verdict == "violation") != (self.violating_pair is not None):
            raise ValueError("verdict must be 'violation' exactly when a violating pair is present")


# --- pointwise quantities ---------------------------------------------------


def gaussian_curvature(w: WarpingFunction, t: float) -> float:
    """Curvature ``G(t) = -m''(t)/m(t)`` of the model at height ``t``."""
    w.check_height(t)
    return float(-w.d2m(t) / w.m(t))


def clairaut_constant(w: WarpingFunction, state: GeodesicState) -> float:
    return float(w.m(state.point.x)) * math.sin(state.angle)


def boundary_distance(p: ModelPoint) -> float:
    """``d(boundary, p)``: the height itself, since vertical lines are boundary rays."""
    return p.x


# --- integration ----------------------------------------------------------


def _geodesic_rhs(w: WarpingFunction):
    m_fn, dm_fn, _ = w.scalar

    def rhs(_s, u):
        x, _y, xd, yd = u
        m = m_fn(x)
        dm = dm_fn(x)
        return [xd, yd, m * dm * yd * yd, -2.0 * (dm / m) * xd * yd]

    return rhs


def _exit_events(w: WarpingFunction):
    def below(_s, u):
        return u[0] + _EXIT_SLACK

    below.terminal = True
    below.direction = -1

    def above(_s, u):
        return u[0] - w.domain_max

    above.terminal = True
    above.direction = 1
    return below, above


def _atol(atol: float) -> list[float]:
    # y' spans many decades when m grows; control it relatively only
    return [atol, atol, atol, 1e-300]


def integrate_geodesic(w: WarpingFunction, init: GeodesicState, length: float, *,
                       n_samples: int | None = None, rtol: float = INTEGRATOR_RTOL,
                       atol: float = INTEGRATOR_ATOL) -> GeodesicPath:
    """Integrate the unit-speed geodesic from ``init`` for arc length ``length``.

    A path that reaches the boundary stops there and is flagged
    ``truncated``.  Leaving ``x <= domain_max`` raises :class:`TruncationError`.
    """
    if not length > 0:
        raise ValueError(f"length must be positive, got {length!r}")
    w.check_height(init.point.x)
    xd0, yd0 = init.velocity(w)
    u0 = [init.point.x, init.point.y, xd0, yd0]
    below, above = _exit_events(w)
    t_eval = None if n_samples is None else np.linspace(0.0, length, int(n_samples))
    sol = solve_ivp(_geodesic_rhs(w), (0.0, length), u0, method="DOP853", rtol=rtol,
                    atol=_atol(atol), events=(below, above), dense_output=True, t_eval=t_eval)
    if sol.status == -1:
        raise IntegrationError(f"geodesic integration failed: {sol.message}")
    if sol.t_events[1].size:
        raise TruncationError(
            f"geodesic from {init.point} left the domain x <= {w.domain_max} at s = {sol.t_events[1][0]:.6g}")
    s, u = sol.t, sol.y
    truncated = bool(sol.t_events[0].size)
    if truncated:
        s_end = float(sol.t_events[0][0])
        u_end = sol.y_events[0][0]
        keep = s < s_end
        s = np.append(s[keep], s_end)
        u = np.column_stack([u[:, keep], u_end])
    elif t_eval is None and s[-1] < length:
        s = np.append(s, length)
        u = np.column_stack([u, sol.sol(length)])
    nu = clairaut_constant(w, init)
    return GeodesicPath(s, u[0], u[1], u[2], u[3], nu, w, truncated, sol.sol)


def endpoint_after_length(w: WarpingFunction, init: GeodesicState, length: float):
    """``(x, y, x', y')`` after arc length ``length``, or None if the ray leaves the domain first.

    A lighter relative of :func:`integrate_geodesic` for shooting loops.
    """
    xd0, yd0 = init.velocity(w)
    top = w.domain_max
    status = [0]

    def solout(_s, u):
        if u[0] < -_EXIT_SLACK or u[0] > top:
            status[0] = 1
            return -1
        return 0

    r = ode(_geodesic_rhs(w)).set_integrator("dop853", rtol=INTEGRATOR_RTOL, atol=INTEGRATOR_ATOL,
                                             nsteps=200000)
    r.set_solout(solout)
    r.set_initial_value([init.point.x, init.point.y, xd0, yd0], 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        u = r.integrate(length)
    if status[0] or not r.successful():
        return None
    return np.array(u, dtype=float)


# --- Clairaut quadratures ---------------------------------------------------


def _branch_integral(w: WarpingFunction, nu: float, t1: float, t2: float, kernel) -> float:
    lo, hi = (t1, t2) if t1 <= t2 else (t2, t1)
    w.check_height(lo)
    w.check_height(hi)
    if hi == lo:
        return 0.0
    scale = max(1.0, nu)
    inner = np.linspace(lo, hi, 259)[1:-1]
    if np.any(np.asarray(w.m(inner)) <= nu):
        raise BranchError(f"m <= nu = {nu!r} inside ({lo}, {hi}): turning point in range")
    for end in (lo, hi):
        gap = float(w.m(end)) - nu
        if gap < -1e-12 * scale:
            raise BranchError(f"m({end}) < nu = {nu!r}")
        if gap <= 1e-12 * scale and abs(float(w.dm(end))) <= 1e-9:
            raise QuadratureError(
                f"non-integrable singularity at t = {end}: m = nu with m' = 0")

    def f(t):
        m = float(w.m(t))
        r2 = (m - nu) * (m + nu)
        return kernel(m, math.sqrt(r2)) if r2 > 0 else 0.0

    # t = end +- (half width) u^2 removes inverse-square-root endpoint singularities
    mid = 0.5 * (lo + hi)
    half = mid - lo
    total = 0.0
    for start, sign in ((lo, 1.0), (hi, -1.0)):
        with warnings.catch_warnings():
            # convergence is judged from the error estimate below
            warnings.simplefilter("ignore", IntegrationWarning)
            val, err = quad(lambda u: f(start + sign * half * u * u) * 2.0 * half * u, 0.0, 1.0,
                            epsabs=1e-14, epsrel=1e-12, limit=200)
        if not math.isfinite(val) or err > 1e-9 * max(1.0, abs(val)):
            raise QuadratureError(f"quadrature did not converge (estimate {val}, error {err})")
        total += val
    return total


def quadrature_length(w: WarpingFunction, nu: float, x1: float, x2: float) -> float:
    """Arc length of a monotone geodesic branch between heights ``x1`` and ``x2``."""
    if nu < 0:
        raise ValueError("Clairaut constant must be non-negative")
    if nu == 0:
        w.check_height(x1)
        w.check_height(x2)
        return abs(x2 - x1)
    return _branch_integral(w, nu, x1, x2, lambda m, r: m / r)


def length_lower_bound(w: WarpingFunction, nu: float, t1: float, t2: float) -> float:
    """``t2 - t1 + (nu^2/2) * int dt / (m sqrt(m^2 - nu^2))``; never exceeds the branch length."""
    if t2 < t1:
        raise DomainError("length_lower_bound needs t2 >= t1")
    if nu < 0:
        raise ValueError("Clairaut constant must be non-negative")
    if nu == 0 or t2 == t1:
        w.check_height(t1)
        w.check_height(t2)
        return t2 - t1
    return t2 - t1 + 0.5 * nu * nu * _branch_integral(w, nu, t1, t2, lambda m, r: 1.0 / (m * r))


# --- boundary value problem -----------------------------------------------


@dataclass(frozen=True)
class ShootingRoot:
    angle: float
    length: float


@dataclass(frozen=True)
class BVPResult:
    length: float
    path: GeodesicPath
    roots: tuple[ShootingRoot, ...]
    endpoint_error: float

    @property
    def multiple_minimizers(self) -> bool:
        return len(self.roots) > 1 and self.roots[1].length - self.roots[0].length <= TIE_TOL


def _length_upper_bound(w: WarpingFunction, xp: float, xq: float, dy: float) -> float:
    # vertical - horizontal - vertical detours through a grid of heights
    h = np.unique(np.concatenate([np.linspace(0.0, w.domain_max, 65), [xp, xq]]))
    cost = np.abs(xp - h) + np.abs(xq - h) + np.asarray(w.m(h), dtype=float) * dy
    return float(np.min(cost))


def _precise_crossing(w: WarpingFunction, x0: float, theta: float, dy: float, s_max: float,
                      x_target: float = math.inf):
    """(height, arc length) where the ray from ``(x0, 0)`` first reaches ``y = dy``.

    The height is ``-inf`` when the ray leaves through the boundary first;
    None means it left through the top or ran out of length, counting the
    climb back down to ``x_target`` that a connecting ray would still need.

    Since ``y' = nu/m^2 > 0`` for any non-vertical ray, ``y`` itself serves as
    the integration variable: the geodesic is the graph ``x(y)`` with

        x_yy = m' (2 x_y^2 + m^2) / m,    ds/dy = sqrt(x_y^2 + m^2),

    so the crossing is a fixed endpoint rather than an event.
    """
    sin_t, cos_t = math.sin(theta), math.cos(theta)
    if sin_t <= 1e-14:
        return None if cos_t > 0 or x0 <= 0.0 else (-math.inf, math.inf)
    m_fn, dm_fn, _ = w.scalar
    top = w.domain_max

    def rhs(_y, u):
        x, xy = u[0], u[1]
        m = m_fn(x)
        return [xy, dm_fn(x) * (2.0 * xy * xy + m * m) / m, math.sqrt(xy * xy + m * m)]

    status = [0]

    def solout(_y, u):
        if u[0] < -_EXIT_SLACK:
            status[0] = -1
            return -1
        if u[0] > top or u[2] + max(u[0] - x_target, 0.0) > s_max:
            status[0] = 1
            return -1
        return 0

    r = ode(rhs).set_integrator("dop853", rtol=INTEGRATOR_RTOL, atol=INTEGRATOR_ATOL, nsteps=200000)
    r.set_solout(solout)
    r.set_initial_value([x0, float(w.m(x0)) * cos_t / sin_t, 0.0], 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        u = r.integrate(dy)
    if status[0] < 0:
        return -math.inf, math.inf
    if status[0] > 0:
        return None
    if not r.successful():
        # step collapse: the ray is heading off towards an asymptote (x_y -> +inf)
        return None if u[1] > 0 else (-math.inf, math.inf)
    return float(u[0]), float(u[2])


def _bracket_candidates(coarse: np.ndarray) -> tuple[list, list, list]:
    """Coarse brackets split by kind: (finite/finite and exact zeros, finite/inf, inf/inf).

    ``coarse`` holds -inf/+inf for rays that undershoot/overshoot.  A jump
    from +inf to -inf can hide a window of connecting angles narrower than
    one cell.
    """
    finite = np.isfinite(coarse)
    sign = np.sign(coarse)
    both, one, none = [], [], []
    for i in range(coarse.size - 1):
        if sign[i] * sign[i + 1] < 0:
            kind = both if finite[i] and finite[i + 1] else one if finite[i] or finite[i + 1] else none
            kind.append((i, i + 1))
    for i in np.flatnonzero(finite & (np.abs(np.where(finite, coarse, 1.0)) <= 1e-12)):
        both.append((int(i), int(i)))
    return both, one, none


def _refine_roots(F: Callable[[float], float], grid: np.ndarray, candidates, xtol: float,
                  roots: list[float] | None = None) -> list[float]:
    """Refine coarse brackets ``(i, j)`` of ``F`` on ``grid`` by Brent's method."""
    roots = [] if roots is None else roots
    for i, j in candidates:
        found = None
        if i == j and abs(F(grid[i])) <= 1e-10:
            found = grid[i]
        for widen in range(3 if found is None else 0):
            a = grid[max(i - widen, 0)]
            b = grid[min(j + widen, grid.size - 1)]
            fa, fb = F(a), F(b)
            if fa == 0.0:
                found = a
            elif fb == 0.0:
                found = b
            elif fa * fb < 0:
                found = brentq(F, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
            if found is not None:
                break
        if found is None:
            log.debug("coarse bracket [%s, %s] did not survive refinement", grid[i], grid[j])
            continue
        if not any(abs(found - r) <= 10 * xtol for r in roots):
            roots.append(float(found))
    return roots


def geodesic_bvp(w: WarpingFunction, p: ModelPoint, q: ModelPoint, *,
                 n_brackets: int = SHOOTING_BRACKETS, xtol: float = ANGLE_XTOL,
                 n_samples: int | None = None, max_length: float | None = None,
                 _reversed: bool = False) -> BVPResult:
    """All shooting solutions from ``p`` to ``q``; the shortest one is returned as ``path``.

    The initial angle is scanned on ``n_brackets`` uniform brackets of
    ``[0, pi]``, every sign change is refined by Brent's method and the
    connecting geodesics are ranked by length.  Rays are followed up to
    ``max_length``, by default the length of the best vertical-horizontal
    detour, which already bounds the distance from above.
    """
    w.check_height(p.x)
    w.check_height(q.x)
    dy = q.y - p.y
    if dy == 0.0 or abs(dy) <= 1e-15 * max(1.0, abs(p.y)):
        # same vertical line: the vertical segment is minimal (|x'| <= 1)
        if p.x == q.x:
            path = GeodesicPath(np.zeros(1), np.array([p.x]), np.array([p.y]), np.ones(1),
                                np.zeros(1), 0.0, w)
            return BVPResult(0.0, path, (ShootingRoot(0.0, 0.0),), 0.0)
        theta = 0.0 if q.x > p.x else math.pi
        L = abs(q.x - p.x)
        path = integrate_geodesic(w, GeodesicState(p, theta), L, n_samples=n_samples)
        err = max(abs(path.x[-1] - q.x), abs(path.y[-1] - q.y))
        return BVPResult(L, path, (ShootingRoot(theta, L),), err)

    if q.x <= 0.0 < p.x:
        # rays aimed at a boundary target graze x = 0; shoot from the target instead
        res = geodesic_bvp(w, q, p, n_brackets=n_brackets, xtol=xtol, n_samples=n_samples,
                           max_length=max_length, _reversed=True)
        return BVPResult(res.length, res.path.reversed(), res.roots, res.endpoint_error)

    heading = 1 if dy > 0 else -1
    gap = abs(dy)
    if max_length is None:
        max_length = _length_upper_bound(w, p.x, q.x, gap)
    s_max = max_length * (1 + 1e-6) + 1e-6
    grid = np.linspace(0.0, math.pi, n_brackets + 1)
    if p.x <= 0.0:
        grid = grid[grid <= math.pi / 2]
    x_at, s_at = _scan.scan_to_height_crossing(w, p.x, grid, gap, s_max, q.x)
    coarse = x_at - q.x

    hits: dict[float, tuple[float, float] | None] = {}
    # finite stand-ins for rays that undershoot (boundary exit) or overshoot,
    # so brentq can bracket next to them
    low, high = -(1.0 + q.x), 1.0 + w.domain_max

    def F(theta):
        if theta not in hits:
            hits[theta] = _precise_crossing(w, p.x, theta, gap, s_max, q.x)
        hit = hits[theta]
        if hit is None:
            return high
        return low if hit[0] == -math.inf else hit[0] - q.x

    def verified(angles):
        out = []
        for a in angles:
            val = F(a)
            hit = hits[a]
            if hit is None or abs(val) > DISTANCE_TOL:
                log.debug("discarding shooting angle %r (miss %r)", a, val)
                continue
            out.append(ShootingRoot(a, hit[1]))
        return out

    both, one, none = _bracket_candidates(coarse)
    roots = verified(_refine_roots(F, grid, both, xtol))
    if roots:
        # next to an overshooting ray the crossing length runs into s_max; such
        # a bracket can only beat a known root if its finite end is short enough
        best_len = min(r.length for r in roots)
        cut = best_len + 0.5 * (s_max - best_len)
        one = [(i, j) for i, j in one
               if min(np.nan_to_num(s_at[[i, j]], nan=np.inf, posinf=np.inf)) <= cut]
    roots = verified(_refine_roots(F, grid, one, xtol, [r.angle for r in roots]))
    if not roots:
        roots = verified(_refine_roots(F, grid, none, xtol))
    if not roots and not _reversed:
        # the shooting map can be far better conditioned from the other end
        try:
            res = geodesic_bvp(w, q, p, n_brackets=n_brackets, xtol=xtol, n_samples=n_samples,
                               max_length=max_length, _reversed=True)
        except ConnectivityError:
            pass
        else:
            return BVPResult(res.length, res.path.reversed(), res.roots, res.endpoint_error)
    if not roots:
        raise ConnectivityError(
            f"no connecting geodesic from {p} to {q} within {n_brackets} shooting brackets")
    roots.sort(key=lambda r: r.length)
    best = roots[0]
    path = integrate_geodesic(w, GeodesicState(ModelPoint(p.x, p.y), best.angle, heading),
                              best.length, n_samples=n_samples)
    err = max(abs(path.x[-1] - q.x), abs(path.y[-1] - q.y))
    if err > 100 * DISTANCE_TOL:
        raise ConnectivityError(f"shooting from {p} to {q} missed the endpoint by {err:.3g}")
    return BVPResult(best.length, path, tuple(roots), err)


def model_distance(w: WarpingFunction, p: ModelPoint, q: ModelPoint) -> tuple[float, GeodesicPath]:
    """Length and path of the shortest connecting geodesic found by shooting."""
    res = geodesic_bvp(w, p, q)
    return res.length, res.path


# --- conjugate points and the sector probe ----------------------------------


def first_conjugate_distance(w: WarpingFunction, path: GeodesicPath) -> float | None:
    """First zero in ``(0, L]`` of the normal Jacobi field ``J'' + G(x(s)) J = 0``, ``J(0)=0, J'(0)=1``."""
    L = path.total_length
    if L <= 0:
        return None

    def rhs(s, u):
        x = float(path.at(s)[0])
        return [u[1], -float(w.curvature(max(x, 0.0))) * u[0]]

    def zero(_s, u):
        return u[0]

    zero.terminal = True
    zero.direction = -1
    sol = solve_ivp(rhs, (0.0, L), [0.0, 1.0], method="DOP853", rtol=1e-10, atol=1e-12, events=zero)
    if sol.t_events[0].size:
        return float(sol.t_events[0][0])
    return None


def sector_cut_pair_probe(w: WarpingFunction, theta0: float, n_samples: int, *, seed: int = 0,
                          max_height: float | None = None, boundary_fraction: float = 0.25,
                          n_brackets: int = SHOOTING_BRACKETS) -> SectorProbeReport:
    """Search the sector ``0 < y < theta0`` for a pair of cut points.

    Heights are drawn uniformly from ``[0, max_height]`` except that a
    fraction ``boundary_fraction`` of points sit on the boundary itself.  A
    pair is a violation when two connecting geodesics tie for the minimum
    (within 1e-6) or the shortest geodesic found carries a conjugate point.  Absence of a
    violation is evidence only.
    """
    if not theta0 > 0:
        raise ValueError("theta0 must be positive")
    top = min(w.domain_max, 3.0) if max_height is None else min(max_height, w.domain_max)
    rng = np.random.default_rng(seed)
    m_top = float(np.max(w.m(np.linspace(0.0, top, 257))))

    def search(p, q):
        return abs(p.x - q.x) + top + m_top * abs(p.y - q.y)

    tested = unconnected = 0
    for _ in range(int(n_samples)):
        pts = []
        for _k in range(2):
            x = 0.0 if rng.random() < boundary_fraction else float(rng.uniform(0.0, top))
            pts.append(ModelPoint(x, float(rng.uniform(0.0, theta0))))
        p, q = pts
        tested += 1
        try:
            # longer search than the detour bound: geodesics past a conjugate point count too
            res = geodesic_bvp(w, p, q, n_brackets=n_brackets, max_length=search(p, q))
        except (ConnectivityError, TruncationError):
            unconnected += 1
            continue
        if res.multiple_minimizers:
            return SectorProbeReport(theta0, tested, (p, q), "violation",
                                     "two minimal geodesics of equal length", unconnected)
        conj = first_conjugate_distance(w, res.path)
        if conj is not None and conj <= res.length:
            return SectorProbeReport(theta0, tested, (p, q), "violation",
                                     f"conjugate point at s = {conj:.6g} along the minimiser",
                                     unconnected)
    return SectorProbeReport(theta0, tested, None, "no-violation-found", "", unconnected)
