"""Comparison open triangles in the model and the gluing of thin pieces.

An open triangle has two vertices ``p``, ``q`` off the boundary, the two
boundary-orthogonal segments dropping from them, and a minimal geodesic
joining them.  Its model counterpart keeps the heights ``a = x(p)``,
``c = x(q)`` and the side length ``b``.

Angles at a vertex are measured between the opposite side and the
downward vertical, i.e. the direction back along the boundary segment.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import _scan
from .errors import (ConnectivityError, ConvexityViolation, DomainError, IterationError,
                     NonexistenceError, TruncationError)
from .model_surface import (GeodesicPath, GeodesicState, ModelPoint, endpoint_after_length,
                            geodesic_bvp, integrate_geodesic, model_distance)
from .tolerances import (ANGLE_EQUALITY_TOL, ANGLE_XTOL, DISTANCE_TOL, INEQUALITY_TOL,
                         SHOOTING_BRACKETS)
from .warping import WarpingFunction

log = logging.getLogger(__name__)

InjectivityProbe = Callable[[float], float]

HINGE_TOL = 1e-6
SUBDIVISION_SAFETY = 0.5
MAX_SWEEPS = 10_000
SHORTENING_TOL = 1e-10
_CONTAINMENT_TOL = 1e-6


@dataclass(frozen=True)
class TriangleMeasurements:
    """Side data of an open triangle: ``a = d(bd, p)``, ``b = d(p, q)``, ``c = d(bd, q)``."""

    a: float
    b: float
    c: float
    angle_p: float | None = None
    angle_q: float | None = None
    footgap: float | None = None

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0):
            raise DomainError(f"vertices must lie off the boundary (a = {self.a!r}, c = {self.c!r})")
        if not self.b > 0:
            raise DomainError(f"side length b must be positive, got {self.b!r}")
        if abs(self.c - self.a) > self.b * (1 + 1e-12) + 1e-12:
            raise DomainError(f"|c - a| = {abs(self.c - self.a):.6g} exceeds b = {self.b:.6g}")

    @property
    def has_angles(self) -> bool:
        return self.angle_p is not None and self.angle_q is not None

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "angle_p": self.angle_p,
                "angle_q": self.angle_q, "footgap": self.footgap}


@dataclass(frozen=True)
class ModelOpenTriangle:
    measurements: TriangleMeasurements
    p: ModelPoint
    q: ModelPoint
    opposite_side: GeodesicPath = field(repr=False)
    angle_p: float
    angle_q: float
    footgap: float
    feet: tuple[float, float]
    shooting_angle: float
    alternatives: tuple[float, ...] = ()

    def translated(self, dy: float) -> "ModelOpenTriangle":
        return replace(self, p=self.p.shifted(dy), q=self.q.shifted(dy),
                       opposite_side=self.opposite_side.translated(dy),
                       feet=(self.feet[0] + dy, self.feet[1] + dy))


@dataclass(frozen=True)
class ThinnessReport:
    thin: bool
    margin: float
    bound: float
    heights: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class DomainScaffold:
    """The region between the boundary, two vertical sides and a broken side ``eta``.

    ``eta`` is a chain of geodesic arcs through ``vertices`` with ``y``
    increasing, so the region is ``{0 <= x <= eta(y), y0 <= y <= yk}``.
    """

    vertices: tuple[ModelPoint, ...]
    pieces: tuple[GeodesicPath, ...] = field(repr=False)
    eta_y: np.ndarray = field(repr=False)
    eta_x: np.ndarray = field(repr=False)

    @classmethod
    def from_pieces(cls, pieces: Sequence[GeodesicPath], n: int = 1000) -> "DomainScaffold":
        ys, xs = [], []
        for path in pieces:
            s = np.linspace(0.0, path.total_length, n)
            x, y = path.at(s)[:2]
            ys.append(y)
            xs.append(x)
        y, x = np.concatenate(ys), np.concatenate(xs)
        if np.any(np.diff(y) < -1e-12):
            raise ValueError("broken side must be a graph over y (increasing y)")
        verts = [pieces[0].start] + [p.end for p in pieces]
        return cls(tuple(verts), tuple(pieces), y, x)

    @property
    def y_range(self) -> tuple[float, float]:
        return self.vertices[0].y, self.vertices[-1].y

    def eta(self, y):
        return np.interp(y, self.eta_y, self.eta_x)

    def contains(self, path: GeodesicPath, n: int = 400, tol: float = _CONTAINMENT_TOL) -> bool:
        s = np.linspace(0.0, path.total_length, n)
        x, y = path.at(s)[:2]
        y0, y1 = self.y_range
        if np.any(y < y0 - tol) or np.any(y > y1 + tol) or np.any(x < -tol):
            return False
        return bool(np.all(x <= self.eta(y) + tol))


@dataclass(frozen=True)
class GeneralizedOpenTriangle:
    feet: tuple[float, float]
    vertex_p: ModelPoint
    vertex_q: ModelPoint
    pieces: tuple[ModelOpenTriangle, ...] = field(repr=False)
    broken_side: tuple[GeodesicPath, ...] = field(repr=False)
    shortest_arc: GeodesicPath = field(repr=False)
    angle_p: float
    angle_q: float
    hinge_angles: tuple[float, ...]
    chord: float
    contact_vertices: tuple[int, ...] = ()

    @property
    def broken_length(self) -> float:
        return float(sum(p.measurements.b for p in self.pieces))

    @property
    def arc_length(self) -> float:
        return self.shortest_arc.total_length

    @property
    def footgap(self) -> float:
        return self.feet[1] - self.feet[0]

    def chain_slacks(self) -> dict[str, float]:
        """Slacks of ``c - a <= d(p, q) <= L(arc) <= sum b``; all should be >= 0."""
        gap = self.vertex_q.x - self.vertex_p.x
        return {"height_gap<=chord": self.chord - gap,
                "chord<=arc": self.arc_length - self.chord,
                "arc<=broken_side": self.broken_length - self.arc_length}


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    residual: float
    passed: bool
    kind: str = "inequality"

    def as_row(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "residual": self.residual,
                "pass": self.passed}


@dataclass(frozen=True)
class ComparisonReport:
    measured: TriangleMeasurements
    model_triangle: ModelOpenTriangle | GeneralizedOpenTriangle = field(repr=False)
    checks: tuple[Check, ...]
    equality_case: bool
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst_residual(self) -> float:
        ineq = [c.residual for c in self.checks if c.kind == "inequality"]
        return min(ineq) if ineq else math.inf

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def rows(self) -> list[dict]:
        return [c.as_row() for c in self.checks]


# --- comparison triangles ---------------------------------------------------


def _downward_angles(path: GeodesicPath) -> tuple[float, float]:
    """Angles at start and end between the path and the downward vertical."""
    return math.pi - path.start_state().angle, path.end_state().angle


def solve_comparison_triangle(w: WarpingFunction, t: TriangleMeasurements, *,
                              n_brackets: int = SHOOTING_BRACKETS,
                              xtol: float = ANGLE_XTOL) -> ModelOpenTriangle:
    """Model triangle with ``x(p) = a``, ``x(q) = c`` and a minimal opposite side of length ``b``.

    ``p`` sits at ``(a, 0)``; every initial angle whose geodesic of length
    ``b`` ends at height ``c`` without touching the boundary is found, and
    among several the one whose side is still minimising is kept.
    """
    a, b, c = t.a, t.b, t.c
    w.check_height(a)
    w.check_height(c)
    grid = np.linspace(0.0, math.pi, n_brackets + 1)
    coarse = _scan.scan_fixed_length(w, a, grid, b) - c

    def G(theta):
        end = endpoint_after_length(w, GeodesicState(ModelPoint(a, 0.0), float(theta)), b)
        return math.nan if end is None else end[0] - c

    roots: list[float] = []
    for i in range(grid.size - 1):
        f0, f1 = coarse[i], coarse[i + 1]
        if not (np.isfinite(f0) and np.isfinite(f1)):
            continue
        if f0 == 0.0:
            cand = [grid[i]]
        elif f0 * f1 < 0:
            g0, g1 = G(grid[i]), G(grid[i + 1])
            if not (math.isfinite(g0) and math.isfinite(g1)) or g0 * g1 > 0:
                continue
            cand = [grid[i] if g0 == 0 else grid[i + 1] if g1 == 0 else
                    brentq(G, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)]
        else:
            continue
        for r in cand:
            if not any(abs(r - s) <= 10 * xtol for s in roots):
                roots.append(float(r))
    if coarse.size and coarse[-1] == 0.0:
        roots.append(float(grid[-1]))
    if not roots:
        raise NonexistenceError(
            f"no geodesic of length {b:.6g} from height {a:.6g} ends at height {c:.6g} in {w.describe()}")

    candidates = []
    for theta in roots:
        if theta <= 0.0 or theta >= math.pi:
            raise NonexistenceError("degenerate triangle: the opposite side is a boundary segment")
        path = integrate_geodesic(w, GeodesicState(ModelPoint(a, 0.0), theta), b)
        if path.truncated or np.min(path.x) <= 0.0:
            continue
        candidates.append((theta, path))
    if not candidates:
        raise NonexistenceError("every model side of this length meets the boundary")
    if len(candidates) > 1:
        minimal = []
        for theta, path in candidates:
            try:
                d, _ = model_distance(w, path.start, path.end)
            except ConnectivityError:
                continue
            if d >= b - DISTANCE_TOL:
                minimal.append((theta, path))
        log.info("%d shooting solutions for %s; %d minimal", len(candidates), t, len(minimal))
        if not minimal:
            raise NonexistenceError("no minimal model side realises the measurements")
        candidates = minimal
    theta, path = candidates[0]
    q = path.end
    if abs(q.x - c) > DISTANCE_TOL:
        raise NonexistenceError(f"shooting reached height {q.x!r}, wanted {c!r}")
    angle_p, angle_q = _downward_angles(path)
    footgap, _ = model_distance(w, ModelPoint(0.0, 0.0), ModelPoint(0.0, q.y))
    return ModelOpenTriangle(t, ModelPoint(a, 0.0), q, path, angle_p, angle_q, footgap,
                             (0.0, q.y), theta, tuple(r for r, _ in candidates[1:]))


# --- thinness -------------------------------------------------------------


def default_injectivity_probe(w: WarpingFunction, n: int = 513) -> InjectivityProbe:
    """Height-independent lower bound: infinite for ``G <= 0``, else ``pi/sqrt(max G)``."""
    k = float(np.max(w.curvature(np.linspace(0.0, w.domain_max, n))))
    bound = math.inf if k <= 0 else math.pi / math.sqrt(k)
    return lambda _h: bound


def validate_thinness(w: WarpingFunction, t: TriangleMeasurements,
                      inj_probe: InjectivityProbe | None = None, heights=None) -> ThinnessReport:
    """Is ``b`` below the injectivity bound at every height along the opposite side?

    ``heights`` defaults to the heights along the model side.
    """
    probe = default_injectivity_probe(w) if inj_probe is None else inj_probe
    if heights is None:
        try:
            heights = solve_comparison_triangle(w, t).opposite_side.x
        except NonexistenceError:
            heights = np.linspace(min(t.a, t.c), max(t.a, t.c), 33)
    heights = np.asarray(heights, dtype=float)
    bound = float(min(probe(float(h)) for h in heights))
    margin = bound - t.b
    return ThinnessReport(bool(t.b < bound), margin, bound, heights)


def choose_subdivision(w: WarpingFunction, t: TriangleMeasurements,
                       inj_probe: InjectivityProbe | None = None,
                       safety: float = SUBDIVISION_SAFETY) -> int:
    """Smallest ``k`` with ``b/k`` below ``safety`` times the injectivity bound."""
    rep = validate_thinness(w, t, inj_probe)
    if math.isinf(rep.bound):
        return 1
    return max(1, math.floor(t.b / (safety * rep.bound)) + 1)


# --- gluing ---------------------------------------------------------------


def glue_generalized_triangle(w: WarpingFunction, chain: Sequence[TriangleMeasurements], *,
                              inj_probe: InjectivityProbe | None = None,
                              check_thin: bool = True) -> GeneralizedOpenTriangle:
    """Glue thin comparison pieces along shared vertical sides and shorten the broken side."""
    if not chain:
        raise ValueError("empty chain")
    for i, (left, right) in enumerate(zip(chain[:-1], chain[1:])):
        if abs(left.c - right.a) > DISTANCE_TOL:
            raise ValueError(f"pieces {i} and {i + 1} do not share a height ({left.c} vs {right.a})")
        if left.angle_q is not None and right.angle_p is not None:
            if abs(left.angle_q + right.angle_p - math.pi) > INEQUALITY_TOL:
                raise ValueError(f"measured angles at vertex {i + 1} do not sum to pi")
    if check_thin:
        for i, piece in enumerate(chain):
            rep = validate_thinness(w, piece, inj_probe)
            if not rep.thin:
                raise ValueError(f"piece {i} is not thin (margin {rep.margin:.3g})")
    pieces = []
    offset = 0.0
    for piece in chain:
        tri = solve_comparison_triangle(w, piece).translated(offset)
        pieces.append(tri)
        offset = tri.q.y
    hinges = []
    for i, (left, right) in enumerate(zip(pieces[:-1], pieces[1:])):
        hinge = left.angle_q + right.angle_p
        if hinge > math.pi + HINGE_TOL:
            raise ConvexityViolation(f"hinge sum {hinge:.9g} > pi at vertex {i + 1}")
        hinges.append(hinge)
    scaffold = DomainScaffold.from_pieces([p.opposite_side for p in pieces])
    arc, contacts = _shorten(w, scaffold)
    p_hat, q_hat = scaffold.vertices[0], scaffold.vertices[-1]
    chord = model_distance(w, p_hat, q_hat)[0] if len(pieces) > 1 else arc.total_length
    if len(pieces) == 1:
        angle_p, angle_q = pieces[0].angle_p, pieces[0].angle_q
    else:
        angle_p, angle_q = _downward_angles(arc)
    return GeneralizedOpenTriangle((0.0, offset), p_hat, q_hat, tuple(pieces), scaffold.pieces, arc,
                                   angle_p, angle_q, tuple(hinges), chord, contacts)


def _concat(paths: Sequence[GeodesicPath]) -> GeodesicPath:
    if len(paths) == 1:
        return paths[0]
    s, parts = [], []
    off = 0.0
    for k, p in enumerate(paths):
        sl = slice(1, None) if k else slice(None)
        s.append(p.s[sl] + off)
        parts.append((p.x[sl], p.y[sl], p.xdot[sl], p.ydot[sl]))
        off += p.total_length
    cols = [np.concatenate([pt[i] for pt in parts]) for i in range(4)]
    return GeodesicPath(np.concatenate(s), *cols, clairaut=math.nan, warping=paths[0].warping)


def _shorten(w: WarpingFunction, scaffold: DomainScaffold, max_sweeps: int = MAX_SWEEPS,
             tol: float = SHORTENING_TOL) -> tuple[GeodesicPath, tuple[int, ...]]:
    nodes = list(scaffold.vertices)
    ids = list(range(len(nodes)))
    segs = list(scaffold.pieces)
    for _sweep in range(max_sweeps):
        before = sum(s.total_length for s in segs)
        i = 1
        while i < len(nodes) - 1:
            try:
                res = geodesic_bvp(w, nodes[i - 1], nodes[i + 1])
            except (ConnectivityError, TruncationError):
                i += 1
                continue
            if res.length < segs[i - 1].total_length + segs[i].total_length - tol:
                if not scaffold.contains(res.path):
                    raise ConvexityViolation(
                        f"shortcut past vertex {ids[i]} leaves the glued domain")
                segs[i - 1:i + 1] = [res.path]
                del nodes[i]
                del ids[i]
            else:
                i += 1
        after = sum(s.total_length for s in segs)
        if after > before + tol:
            raise IterationError("curve shortening increased the length")
        if before - after < tol:
            break
    else:
        raise IterationError(f"curve shortening did not settle in {max_sweeps} sweeps")
    for seg in segs:
        worst = max(np.max(np.abs(seg.unit_speed_residual())), np.max(np.abs(seg.clairaut_residual())))
        if worst > DISTANCE_TOL:
            raise IterationError(f"shortened arc has geodesic residual {worst:.3g}")
    return _concat(segs), tuple(ids[1:-1])


def shortest_arc_in_domain(w: WarpingFunction, domain: DomainScaffold | GeneralizedOpenTriangle,
                           endpoints: tuple[ModelPoint, ModelPoint] | None = None, *,
                           max_sweeps: int = MAX_SWEEPS) -> GeodesicPath:
    """Shortest arc in the closed glued domain, by repeatedly cutting corners of the broken side.

    Each corner is replaced by the model geodesic joining its neighbours;
    a replacement leaving the domain raises :class:`ConvexityViolation`.
    Arcs that cannot be shortened (contact with the broken side) keep
    their vertex.
    """
    scaffold = domain if isinstance(domain, DomainScaffold) else DomainScaffold.from_pieces(domain.broken_side)
    if endpoints is not None:
        v0, v1 = scaffold.vertices[0], scaffold.vertices[-1]
        if max(abs(endpoints[0].x - v0.x), abs(endpoints[0].y - v0.y),
               abs(endpoints[1].x - v1.x), abs(endpoints[1].y - v1.y)) > DISTANCE_TOL:
            raise ValueError("endpoints must be the extreme vertices of the broken side")
    return _shorten(w, scaffold, max_sweeps)[0]


# --- verification ---------------------------------------------------------


def _ineq(name: str, lhs: float, rhs: float, tol: float = INEQUALITY_TOL) -> Check:
    r = lhs - rhs
    return Check(name, lhs, rhs, r, bool(r >= -tol))


def _eq(name: str, lhs: float, rhs: float, tol: float) -> Check:
    r = lhs - rhs
    return Check(name, lhs, rhs, r, bool(abs(r) <= tol), "equality")


def verify_toponogov(measured: TriangleMeasurements,
                     model_triangle: ModelOpenTriangle | GeneralizedOpenTriangle, *,
                     sector_width: float | None = None) -> ComparisonReport:
    """Evaluate the comparison inequalities; violations are reported, never raised.

    For an ordinary model triangle: ``angle_p >= model angle_p``, the same at
    ``q``, and ``footgap >= model footgap``.  When the footgaps agree within
    1e-6 the equality case is flagged and the angles must then agree within
    1e-5.  For a glued triangle the angle inequalities are joined by the
    length chain ``c - a <= d(p, q) <= L(arc) <= b``.
    """
    if not measured.has_angles:
        raise ValueError("verify_toponogov needs measured angles")
    if sector_width is not None and model_triangle.footgap >= sector_width:
        raise DomainError(f"model footgap {model_triangle.footgap:.6g} is not inside the sector "
                          f"of width {sector_width:.6g}")
    checks = [_ineq("angle_p", measured.angle_p, model_triangle.angle_p),
              _ineq("angle_q", measured.angle_q, model_triangle.angle_q)]
    notes = []
    if measured.footgap is not None:
        checks.append(_ineq("footgap", measured.footgap, model_triangle.footgap))
    if isinstance(model_triangle, GeneralizedOpenTriangle):
        slack = model_triangle.chain_slacks()
        got = model_triangle
        checks.append(_ineq("height_gap<=chord", got.chord, got.vertex_q.x - got.vertex_p.x, DISTANCE_TOL))
        checks.append(_ineq("chord<=arc", got.arc_length, got.chord, DISTANCE_TOL))
        checks.append(_ineq("arc<=side", measured.b, got.arc_length, DISTANCE_TOL))
        if got.contact_vertices:
            notes.append(f"shortest arc touches the broken side at vertices {list(got.contact_vertices)}")
        log.debug("chain slacks %s", slack)
    equality = measured.footgap is not None and abs(measured.footgap - model_triangle.footgap) <= 1e-6
    if equality:
        checks.append(_eq("angle_p_equality", measured.angle_p, model_triangle.angle_p, ANGLE_EQUALITY_TOL))
        checks.append(_eq("angle_q_equality", measured.angle_q, model_triangle.angle_q, ANGLE_EQUALITY_TOL))
    return ComparisonReport(measured, model_triangle, tuple(checks), bool(equality), tuple(notes))
