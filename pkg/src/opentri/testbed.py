"""Synthetic surfaces with computable ground truth.

Two kinds of surface are provided: warped half-planes ``dx^2 + n(x)^2 dy^2``
on ``x >= 0`` (the same chart as the model, with a testbed warping ``n``)
and the flat cylinder ``[0, height] x (R / circumference Z)`` whose
boundary has two components.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConnectivityError, DomainError, NonexistenceError, OrderingError
from .model_surface import (GeodesicPath, GeodesicState, ModelPoint, geodesic_bvp,
                            integrate_geodesic)
from .tolerances import DISTANCE_TOL, TIE_TOL
from .triangles import (ComparisonReport, TriangleMeasurements, solve_comparison_triangle,
                        verify_toponogov)
from .warping import WarpingFunction, const, make_warping

HALF_PLANE = "half-plane"
CYLINDER = "cylinder"
MAX_WINDING = 3
MAX_RANDOM_HEIGHT = 3.0
MAX_RANDOM_DY = 3.0
MIN_RANDOM_HEIGHT = 0.1
_FD_H = 1e-3


@dataclass(frozen=True)
class Cylinder:
    circumference: float
    height: float

    def __post_init__(self):
        if not (self.circumference > 0 and self.height > 0):
            raise DomainError("cylinder circumference and height must be positive")


@dataclass(frozen=True)
class SyntheticSurface:
    n: WarpingFunction
    topology: str | Cylinder = HALF_PLANE

    def __post_init__(self):
        if isinstance(self.topology, Cylinder):
            if self.n.name != "const":
                raise DomainError("cylinder testbeds are flat")
        elif self.topology != HALF_PLANE:
            raise DomainError(f"unknown topology {self.topology!r}")

    @classmethod
    def half_plane(cls, n="const") -> "SyntheticSurface":
        return cls(make_warping(n))

    @classmethod
    def cylinder(cls, circumference: float, height: float) -> "SyntheticSurface":
        return cls(const(domain_max=max(height, 1.0)), Cylinder(circumference, height))

    @property
    def is_cylinder(self) -> bool:
        return isinstance(self.topology, Cylinder)

    def check_point(self, p: ModelPoint) -> None:
        top = self.topology.height if self.is_cylinder else self.n.domain_max
        if not -1e-12 <= p.x <= top + 1e-12:
            raise DomainError(f"{p} is not on the surface")

    def boundary_distance(self, p: ModelPoint) -> float:
        if self.is_cylinder:
            return min(p.x, self.topology.height - p.x)
        return p.x

    def metric(self, x):
        """Coefficients ``(E, F, G)`` of the metric at height ``x``."""
        x = np.asarray(x, dtype=float)
        n = np.asarray(self.n.m(x), dtype=float)
        return np.ones_like(x), np.zeros_like(x), n * n

    def describe(self) -> str:
        if self.is_cylinder:
            c = self.topology
            return f"flat cylinder (circumference {c.circumference:g}, height {c.height:g})"
        return f"half-plane with warping {self.n.describe()}"


@dataclass(frozen=True)
class SurfaceGeodesic:
    length: float
    path: GeodesicPath = field(repr=False)
    angle_p: float
    angle_q: float
    n_minimizers: int = 1


@dataclass(frozen=True)
class CutLocusSample:
    point: ModelPoint
    distances_to_components: tuple[float, float]
    n_minimizers: int
    is_midpoint: bool
    is_cut: bool = False

    def __post_init__(self):
        d1, d2 = self.distances_to_components
        mid = abs(d1 - d2) <= DISTANCE_TOL
        if self.is_midpoint != mid:
            raise ValueError("is_midpoint must agree with the component distances")


@dataclass(frozen=True)
class ExperimentCheck:
    name: str
    passed: bool
    worst_residual: float
    tolerance: float
    cases: int


@dataclass(frozen=True)
class CylinderReport:
    circumference: float
    height: float
    samples: tuple[CutLocusSample, ...] = field(repr=False)
    checks: tuple[ExperimentCheck, ...]
    evidence: bool

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def verdict(self) -> str:
        if not self.evidence:
            return "no evidence"
        return "pass" if self.passed else "fail"

    def check(self, name: str) -> ExperimentCheck:
        return next(c for c in self.checks if c.name == name)


@dataclass(frozen=True)
class RadialBoundReport:
    ok: bool
    margin: float
    worst_height: float


@dataclass(frozen=True)
class TriangleCase:
    index: int
    p: ModelPoint
    q: ModelPoint
    measured: TriangleMeasurements
    report: ComparisonReport | None
    error: str = ""

    @property
    def passed(self) -> bool:
        return self.report is not None and self.report.passed


@dataclass(frozen=True)
class RigidityReport:
    cases: tuple[TriangleCase, ...] = field(repr=False)
    n_equality: int
    max_angle_residual: float
    max_footgap_residual: float
    inequalities_pass: bool

    @property
    def all_equality(self) -> bool:
        return self.n_equality == len(self.cases)


# --- geodesics on the testbeds --------------------------------------------


def _straight_path(p: ModelPoint, dx: float, dy: float, w: WarpingFunction, n: int = 65) -> GeodesicPath:
    L = math.hypot(dx, dy)
    s = np.linspace(0.0, L, n)
    ux, uy = dx / L, dy / L

    def dense(t):
        t = np.asarray(t, dtype=float)
        return np.array([p.x + ux * t, p.y + uy * t, np.full_like(t, ux), np.full_like(t, uy)])

    x, y, xd, yd = dense(s)
    return GeodesicPath(s, x, y, xd, yd, abs(uy), w, False, dense)


def _cylinder_geodesic(surf: SyntheticSurface, p: ModelPoint, q: ModelPoint) -> SurfaceGeodesic:
    C = surf.topology.circumference
    dx = q.x - p.x
    dy0 = math.remainder(q.y - p.y, C)
    cands = sorted((math.hypot(dx, dy0 + k * C), dy0 + k * C)
                   for k in range(-MAX_WINDING, MAX_WINDING + 1))
    L, dy = cands[0]
    n_min = sum(1 for c, _ in cands if c - L <= TIE_TOL)
    if L == 0.0:
        raise DomainError("endpoints coincide")
    path = _straight_path(p, dx, dy, surf.n)
    ang = math.acos(max(-1.0, min(1.0, dx / L)))
    return SurfaceGeodesic(L, path, math.pi - ang, ang, n_min)


def surface_geodesic_bvp(surf: SyntheticSurface, p: ModelPoint, q: ModelPoint) -> SurfaceGeodesic:
    """Minimal geodesic on the testbed with angles against the downward vertical.

    On a half-plane this reuses the model shooting solver with the testbed
    warping; on the cylinder the universal cover is searched over windings.
    """
    surf.check_point(p)
    surf.check_point(q)
    if surf.is_cylinder:
        return _cylinder_geodesic(surf, p, q)
    res = geodesic_bvp(surf.n, p, q)
    path = res.path
    return SurfaceGeodesic(res.length, path, math.pi - path.start_state().angle,
                           path.end_state().angle, 1 + int(res.multiple_minimizers))


def surface_distance(surf: SyntheticSurface, p: ModelPoint, q: ModelPoint) -> float:
    if p == q:
        return 0.0
    return surface_geodesic_bvp(surf, p, q).length


def extract_triangle(surf: SyntheticSurface, p: ModelPoint, q: ModelPoint) -> TriangleMeasurements:
    """Side lengths, angles and foot gap of the open triangle with vertices ``p``, ``q``."""
    if surf.is_cylinder:
        raise DomainError("extract_triangle works on half-plane testbeds")
    if p.x <= 0 or q.x <= 0:
        raise DomainError("triangle vertices must lie off the boundary")
    g = surface_geodesic_bvp(surf, p, q)
    footgap = surface_distance(surf, ModelPoint(0.0, p.y), ModelPoint(0.0, q.y))
    return TriangleMeasurements(p.x, g.length, q.x, g.angle_p, g.angle_q, footgap)


def subdivide(surf: SyntheticSurface, p: ModelPoint, q: ModelPoint, k: int) -> list[TriangleMeasurements]:
    """Cut the triangle's opposite side into ``k`` equal arcs; one thin triangle per arc.

    Interior vertices carry the measured angles of both neighbouring pieces,
    which sum to ``pi`` because the side is a geodesic.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    g = surface_geodesic_bvp(surf, p, q)
    s = np.linspace(0.0, g.length, k + 1)
    x, y, xd, yd = g.path.at(s)
    vx = np.concatenate([[p.x], x[1:-1], [q.x]])
    out = []
    for i in range(k):
        up_i = math.acos(max(-1.0, min(1.0, xd[i])))
        up_j = math.acos(max(-1.0, min(1.0, xd[i + 1])))
        out.append(TriangleMeasurements(float(vx[i]), float(s[i + 1] - s[i]), float(vx[i + 1]),
                                        math.pi - up_i, up_j))
    return out


# --- curvature checks -----------------------------------------------------


def radial_bound_check(surf: SyntheticSurface, w: WarpingFunction, grid=None) -> RadialBoundReport:
    """Is ``K = -n''/n >= G = -m''/m`` on the grid?  Reports the worst signed margin."""
    if grid is None:
        top = min(surf.n.domain_max, w.domain_max)
        grid = np.linspace(0.0, top, 257)
    grid = np.asarray(grid, dtype=float)
    margin = np.asarray(surf.n.curvature(grid), dtype=float) - np.asarray(w.curvature(grid), dtype=float)
    i = int(np.argmin(margin))
    worst = float(margin[i])
    return RadialBoundReport(bool(worst >= -1e-12), worst, float(grid[i]))


def brioschi_curvature(surf: SyntheticSurface, x, h: float = _FD_H):
    """Gaussian curvature from the metric coefficients by finite differences.

    For ``E = 1, F = 0`` Brioschi's formula reduces to
    ``K = -(1 / (2 sqrt G)) d/dx (G_x / sqrt G)``.
    """
    x = np.asarray(x, dtype=float)

    def Gx_over_sqrtG(t):
        Gp = surf.metric(t + h)[2]
        Gm = surf.metric(t - h)[2]
        return (Gp - Gm) / (2 * h) / np.sqrt(surf.metric(t)[2])

    d = (Gx_over_sqrtG(x + h) - Gx_over_sqrtG(x - h)) / (2 * h)
    return -d / (2 * np.sqrt(surf.metric(x)[2]))


# --- randomized triangles --------------------------------------------------


def random_pairs(surf: SyntheticSurface, n: int, seed: int, *, max_height: float = MAX_RANDOM_HEIGHT,
                 max_dy: float = MAX_RANDOM_DY) -> list[tuple[ModelPoint, ModelPoint]]:
    """Seeded vertex pairs; each pair draws from its own spawned stream."""
    hi = min(0.8 * surf.n.domain_max, max_height)
    lo = min(MIN_RANDOM_HEIGHT, hi / 2)
    out = []
    for child in np.random.SeedSequence(seed).spawn(n):
        rng = np.random.default_rng(child)
        a, c = np.exp(rng.uniform(math.log(lo), math.log(hi), size=2))
        dy = rng.uniform(0.05, max_dy)
        out.append((ModelPoint(float(a), 0.0), ModelPoint(float(c), float(dy))))
    return out


def _compare_case(i, surf, w, p, q, perturb=0.0, sector_width=None) -> TriangleCase:
    measured = extract_triangle(surf, p, q)
    if perturb:
        measured = TriangleMeasurements(measured.a, measured.b, measured.c, measured.angle_p,
                                        measured.angle_q, measured.footgap + perturb)
    try:
        model = solve_comparison_triangle(w, measured)
        report = verify_toponogov(measured, model, sector_width=sector_width)
    except (NonexistenceError, ConnectivityError, DomainError) as exc:
        return TriangleCase(i, p, q, measured, None, f"{type(exc).__name__}: {exc}")
    return TriangleCase(i, p, q, measured, report)


def toponogov_suite(surf: SyntheticSurface, w: WarpingFunction, n_triangles: int, seed: int, *,
                    sector_width: float | None = None, **pair_kw) -> list[TriangleCase]:
    """Compare ``n_triangles`` seeded testbed triangles against the model.

    Refuses to run when the testbed curvature is not bounded below by the
    model curvature.
    """
    bound = radial_bound_check(surf, w)
    if not bound.ok:
        raise OrderingError(f"testbed curvature falls below the model's by {-bound.margin:.3g} "
                            f"at height {bound.worst_height:.3g}")
    pairs = random_pairs(surf, n_triangles, seed, **pair_kw)
    return [_compare_case(i, surf, w, p, q, sector_width=sector_width) for i, (p, q) in enumerate(pairs)]


def rigidity_equality_check(w: WarpingFunction, n_triangles: int, seed: int = 0, *,
                            perturb: float = 0.0, **pair_kw) -> RigidityReport:
    """End-to-end equality case: testbed warping equal to the model warping."""
    surf = SyntheticSurface(w)
    pairs = random_pairs(surf, n_triangles, seed, **pair_kw)
    cases = tuple(_compare_case(i, surf, w, p, q, perturb) for i, (p, q) in enumerate(pairs))
    angle_res, gap_res, n_eq, ok = 0.0, 0.0, 0, True
    for case in cases:
        if case.report is None:
            ok = False
            continue
        tri = case.report.model_triangle
        angle_res = max(angle_res, abs(case.measured.angle_p - tri.angle_p),
                        abs(case.measured.angle_q - tri.angle_q))
        gap_res = max(gap_res, abs(case.measured.footgap - tri.footgap))
        n_eq += case.report.equality_case
        ok &= all(c.passed for c in case.report.checks if c.kind == "inequality")
    return RigidityReport(cases, n_eq, angle_res, gap_res, bool(ok))


# --- the flat cylinder ----------------------------------------------------


def _component_distance(surf: SyntheticSurface, p: ModelPoint, side: int) -> float:
    """Distance from ``p`` to boundary circle ``side`` (0: x = 0, 1: x = height), minimised over feet."""
    C = surf.topology.circumference
    xb = 0.0 if side == 0 else surf.topology.height
    f = lambda y: _cylinder_geodesic(surf, p, ModelPoint(xb, y)).length if (xb != p.x or y != p.y) else 0.0
    res = minimize_scalar(f, bounds=(p.y - C / 2, p.y + C / 2), method="bounded",
                          options={"xatol": 1e-10})
    return float(min(res.fun, f(p.y)))


def _is_cut_point(surf: SyntheticSurface, p: ModelPoint, eps: float = 1e-7) -> bool:
    """Does the minimal segment from the boundary to ``p`` stop minimising just past ``p``?"""
    ell = surf.topology.height
    d1, d2 = p.x, ell - p.x
    if d1 <= d2:
        t, ext = d1, ModelPoint(min(p.x + eps, ell), p.y)
    else:
        t, ext = d2, ModelPoint(max(p.x - eps, 0.0), p.y)
    return surf.boundary_distance(ext) < t + eps - 1e-12


def _phi(surf: SyntheticSurface, t: float, theta: float) -> np.ndarray:
    """Point at distance ``t`` along the inward normal geodesic from ``(0, theta)``."""
    path = integrate_geodesic(surf.n, GeodesicState(ModelPoint(0.0, theta), 0.0), t)
    return np.array([path.x[-1], path.y[-1]])


def cylinder_splitting_experiment(circumference: float, ell: float, n_probes: int, *,
                                  seed: int = 0) -> CylinderReport:
    """Numerical checks of the splitting picture on the flat cylinder of height ``ell``.

    Half the probes sit on the mid-level circle, the rest are uniform.  The
    checks are: cut locus equals the mid-level set, boundary distance at most
    ``ell/2``, right angles for triangles with both vertices on the cut
    locus, constant distance between the two normal segments, and the
    product structure of the normal exponential map.
    """
    if not ell > 0:
        raise DomainError("ell must be positive")
    surf = SyntheticSurface.cylinder(circumference, ell)
    if n_probes <= 0:
        return CylinderReport(circumference, ell, (), (), False)
    rng = np.random.default_rng(seed)
    n_mid = n_probes // 2
    xs = np.concatenate([np.full(n_mid, ell / 2), rng.uniform(0.0, ell, n_probes - n_mid)])
    ys = rng.uniform(0.0, circumference, n_probes)
    samples = []
    for x, y in zip(xs, ys):
        p = ModelPoint(float(x), float(y))
        d = (_component_distance(surf, p, 0), _component_distance(surf, p, 1))
        dmin = min(d)
        n_min = sum(1 for v in d if v - dmin <= DISTANCE_TOL)
        mid = abs(d[0] - d[1]) <= DISTANCE_TOL
        samples.append(CutLocusSample(p, d, n_min, mid, _is_cut_point(surf, p)))

    checks = []
    # (i) cut locus = mid-level set
    worst = max(abs(s.point.x - ell / 2) for s in samples if s.is_cut) if any(s.is_cut for s in samples) else 0.0
    agree = all(s.is_cut == s.is_midpoint and (s.n_minimizers >= 2) == s.is_midpoint for s in samples)
    checks.append(ExperimentCheck("cut_locus_is_midlevel", bool(agree and worst <= DISTANCE_TOL),
                                  worst, DISTANCE_TOL, len(samples)))
    # (ii) d(bd, p) <= ell / 2
    excess = max(min(s.distances_to_components) - ell / 2 for s in samples)
    checks.append(ExperimentCheck("boundary_distance_bound", bool(excess <= DISTANCE_TOL), excess,
                                  DISTANCE_TOL, len(samples)))
    # (iii) right angles on the cut locus, against both boundary circles
    cut = [s.point for s in samples if s.is_cut]
    pairs = list(zip(cut[:-1], cut[1:]))
    ang = 0.0
    for p, q in pairs:
        g = surface_geodesic_bvp(surf, p, q)
        # toward x = ell the downward vertical flips, so angles become pi minus these
        for a in (g.angle_p, g.angle_q, math.pi - g.angle_p, math.pi - g.angle_q):
            ang = max(ang, abs(a - math.pi / 2))
    checks.append(ExperimentCheck("cut_locus_right_angles", bool(ang <= 1e-6), ang, 1e-6, len(pairs)))
    # (iv) t -> d(mu1(t), mu2(t)) is constant
    ts = np.linspace(0.0, ell / 2, 11)
    spread = 0.0
    for p, q in pairs:
        dist = [_cylinder_geodesic(surf, ModelPoint(t, p.y), ModelPoint(t, q.y)).length for t in ts]
        spread = max(spread, max(dist) - min(dist))
    checks.append(ExperimentCheck("foot_distance_constant", bool(spread <= DISTANCE_TOL), spread,
                                  DISTANCE_TOL, len(pairs)))
    # (v) pullback of the metric under the normal exponential map is the product metric
    h = _FD_H
    pull = 0.0
    for s in samples:
        t = min(max(s.point.x, h), ell - h)
        th = s.point.y
        dt = (_phi(surf, t + h, th) - _phi(surf, t - h, th)) / (2 * h)
        dth = (_phi(surf, t, th + h) - _phi(surf, t, th - h)) / (2 * h)
        J = np.column_stack([dt, dth])
        E, _, G = surf.metric(_phi(surf, t, th)[0])
        g = J.T @ np.diag([float(E), float(G)]) @ J
        pull = max(pull, float(np.max(np.abs(g - np.eye(2)))))
    checks.append(ExperimentCheck("product_pullback", bool(pull <= 1e-10), pull, 1e-10, len(samples)))
    return CylinderReport(circumference, ell, tuple(samples), tuple(checks), True)


def make_surface(spec) -> SyntheticSurface:
    """``"cylinder:C:ell"``, ``{"cylinder": {...}}``, or any warping spec for a half-plane."""
    if isinstance(spec, SyntheticSurface):
        return spec
    if isinstance(spec, str) and spec.startswith("cylinder"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise DomainError("cylinder spec is 'cylinder:<circumference>:<height>'")
        return SyntheticSurface.cylinder(float(parts[1]), float(parts[2]))
    if isinstance(spec, dict) and "cylinder" in spec:
        c = spec["cylinder"]
        return SyntheticSurface.cylinder(float(c["circumference"]), float(c["height"]))
    return SyntheticSurface.half_plane(spec)


__all__: Sequence[str] = [
    "Cylinder", "SyntheticSurface", "SurfaceGeodesic", "CutLocusSample", "CylinderReport",
    "ExperimentCheck", "RadialBoundReport", "TriangleCase", "RigidityReport",
    "surface_geodesic_bvp", "surface_distance", "extract_triangle", "subdivide",
    "radial_bound_check", "brioschi_curvature", "random_pairs", "toponogov_suite",
    "rigidity_equality_check", "cylinder_splitting_experiment", "make_surface",
]
