from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from opentri.errors import DomainError, OrderingError
from opentri.model_surface import ModelPoint
from opentri.testbed import (CutLocusSample, SyntheticSurface, brioschi_curvature,
                             cylinder_splitting_experiment, extract_triangle, make_surface,
                             radial_bound_check, random_pairs, rigidity_equality_check, subdivide,
                             surface_geodesic_bvp, toponogov_suite)
from opentri.warping import const, cosh

FLAT = SyntheticSurface.half_plane("const")
HYP = SyntheticSurface.half_plane("cosh")


class TestGeodesics:
    def test_flat_horizontal(self):
        g = surface_geodesic_bvp(FLAT, ModelPoint(1.0, 0.0), ModelPoint(1.0, 2.0))
        assert g.length == pytest.approx(2.0, abs=1e-10)
        assert np.max(np.abs(g.path.x - 1.0)) <= 1e-9

    def test_cylinder_tie(self):
        cyl = SyntheticSurface.cylinder(2 * math.pi, 2.0)
        g = surface_geodesic_bvp(cyl, ModelPoint(1.0, 0.0), ModelPoint(1.0, math.pi))
        assert g.length == pytest.approx(math.pi, abs=1e-12)
        assert g.n_minimizers == 2

    def test_cylinder_winding(self):
        cyl = SyntheticSurface.cylinder(2 * math.pi, 2.0)
        g = surface_geodesic_bvp(cyl, ModelPoint(0.5, 0.1), ModelPoint(1.5, 2 * math.pi - 0.1))
        assert g.length == pytest.approx(math.hypot(1.0, 0.2), abs=1e-12)
        assert g.n_minimizers == 1

    def test_cosh_fermi(self):
        g = surface_geodesic_bvp(HYP, ModelPoint(1.0, 0.0), ModelPoint(1.0, 1.0))
        assert g.length == pytest.approx(oracles.FERMI_1_0__1_1, abs=1e-9)

    def test_outside_surface(self):
        cyl = SyntheticSurface.cylinder(2 * math.pi, 2.0)
        with pytest.raises(DomainError):
            surface_geodesic_bvp(cyl, ModelPoint(2.5, 0.0), ModelPoint(1.0, 0.0))

    def test_cylinder_must_be_flat(self):
        from opentri.testbed import Cylinder
        with pytest.raises(DomainError):
            SyntheticSurface(cosh(), Cylinder(1.0, 1.0))


class TestExtract:
    def test_flat_right(self):
        t = extract_triangle(FLAT, ModelPoint(1.0, 0.0), ModelPoint(1.0, 2.0))
        assert (t.a, t.b, t.c) == pytest.approx((1.0, 2.0, 1.0), abs=1e-9)
        assert (t.angle_p, t.angle_q, t.footgap) == pytest.approx((math.pi / 2, math.pi / 2, 2.0), abs=1e-9)

    def test_flat_oblique(self):
        t = extract_triangle(FLAT, ModelPoint(1.0, 0.0), ModelPoint(2.0, 1.0))
        assert (t.a, t.b, t.c) == pytest.approx((1.0, math.sqrt(2), 2.0), abs=1e-9)
        assert (t.angle_p, t.angle_q, t.footgap) == pytest.approx((3 * math.pi / 4, math.pi / 4, 1.0), abs=1e-9)

    def test_cosh_symmetric(self):
        t = extract_triangle(HYP, ModelPoint(0.7, 0.0), ModelPoint(0.7, 1.9))
        assert t.angle_p == pytest.approx(t.angle_q, abs=1e-8)

    def test_subdivide_supplementary(self):
        pieces = subdivide(HYP, ModelPoint(0.5, 0.0), ModelPoint(1.5, 2.0), 4)
        assert len(pieces) == 4
        for left, right in zip(pieces[:-1], pieces[1:]):
            assert left.c == right.a
            assert left.angle_q + right.angle_p == pytest.approx(math.pi, abs=1e-12)
        assert sum(p.b for p in pieces) == pytest.approx(
            surface_geodesic_bvp(HYP, ModelPoint(0.5, 0.0), ModelPoint(1.5, 2.0)).length, abs=1e-12)


class TestCurvature:
    def test_radial_bound(self):
        assert radial_bound_check(FLAT, cosh()).margin == pytest.approx(1.0)
        assert radial_bound_check(FLAT, cosh()).ok
        r = radial_bound_check(HYP, cosh())
        assert r.ok and r.margin == pytest.approx(0.0, abs=1e-12)
        r = radial_bound_check(HYP, const())
        assert not r.ok and r.margin == pytest.approx(-1.0)

    @pytest.mark.parametrize("spec", ["const", "cosh", "exp-decay", "cos-truncated"])
    def test_brioschi_matches_warping(self, spec):
        s = SyntheticSurface.half_plane(spec)
        x = np.linspace(0.05, min(3.0, s.n.domain_max - 0.05), 40)
        K = np.asarray(s.n.curvature(x), dtype=float)
        fd = brioschi_curvature(s, x)
        assert np.all(np.abs(fd - K) <= 1e-4 * np.maximum(1.0, np.abs(K)))


class TestCylinder:
    def test_full_experiment(self):
        rep = cylinder_splitting_experiment(2 * math.pi, 2.0, 100)
        assert rep.verdict == "pass"
        mids = [s for s in rep.samples if s.is_midpoint]
        assert all(s.n_minimizers >= 2 for s in mids)
        assert all(not s.is_midpoint for s in rep.samples if abs(s.point.x - 1.0) > 1e-8)

    def test_no_probes(self):
        rep = cylinder_splitting_experiment(2 * math.pi, 2.0, 0)
        assert rep.verdict == "no evidence" and rep.samples == ()

    def test_off_midlevel_sample(self):
        s = CutLocusSample(ModelPoint(0.5, 0.0), (0.5, 1.5), 1, False)
        assert min(s.distances_to_components) <= 1.0
        with pytest.raises(ValueError):
            CutLocusSample(ModelPoint(0.5, 0.0), (0.5, 1.5), 1, True)

    def test_bad_height(self):
        with pytest.raises(DomainError):
            cylinder_splitting_experiment(1.0, 0.0, 3)


class TestSuites:
    def test_random_pairs_deterministic(self):
        assert random_pairs(FLAT, 5, 3) == random_pairs(FLAT, 5, 3)
        assert random_pairs(FLAT, 5, 3) != random_pairs(FLAT, 5, 4)
        # prefix property from per-case streams
        assert random_pairs(FLAT, 8, 3)[:5] == random_pairs(FLAT, 5, 3)

    def test_ordering_refused(self):
        with pytest.raises(OrderingError):
            toponogov_suite(HYP, const(), 5, 0)

    def test_small_suite(self):
        cases = toponogov_suite(FLAT, cosh(), 10, 1)
        assert all(c.passed for c in cases)

    def test_rigidity_flat(self):
        rep = rigidity_equality_check(const(), 10, seed=2)
        assert rep.all_equality and rep.max_angle_residual <= 1e-5

    def test_rigidity_perturbed(self):
        rep = rigidity_equality_check(cosh(), 5, seed=2, perturb=1e-2)
        assert rep.n_equality == 0 and rep.inequalities_pass

    def test_make_surface(self):
        assert make_surface("cylinder:6.0:2.0").is_cylinder
        assert make_surface({"cylinder": {"circumference": 3, "height": 1}}).topology.height == 1.0
        assert make_surface("cosh").n.name == "cosh"
