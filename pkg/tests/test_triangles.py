from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from opentri.errors import ConvexityViolation, DomainError, NonexistenceError
from opentri.model_surface import GeodesicState, ModelPoint, integrate_geodesic, model_distance
from opentri.triangles import (DomainScaffold, TriangleMeasurements, choose_subdivision,
                               glue_generalized_triangle, shortest_arc_in_domain,
                               solve_comparison_triangle, validate_thinness, verify_toponogov)


class TestMeasurements:
    def test_feasibility(self):
        with pytest.raises(DomainError):
            TriangleMeasurements(1.0, 0.5, 2.0)
        with pytest.raises(DomainError):
            TriangleMeasurements(0.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            TriangleMeasurements(1.0, 0.0, 1.0)


class TestSolve:
    def test_flat_right_angles(self, flat):
        tri = solve_comparison_triangle(flat, TriangleMeasurements(1.0, 2.0, 1.0))
        assert tri.footgap == pytest.approx(2.0, abs=1e-8)
        assert tri.angle_p == pytest.approx(math.pi / 2, abs=1e-9)
        assert tri.angle_q == pytest.approx(math.pi / 2, abs=1e-9)

    def test_flat_oblique(self, flat):
        t = TriangleMeasurements(1.0, math.sqrt(2), 2.0)
        tri = solve_comparison_triangle(flat, t)
        ap, aq, gap = oracles.planar_open_triangle(1.0, math.sqrt(2), 2.0)
        assert (tri.angle_p, tri.angle_q) == pytest.approx((3 * math.pi / 4, math.pi / 4), abs=1e-9)
        assert (tri.angle_p, tri.angle_q, tri.footgap) == pytest.approx((ap, aq, gap), abs=1e-9)

    def test_cosh_symmetric(self, hyp):
        tri = solve_comparison_triangle(hyp, TriangleMeasurements(1.0, 2.0, 1.0))
        assert tri.angle_p == pytest.approx(tri.angle_q, abs=1e-8)
        assert tri.angle_p < math.pi / 2
        # the model side realises the requested length between the vertices
        assert oracles.fermi_distance(tri.p.x, tri.p.y, tri.q.x, tri.q.y) == pytest.approx(2.0, abs=1e-8)
        assert tri.footgap == pytest.approx(tri.q.y, abs=1e-8)

    def test_side_fidelity(self, hyp):
        t = TriangleMeasurements(0.4, 1.7, 1.3)
        tri = solve_comparison_triangle(hyp, t)
        assert tri.p.x == t.a
        assert tri.q.x == pytest.approx(t.c, abs=1e-8)
        assert tri.opposite_side.total_length == pytest.approx(t.b, abs=1e-12)
        assert np.min(tri.opposite_side.x) > 0
        assert 0 < tri.angle_p < math.pi and 0 < tri.angle_q < math.pi

    def test_nonexistence(self, sphere_band):
        # a side of length 4 cannot join heights 0.2 and 1.45 inside the band
        with pytest.raises(NonexistenceError):
            solve_comparison_triangle(sphere_band, TriangleMeasurements(0.2, 4.0, 1.45))

    def test_translation(self, hyp):
        tri = solve_comparison_triangle(hyp, TriangleMeasurements(1.0, 1.0, 1.2))
        moved = tri.translated(3.0)
        assert moved.q.y == pytest.approx(tri.q.y + 3.0)
        assert moved.feet == (3.0, tri.feet[1] + 3.0)


class TestThinness:
    def test_flat_always_thin(self, flat):
        rep = validate_thinness(flat, TriangleMeasurements(1.0, 40.0, 2.0))
        assert rep.thin and math.isinf(rep.bound)

    def test_band_not_thin(self, sphere_band):
        rep = validate_thinness(sphere_band, TriangleMeasurements(0.5, 3.5, 0.5), heights=[0.5, 0.7])
        assert not rep.thin and rep.margin < 0
        assert rep.bound == pytest.approx(math.pi)

    def test_custom_probe(self, hyp):
        rep = validate_thinness(hyp, TriangleMeasurements(1.0, 1.0, 1.0), lambda h: 0.5 + h, heights=[1.0, 2.0])
        assert rep.thin and rep.margin == pytest.approx(0.5)

    def test_subdivision(self, sphere_band, flat):
        assert choose_subdivision(flat, TriangleMeasurements(1.0, 5.0, 1.0)) == 1
        k = choose_subdivision(sphere_band, TriangleMeasurements(0.5, 3.5, 0.5))
        assert 3.5 / k < 0.5 * math.pi


class TestGluing:
    def test_flat_two_pieces(self, flat):
        chain = [TriangleMeasurements(1.0, 1.0, 1.5), TriangleMeasurements(1.5, 1.0, 1.0)]
        got = glue_generalized_triangle(flat, chain)
        assert all(h <= math.pi + 1e-6 for h in got.hinge_angles)
        y = 2 * math.sqrt(1 - 0.25)
        assert (got.vertex_q.x, got.vertex_q.y) == pytest.approx((1.0, y), abs=1e-8)
        assert got.arc_length == pytest.approx(y, abs=1e-8)
        assert got.arc_length <= 2.0
        assert got.shortest_arc.start.x == pytest.approx(1.0, abs=1e-8)
        assert np.max(np.abs(got.shortest_arc.x - 1.0)) <= 1e-8

    def test_single_piece_is_the_comparison_triangle(self, hyp):
        t = TriangleMeasurements(0.8, 1.2, 1.1)
        tri = solve_comparison_triangle(hyp, t)
        got = glue_generalized_triangle(hyp, [t])
        assert got.shortest_arc is got.pieces[0].opposite_side
        assert got.angle_p == tri.angle_p and got.angle_q == tri.angle_q
        assert got.hinge_angles == ()

    def test_cosh_three_pieces_chain(self, hyp):
        chain = [TriangleMeasurements(1.0, 0.6, 1.3), TriangleMeasurements(1.3, 0.6, 1.5),
                 TriangleMeasurements(1.5, 0.5, 1.4)]
        got = glue_generalized_triangle(hyp, chain)
        slack = got.chain_slacks()
        assert all(v >= -1e-8 for v in slack.values())
        assert slack["arc<=broken_side"] > 0
        d, _ = model_distance(hyp, got.vertex_p, got.vertex_q)
        assert got.arc_length == pytest.approx(d, abs=1e-8)

    def test_heights_must_match(self, flat):
        with pytest.raises(ValueError):
            glue_generalized_triangle(flat, [TriangleMeasurements(1.0, 1.0, 1.5),
                                             TriangleMeasurements(1.4, 1.0, 1.0)])

    def test_reflex_hinge_rejected(self, hyp):
        # two pieces bending toward the boundary: angle sum at the shared vertex exceeds pi
        chain = [TriangleMeasurements(1.5, 1.0, 1.0), TriangleMeasurements(1.0, 1.0, 1.5)]
        with pytest.raises(ConvexityViolation):
            glue_generalized_triangle(hyp, chain)


class TestShortening:
    def test_single_geodesic_unchanged(self, hyp):
        path = integrate_geodesic(hyp, GeodesicState(ModelPoint(1.0, 0.0), 1.2), 1.5)
        arc = shortest_arc_in_domain(hyp, DomainScaffold.from_pieces([path]))
        assert arc is path

    def test_flat_polyline_to_chord(self, flat):
        a = integrate_geodesic(flat, GeodesicState(ModelPoint(1.0, 0.0), math.pi / 4), 1.0)
        b = integrate_geodesic(flat, GeodesicState(a.end, 3 * math.pi / 4), 1.0)
        arc = shortest_arc_in_domain(flat, DomainScaffold.from_pieces([a, b]))
        assert arc.total_length == pytest.approx(math.sqrt(2), abs=1e-9)
        assert np.max(np.abs(arc.x - 1.0)) <= 1e-9


class TestVerify:
    def test_equality_case(self, flat):
        ap, aq, gap = oracles.planar_open_triangle(1.0, 1.5, 1.8)
        m = TriangleMeasurements(1.0, 1.5, 1.8, ap, aq, gap)
        rep = verify_toponogov(m, solve_comparison_triangle(flat, m))
        assert rep.equality_case and rep.passed
        assert all(abs(c.residual) <= 1e-6 for c in rep.checks)

    def test_flat_vs_hyperbolic(self, hyp):
        m = TriangleMeasurements(1.0, 2.0, 1.0, math.pi / 2, math.pi / 2, 2.0)
        rep = verify_toponogov(m, solve_comparison_triangle(hyp, m))
        assert rep.passed and not rep.equality_case
        assert rep.check("angle_p").residual > 0

    def test_violation_reported(self, hyp):
        m = TriangleMeasurements(1.0, 2.0, 1.0, 0.3, math.pi / 2, 2.0)
        rep = verify_toponogov(m, solve_comparison_triangle(hyp, m))
        assert not rep.passed
        c = rep.check("angle_p")
        assert c.residual < 0 and not c.passed
        rows = rep.rows()
        assert {"name", "lhs", "rhs", "residual", "pass"} <= set(rows[0])

    def test_sector_bound(self, flat):
        m = TriangleMeasurements(1.0, 2.0, 1.0, math.pi / 2, math.pi / 2, 2.0)
        with pytest.raises(DomainError):
            verify_toponogov(m, solve_comparison_triangle(flat, m), sector_width=1.5)

    def test_needs_angles(self, flat):
        m = TriangleMeasurements(1.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            verify_toponogov(m, solve_comparison_triangle(flat, m))
