"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every criterion prints one ``ACCEPTANCE <n> PASS|FAIL`` line.
"""
from __future__ import annotations

import csv
import math
import time

import numpy as np
import pytest

import oracles
from opentri.cli import ExperimentConfig, run_experiment
from opentri.model_surface import (GeodesicState, ModelPoint, integrate_geodesic, length_lower_bound,
                                   model_distance, quadrature_length)
from opentri.sturm import (ScalarField, SturmProblem, boundary_identity_residual, constant_curvature,
                           first_zero, index_form_value, solve_scalar_jacobi, splitting_classify)
from opentri.testbed import (SyntheticSurface, cylinder_splitting_experiment, extract_triangle,
                             random_pairs, rigidity_equality_check, subdivide)
from opentri.tolerances import DISTANCE_TOL
from opentri.triangles import (TriangleMeasurements, glue_generalized_triangle,
                               solve_comparison_triangle, verify_toponogov)
from opentri.warping import WarpingFunction, const, cos_truncated, cosh, exp_decay

SEED = 7


@pytest.fixture
def announce(capsys):
    def _announce(n: int, ok: bool, elapsed: float, budget: float | None, detail: str) -> None:
        within = budget is None or elapsed <= budget
        status = "PASS" if ok and within else "FAIL"
        limit = f" (budget {budget:g} s)" if budget is not None else ""
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {status}: {detail}; {elapsed:.2f} s{limit}")
        assert ok, detail
        assert within, f"runtime {elapsed:.2f} s exceeds {budget} s"
    return _announce


def _pairs(n, rng):
    out = []
    for _ in range(n):
        x1, x2 = rng.uniform(0.0, 3.0, 2)
        dy = rng.uniform(-3.0, 3.0)
        out.append((float(x1), float(x2), float(dy)))
    return out


def test_1_geodesic_oracle_agreement(announce):
    rng = np.random.default_rng(SEED)
    cases = [(const(), oracles.flat_distance, p) for p in _pairs(100, rng)]
    cases += [(cosh(), oracles.fermi_distance, p) for p in _pairs(100, rng)]
    t0 = time.perf_counter()
    worst = 0.0
    for w, oracle, (x1, x2, dy) in cases:
        d, _ = model_distance(w, ModelPoint(x1, 0.0), ModelPoint(x2, dy))
        worst = max(worst, abs(d - oracle(x1, 0.0, x2, dy)))
    elapsed = time.perf_counter() - t0
    announce(1, worst <= 1e-7, elapsed, 10.0, f"max oracle error {worst:.2e} over 2 x 100 pairs")


def test_2_conservation(announce):
    rng = np.random.default_rng(SEED)
    models = [const(), cosh(), exp_decay()]
    t0 = time.perf_counter()
    worst_speed = worst_nu = 0.0
    turning = 0
    for i in range(100):
        w = models[i % 3]
        x0 = float(rng.uniform(0.05, 3.0))
        theta = float(rng.uniform(0.0, math.pi))
        length = float(rng.uniform(1.0, 20.0))
        path = integrate_geodesic(w, GeodesicState(ModelPoint(x0, 0.0), theta, int(rng.choice([1, -1]))), length)
        worst_speed = max(worst_speed, float(np.max(np.abs(path.unit_speed_residual()))))
        worst_nu = max(worst_nu, float(np.max(np.abs(path.clairaut_residual()))))
        turning += bool(np.any(np.diff(np.sign(path.xdot)) != 0))
    elapsed = time.perf_counter() - t0
    ok = worst_speed <= 1e-8 and worst_nu <= 1e-8 and turning > 0
    announce(2, ok, elapsed, 10.0, f"unit-speed {worst_speed:.1e}, Clairaut {worst_nu:.1e}, "
                                   f"{turning} paths through turning points")


def test_3_length_lower_bound(announce):
    rng = np.random.default_rng(SEED)
    models = [const(), cosh(), exp_decay(), cos_truncated()]
    tuples = []
    for i in range(500):
        w = models[i % 4]
        top = min(w.domain_max, 3.0)
        t1, t2 = sorted(rng.uniform(0.0, top, 2))
        if i % 5 == 0:
            nu = 0.0
        else:
            nu = float(rng.uniform(0.0, 0.999)) * float(np.min(w.m(np.linspace(t1, t2, 257))))
        tuples.append((w, nu, float(t1), float(t2)))
    t0 = time.perf_counter()
    violations, gap0 = 0, 0.0
    for w, nu, t1, t2 in tuples:
        lb, q = length_lower_bound(w, nu, t1, t2), quadrature_length(w, nu, t1, t2)
        violations += lb > q + 1e-9
        if nu == 0.0:
            gap0 = max(gap0, q - lb)
    elapsed = time.perf_counter() - t0
    announce(3, violations == 0 and gap0 <= 1e-6, elapsed, 5.0,
             f"{violations} violations in 500 tuples, nu = 0 gap {gap0:.1e}")


def test_4_sturm(announce):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    zero = constant_curvature(0.0)
    zero_err = 0.0
    for lam in (0.1, 0.5, 2.0):
        f = solve_scalar_jacobi(SturmProblem.boundary(zero, lam, 2.0 / lam))
        zero_err = max(zero_err, abs(first_zero(f) - 1.0 / lam))
    ident = 0.0
    for _ in range(100):
        k0, k1 = rng.uniform(-1.0, 1.0, 2)
        om, lam, ell = rng.uniform(0.5, 4.0), rng.uniform(0.0, 2.0), rng.uniform(0.5, 3.0)
        K = lambda t, k0=k0, k1=k1, om=om: k0 + k1 * math.sin(om * t)
        f = solve_scalar_jacobi(SturmProblem.boundary(K, float(lam), 3.0))
        ident = max(ident, abs(boundary_identity_residual(K, f, float(ell))))
    f = ScalarField.from_functions(lambda t: 1 - t / 2, lambda t: -0.5 + 0 * t, 2.0)
    _, cancel = index_form_value(zero, f, 0.5, first_zero(f))
    elapsed = time.perf_counter() - t0
    ok = zero_err <= 1e-8 and ident <= 1e-6 and abs(cancel) <= 1e-8
    announce(4, ok, elapsed, 5.0, f"first-zero error {zero_err:.1e}, identity residual {ident:.1e}, "
                                  f"cancellation {cancel:.1e}")


@pytest.fixture(scope="module")
def toponogov_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("toponogov")
    cfg = ExperimentConfig.from_mapping({"suite": "toponogov", "testbed": "const", "model": "cosh",
                                         "seed": SEED, "cases": 200, "output_dir": str(out)})
    t0 = time.perf_counter()
    (summary,) = run_experiment(cfg)
    return out, summary, time.perf_counter() - t0


def test_5_toponogov(announce, toponogov_run):
    out, summary, elapsed = toponogov_run
    with open(out / "toponogov_cases.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    residuals = [float(r["residual"]) for r in rows]
    ok = len(rows) == 200 and summary.passes == 200 and min(residuals) >= -1e-6
    announce(5, ok, elapsed, 60.0, f"{summary.passes}/{len(rows)} triangles pass, "
                                   f"worst residual {min(residuals):.2e}")


def test_6_rigidity(announce):
    t0 = time.perf_counter()
    reps = [rigidity_equality_check(w, 50, seed=SEED) for w in (const(), cosh())]
    elapsed = time.perf_counter() - t0
    ok = all(r.all_equality and r.max_angle_residual <= 1e-5 and r.inequalities_pass for r in reps)
    detail = ", ".join(f"{name}: {r.n_equality}/50 equality, angle residual {r.max_angle_residual:.1e}"
                       for name, r in zip(("flat", "cosh"), reps))
    announce(6, ok, elapsed, 30.0, detail)


def test_7_gluing(announce):
    testbed, w = SyntheticSurface.half_plane("const"), cosh()
    t0 = time.perf_counter()
    worst_hinge, worst_slack, angle_ok = -math.inf, math.inf, True
    for p, q in random_pairs(testbed, 50, SEED):
        measured = extract_triangle(testbed, p, q)
        got = glue_generalized_triangle(w, subdivide(testbed, p, q, 3))
        worst_hinge = max(worst_hinge, *got.hinge_angles)
        slacks = {**got.chain_slacks(), "arc<=b": measured.b - got.arc_length}
        worst_slack = min(worst_slack, *slacks.values())
        angle_ok &= verify_toponogov(measured, got).passed
    t = TriangleMeasurements(0.9, 1.3, 1.4)
    single = glue_generalized_triangle(w, [t])
    direct = solve_comparison_triangle(w, t)
    exact = (single.angle_p == direct.angle_p and single.angle_q == direct.angle_q
             and np.array_equal(single.shortest_arc.x, direct.opposite_side.x)
             and np.array_equal(single.shortest_arc.y, direct.opposite_side.y))
    elapsed = time.perf_counter() - t0
    ok = worst_hinge <= math.pi + 1e-6 and worst_slack >= -DISTANCE_TOL and angle_ok and exact
    announce(7, ok, elapsed, 60.0, f"max hinge - pi {worst_hinge - math.pi:.2e}, min chain slack "
                                   f"{worst_slack:.2e}, single piece exact: {exact}")


def test_8_splitting(announce):
    untagged = WarpingFunction(m=lambda t: np.sqrt(1.0 + np.asarray(t) ** 2),
                               dm=lambda t: np.asarray(t) / np.sqrt(1.0 + np.asarray(t) ** 2),
                               d2m=lambda t: (1.0 + np.asarray(t) ** 2) ** -1.5, domain_max=50.0)
    t0 = time.perf_counter()
    got = {
        "flat": splitting_classify(const()).verdict,
        "exp": splitting_classify(lambda t: np.exp(-np.asarray(t)), domain_max=50.0,
                                  tail="decays-to-zero").verdict,
        "cosh": splitting_classify(cosh()).verdict,
        "untagged": splitting_classify(untagged).verdict,
    }
    elapsed = time.perf_counter() - t0
    want = {"flat": "ST1", "exp": "ST2", "cosh": "none", "untagged": "undetermined"}
    announce(8, got == want, elapsed, 1.0, f"verdicts {got}")


def test_9_cylinder(announce):
    t0 = time.perf_counter()
    rep = cylinder_splitting_experiment(2 * math.pi, 2.0, 100, seed=SEED)
    elapsed = time.perf_counter() - t0
    detail = ", ".join(f"{c.name} {c.worst_residual:.1e}" for c in rep.checks)
    announce(9, rep.verdict == "pass", elapsed, 30.0, detail)


def test_10_determinism(announce, toponogov_run, tmp_path):
    first, _, _ = toponogov_run
    cfg = ExperimentConfig.from_mapping({"suite": "toponogov", "testbed": "const", "model": "cosh",
                                         "seed": SEED, "cases": 200, "output_dir": str(tmp_path)})
    t0 = time.perf_counter()
    run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    same = all((first / n).read_bytes() == (tmp_path / n).read_bytes()
               for n in ("toponogov_cases.csv", "toponogov_traces.csv"))
    announce(10, same, elapsed, None, "repeated toponogov run gives byte-identical CSV bodies"
             if same else "CSV bodies differ between runs")
