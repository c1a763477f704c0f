"""Batch runner: ``opentri run | plot-data | list-models``.

Each suite writes ``<suite>_cases.csv`` (one row per case, with ``case_id``,
``residual`` and ``pass`` columns) and ``<suite>_traces.csv`` (geodesic
samples ``case_id, s, x, y, nu_residual``).  Timestamps live only in
``summary.json`` so CSV bodies are reproducible byte for byte.

Exit status: 0 when every case passes, 1 on failures, 2 on configuration or
file errors, 3 when a suite precondition (curvature ordering) fails.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, OpenTriError, OrderingError
from .model_surface import GeodesicPath, ModelPoint, model_distance
from .oracles import ORACLES
from .sturm import (constant_curvature, curvature_of, first_zero, first_zero_oracle,
                    solve_scalar_jacobi, splitting_classify, sturm_compare, SturmProblem)
from .testbed import (cylinder_splitting_experiment, extract_triangle, make_surface, random_pairs,
                      rigidity_equality_check, subdivide, toponogov_suite)
from .tolerances import DEFAULT, Tolerances
from .triangles import glue_generalized_triangle, verify_toponogov
from .warping import WarpingFunction, list_models, make_warping

log = logging.getLogger(__name__)

SUITES = ("geodesic-oracle", "toponogov", "gluing", "sturm", "splitting", "cylinder", "rigidity")
RANDOMIZED = {"geodesic-oracle", "toponogov", "gluing", "cylinder", "rigidity"}
OUT_ENV = "OPENTRI_OUT"
TRACE_COLUMNS = ["case_id", "s", "x", "y", "nu_residual"]
_TRACE_SAMPLES = 33
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_PRECONDITION = 0, 1, 2, 3


@dataclass(frozen=True)
class ExperimentConfig:
    model: Any = "cosh"
    testbed: Any = "const"
    suites: tuple[str, ...] = ("toponogov",)
    seed: int | None = None
    tolerances: Tolerances = DEFAULT
    output_dir: Path = Path("opentri-out")
    cases: int | None = None
    params: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, data: dict, **overrides) -> "ExperimentConfig":
        data = {**data, **{k: v for k, v in overrides.items() if v is not None}}
        errors = []
        known = {"model", "testbed", "suite", "suites", "seed", "tolerances", "output_dir", "cases",
                 "params"}
        for key in sorted(set(data) - known):
            errors.append(f"{key}: unknown field")
        suites = data.get("suites", data.get("suite", ("toponogov",)))
        suites = (suites,) if isinstance(suites, str) else tuple(suites)
        for s in suites:
            if s not in SUITES:
                errors.append(f"suite: unknown suite {s!r} (choose from {', '.join(SUITES)})")
        if not suites:
            errors.append("suite: at least one suite is required")
        seed = data.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            errors.append(f"seed: expected an integer, got {seed!r}")
        if seed is None and any(s in RANDOMIZED for s in suites):
            errors.append("seed: required for randomized suites")
        try:
            tol = DEFAULT.override(data.get("tolerances", {}))
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"tolerances: {exc}")
            tol = DEFAULT
        cases = data.get("cases")
        if cases is not None and (not isinstance(cases, int) or cases < 0):
            errors.append(f"cases: expected a non-negative integer, got {cases!r}")
        for key in ("model", "testbed"):
            if key in data:
                try:
                    (make_warping if key == "model" else make_surface)(data[key])
                except (OpenTriError, ValueError, TypeError) as exc:
                    errors.append(f"{key}: {exc}")
        if errors:
            raise ConfigError("; ".join(errors))
        return cls(data.get("model", "cosh"), data.get("testbed", "const"), suites, seed, tol,
                   Path(data.get("output_dir") or os.environ.get(OUT_ENV, "opentri-out")), cases,
                   dict(data.get("params", {})))


@dataclass
class SuiteSummary:
    suite: str
    cases: int
    passes: int
    worst_residual: float
    runtime: float
    residual_kind: str = "min signed slack"
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.passes > self.cases:
            raise ValueError("passes cannot exceed cases")

    @property
    def ok(self) -> bool:
        return self.passes == self.cases


@dataclass
class _SuiteOutput:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    traces: list[list] = field(default_factory=list)
    residual_kind: str = "min signed slack"
    details: dict = field(default_factory=dict)

    def add_trace(self, case_id: int, path: GeodesicPath) -> None:
        s = np.linspace(0.0, path.total_length, _TRACE_SAMPLES)
        x, y, xd, yd = path.at(s)
        m = np.asarray(path.warping.m(x), dtype=float)
        res = m * m * np.abs(yd) - path.clairaut if math.isfinite(path.clairaut) else np.zeros_like(s)
        for row in zip(s, x, y, res):
            self.traces.append([case_id, *row])


# --- CSV helpers ----------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return "" if v is None else str(v)


def _write_csv(path: Path, columns: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(columns)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])


# --- suites ---------------------------------------------------------------


def _n(cfg: ExperimentConfig, default: int) -> int:
    return default if cfg.cases is None else cfg.cases


def _suite_geodesic_oracle(cfg: ExperimentConfig) -> _SuiteOutput:
    w = make_warping(cfg.model)
    if w.name not in ORACLES:
        raise ConfigError(f"model: no closed-form distance for {w.name!r} (use const or cosh)")
    oracle = ORACLES[w.name]
    tol = cfg.tolerances.distance
    out = _SuiteOutput(["case_id", "px", "py", "qx", "qy", "length", "oracle", "residual", "pass"],
                       residual_kind="max abs error")
    pairs = [(ModelPoint(0.0, 0.0), ModelPoint(0.0, 1.0))]
    pairs += random_pairs(make_surface(w), _n(cfg, 100), cfg.seed,
                          max_dy=cfg.params.get("max_dy", 3.0))
    for i, (p, q) in enumerate(pairs):
        length, path = model_distance(w, p, q)
        err = abs(length - oracle(p, q))
        out.rows.append([i, p.x, p.y, q.x, q.y, length, oracle(p, q), err, err <= tol])
        out.add_trace(i, path)
    return out


def _triangle_columns():
    return ["case_id", "a", "b", "c", "angle_p", "angle_q", "footgap", "model_angle_p",
            "model_angle_q", "model_footgap", "equality_case", "residual", "pass", "error"]


def _case_row(case) -> list:
    m = case.measured
    if case.report is None:
        return [case.index, m.a, m.b, m.c, m.angle_p, m.angle_q, m.footgap, None, None, None,
                False, -math.inf, False, case.error]
    tri = case.report.model_triangle
    return [case.index, m.a, m.b, m.c, m.angle_p, m.angle_q, m.footgap, tri.angle_p, tri.angle_q,
            tri.footgap, case.report.equality_case, case.report.worst_residual, case.passed, ""]


def _suite_toponogov(cfg: ExperimentConfig) -> _SuiteOutput:
    surf, w = make_surface(cfg.testbed), make_warping(cfg.model)
    cases = toponogov_suite(surf, w, _n(cfg, 200), cfg.seed,
                            sector_width=cfg.params.get("sector_width"))
    out = _SuiteOutput(_triangle_columns())
    for case in cases:
        out.rows.append(_case_row(case))
        if case.report is not None:
            out.add_trace(case.index, case.report.model_triangle.opposite_side)
    return out


def _suite_gluing(cfg: ExperimentConfig) -> _SuiteOutput:
    surf, w = make_surface(cfg.testbed), make_warping(cfg.model)
    k = int(cfg.params.get("pieces", 3))
    out = _SuiteOutput(["case_id", "a", "b", "c", "pieces", "max_hinge", "chord", "arc_length",
                        "broken_length", "angle_p", "got_angle_p", "angle_q", "got_angle_q",
                        "residual", "pass", "error"])
    tol = cfg.tolerances.distance
    for i, (p, q) in enumerate(random_pairs(surf, _n(cfg, 50), cfg.seed)):
        m = extract_triangle(surf, p, q)
        try:
            got = glue_generalized_triangle(w, subdivide(surf, p, q, k))
        except OpenTriError as exc:
            out.rows.append([i, m.a, m.b, m.c, k, None, None, None, None, m.angle_p, None,
                             m.angle_q, None, -math.inf, False, f"{type(exc).__name__}: {exc}"])
            continue
        rep = verify_toponogov(m, got)
        hinge = max(got.hinge_angles, default=0.0)
        res = min(rep.worst_residual, math.pi - hinge)
        ok = rep.passed and hinge <= math.pi + cfg.tolerances.inequality and \
            min(got.chain_slacks().values()) >= -tol
        out.rows.append([i, m.a, m.b, m.c, k, hinge, got.chord, got.arc_length, got.broken_length,
                         m.angle_p, got.angle_p, m.angle_q, got.angle_q, res, ok, ""])
        out.add_trace(i, got.shortest_arc)
    return out


def _suite_sturm(cfg: ExperimentConfig) -> _SuiteOutput:
    out = _SuiteOutput(["case_id", "name", "value", "expected", "residual", "pass"],
                       residual_kind="max abs error")
    tol = cfg.tolerances.distance
    zero = constant_curvature(0.0)
    lams = cfg.params.get("lambdas", [0.1, 0.5, 2.0])
    for i, lam in enumerate(lams):
        f = solve_scalar_jacobi(SturmProblem.boundary(zero, lam, 2.0 / lam))
        t0 = first_zero(f)
        err = abs(t0 - first_zero_oracle(lam)) if t0 is not None else math.inf
        out.rows.append([i, f"first_zero(lam={lam:g})", t0, first_zero_oracle(lam), err, err <= tol])
    surf, w = make_surface(cfg.testbed), make_warping(cfg.model)
    horizon = min(float(cfg.params.get("horizon", 10.0)), w.domain_max, surf.n.domain_max)
    try:
        diag = sturm_compare(curvature_of(surf.n), curvature_of(w), float(cfg.params.get("lam", 0.0)),
                             horizon, tail=w.tail)
    except OrderingError:
        raise
    ok = diag.status != "deviation-detected"
    out.rows.append([len(lams), f"sturm_compare:{diag.status}", diag.max_k_minus_g, 0.0,
                     diag.max_f_minus_m if diag.k_equals_g else 0.0, ok])
    out.details["sturm_status"] = diag.status
    return out


def _suite_splitting(cfg: ExperimentConfig) -> _SuiteOutput:
    w = make_warping(cfg.model)
    v = splitting_classify(w, liminf_threshold=cfg.tolerances.liminf_threshold)
    expected = cfg.params.get("expect")
    ok = v.verdict == expected if expected is not None else v.verdict != "undetermined"
    out = _SuiteOutput(["case_id", "model", "tail", "integral_estimate", "divergence", "liminf",
                        "verdict", "residual", "pass"], residual_kind="liminf estimate")
    out.rows.append([0, w.describe(), v.tail, v.integral_estimate, v.divergence_flag, v.liminf_estimate,
                     v.verdict, v.liminf_estimate, ok])
    out.details["verdict"] = v.verdict
    return out


def _suite_cylinder(cfg: ExperimentConfig) -> _SuiteOutput:
    rep = cylinder_splitting_experiment(float(cfg.params.get("circumference", 2 * math.pi)),
                                        float(cfg.params.get("height", 2.0)), _n(cfg, 100), seed=cfg.seed)
    out = _SuiteOutput(["case_id", "check", "worst_residual", "tolerance", "samples", "residual", "pass"],
                       residual_kind="tolerance minus worst residual")
    for i, c in enumerate(rep.checks):
        out.rows.append([i, c.name, c.worst_residual, c.tolerance, c.cases, c.tolerance - c.worst_residual,
                         c.passed])
    out.details["verdict"] = rep.verdict
    return out


def _suite_rigidity(cfg: ExperimentConfig) -> _SuiteOutput:
    w = make_warping(cfg.model)
    rep = rigidity_equality_check(w, _n(cfg, 50), cfg.seed, perturb=float(cfg.params.get("perturb", 0.0)))
    out = _SuiteOutput(_triangle_columns())
    expect_eq = not cfg.params.get("perturb")
    for case in rep.cases:
        row = _case_row(case)
        if case.report is not None and case.report.equality_case != expect_eq:
            row[-2] = False
        out.rows.append(row)
        if case.report is not None:
            out.add_trace(case.index, case.report.model_triangle.opposite_side)
    out.details.update(n_equality=rep.n_equality, max_angle_residual=rep.max_angle_residual)
    return out


RUNNERS: dict[str, Callable[[ExperimentConfig], _SuiteOutput]] = {
    "geodesic-oracle": _suite_geodesic_oracle, "toponogov": _suite_toponogov, "gluing": _suite_gluing,
    "sturm": _suite_sturm, "splitting": _suite_splitting, "cylinder": _suite_cylinder,
    "rigidity": _suite_rigidity,
}


def run_suite(cfg: ExperimentConfig, suite: str) -> SuiteSummary:
    t0 = time.perf_counter()
    out = RUNNERS[suite](cfg)
    runtime = time.perf_counter() - t0
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(cfg.output_dir / f"{suite}_cases.csv", out.columns, out.rows)
    _write_csv(cfg.output_dir / f"{suite}_traces.csv", TRACE_COLUMNS, out.traces)
    ri, pi = out.columns.index("residual"), out.columns.index("pass")
    residuals = [r[ri] for r in out.rows if r[ri] is not None]
    if out.residual_kind.startswith("max"):
        worst = max(residuals, default=0.0)
    else:
        worst = min(residuals, default=math.inf)
    passes = sum(bool(r[pi]) for r in out.rows)
    return SuiteSummary(suite, len(out.rows), passes, float(worst), runtime, out.residual_kind, out.details)


def run_experiment(cfg: ExperimentConfig) -> list[SuiteSummary]:
    summaries = [run_suite(cfg, s) for s in cfg.suites]
    doc = {
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
        "seed": cfg.seed,
        "model": cfg.model if isinstance(cfg.model, (str, dict)) else str(cfg.model),
        "testbed": cfg.testbed if isinstance(cfg.testbed, (str, dict)) else str(cfg.testbed),
        "tolerances": asdict(cfg.tolerances),
        "suites": [asdict(s) for s in summaries],
    }
    with open(cfg.output_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, default=str)
        fh.write("\n")
    return summaries


# --- plot data ------------------------------------------------------------


def emit_plot_data(report_files: Sequence[str | Path], out_dir: str | Path | None = None) -> list[Path]:
    """Columnar series from suite reports: residuals per case and geodesic traces.

    ``<suite>_cases.csv`` yields ``<suite>_residuals.csv`` (``case_id, residual``);
    ``<suite>_traces.csv`` yields ``<suite>_trace_series.csv``.  Rerunning
    overwrites with identical content.
    """
    written = []
    for name in report_files:
        src = Path(name)
        if not src.is_file():
            raise FileNotFoundError(f"report not found: {src}")
        dest_dir = Path(out_dir) if out_dir is not None else src.parent
        dest_dir.mkdir(parents=True, exist_ok=True)
        with open(src, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header, body = (rows[0], rows[1:]) if rows else ([], [])
        stem = src.stem
        if stem.endswith("_traces"):
            cols = TRACE_COLUMNS
            dest = dest_dir / f"{stem[:-len('_traces')]}_trace_series.csv"
        else:
            cols = ["case_id", "residual"]
            base = stem[:-len("_cases")] if stem.endswith("_cases") else stem
            dest = dest_dir / f"{base}_residuals.csv"
        missing = [c for c in cols if header and c not in header]
        if missing:
            raise ValueError(f"{src}: missing columns {missing}")
        idx = [header.index(c) for c in cols] if header else []
        _write_csv(dest, cols, ([r[i] for i in idx] for r in body))
        written.append(dest)
    return written


# --- entry point ----------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opentri", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run verification suites")
    run.add_argument("--config", type=Path, help="JSON experiment config")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV} or ./opentri-out)")
    run.add_argument("--suite", action="append", choices=SUITES, help="suite to run (repeatable)")
    run.add_argument("--model", help="model warping, e.g. cosh or const:1")
    run.add_argument("--testbed", help="testbed surface, e.g. const or cylinder:6.283:2")
    run.add_argument("--cases", type=int, help="number of randomized cases")
    plot = sub.add_parser("plot-data", help="extract plot-ready series from suite reports")
    plot.add_argument("reports", nargs="+", type=Path)
    plot.add_argument("--out", type=Path)
    sub.add_parser("list-models", help="list shipped warping families")
    return ap


def _load_config(args) -> ExperimentConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
    overrides = {"seed": args.seed, "output_dir": str(args.out) if args.out else None,
                 "model": args.model, "testbed": args.testbed, "cases": args.cases}
    if args.suite:
        data.pop("suite", None)
        overrides["suites"] = args.suite
    return ExperimentConfig.from_mapping(data, **overrides)


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.command == "list-models":
        for name, desc in list_models():
            print(f"{name}\t{desc}")
        return EXIT_OK
    if args.command == "plot-data":
        try:
            for path in emit_plot_data(args.reports, args.out):
                print(path)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summaries = run_experiment(cfg)
    except OrderingError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    failed = False
    for s in summaries:
        extra = f" verdict={s.details['verdict']}" if "verdict" in s.details else ""
        print(f"{s.suite}: {s.passes}/{s.cases} passed, worst residual {s.worst_residual:.3g} "
              f"({s.residual_kind}), {s.runtime:.2f}s{extra}")
        if not s.ok:
            failed = True
            print(f"  see {cfg.output_dir / (s.suite + '_cases.csv')}")
    return EXIT_FAIL if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
