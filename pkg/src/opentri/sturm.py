"""Scalar Jacobi equations ``f'' + K f = 0`` and the splitting classifier.

Curvature profiles are plain callables of the height ``t`` (vectorised when
possible).  :func:`curvature_of` turns a warping function into its profile
``G = -m''/m``; :func:`constant_curvature` and :func:`tabulated_curvature`
cover the other shipped sources.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicSpline, interp1d
from scipy.optimize import brentq, minimize_scalar

from .errors import IntegrationError, OrderingError
from .tolerances import LIMINF_THRESHOLD
from .warping import TAIL_TAGS, WarpingFunction

Profile = Callable[[float], float]

OVERFLOW_GUARD = 1e150
ZERO_XTOL = 1e-12
GRAZE_TOL = 1e-9
_SAMPLE_POINTS = 2001


# --- curvature profiles -----------------------------------------------------


def constant_curvature(k: float) -> Profile:
    return lambda t: 0.0 * np.asarray(t, dtype=float) + k


def curvature_of(w: WarpingFunction) -> Profile:
    """Radial curvature ``G(t) = -m''(t)/m(t)`` of a model surface."""
    return w.curvature


def tabulated_curvature(path: str | Path) -> Profile:
    """Cubic-spline profile through a two-column ``t,K`` CSV table."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.reader(fh):
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except (ValueError, IndexError):
                continue
    arr = np.array(sorted(rows))
    if arr.shape[0] < 4:
        raise ValueError(f"{path}: need at least four (t, K) rows")
    return CubicSpline(arr[:, 0], arr[:, 1])


# --- types ----------------------------------------------------------------


@dataclass(frozen=True)
class SturmProblem:
    """``f'' + K f = 0`` on ``[0, horizon]`` with ``f(0) = f0``, ``f'(0) = df0``.

    For the boundary problem ``df0 = -lambda`` where ``lambda`` is the
    principal curvature of the boundary.
    """

    K: Profile
    f0: float = 1.0
    df0: float = 0.0
    horizon: float = 10.0

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon!r}")
        k = np.asarray([self.K(t) for t in np.linspace(0.0, self.horizon, 257)], dtype=float)
        if not np.all(np.isfinite(k)):
            raise ValueError("curvature profile is not finite on the horizon")

    @classmethod
    def boundary(cls, K: Profile, lam: float, horizon: float) -> "SturmProblem":
        return cls(K, 1.0, -lam, horizon)


@dataclass(frozen=True)
class ScalarField:
    """Samples ``(t, f, f')`` plus a dense evaluator returning ``(f, f')``.

    ``breakpoints`` lists interior points where ``f'`` may jump (piecewise
    linear trial fields); quadratures split there.
    """

    t: np.ndarray
    f: np.ndarray
    df: np.ndarray
    horizon: float
    dense: Callable[[np.ndarray | float], np.ndarray] = field(repr=False, compare=False)
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("ScalarField grid must be strictly increasing")

    def __call__(self, t):
        return self.dense(t)[0]

    def derivative(self, t):
        return self.dense(t)[1]

    @classmethod
    def from_functions(cls, f: Profile, df: Profile, horizon: float, n: int = 513) -> "ScalarField":
        t = np.linspace(0.0, horizon, n)

        def dense(s):
            s = np.asarray(s, dtype=float)
            return np.array([np.asarray(f(s), dtype=float) + 0.0 * s, np.asarray(df(s), dtype=float) + 0.0 * s])

        fv, dfv = dense(t)
        return cls(t, fv, dfv, horizon, dense)

    @classmethod
    def piecewise_linear(cls, nodes, values, horizon: float | None = None) -> "ScalarField":
        """Continuous piecewise-linear field through ``(nodes, values)``; zero past the last node."""
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        horizon = float(nodes[-1]) if horizon is None else float(horizon)
        if horizon > nodes[-1]:
            nodes = np.append(nodes, horizon)
            values = np.append(values, 0.0)
        slopes = np.diff(values) / np.diff(nodes)
        fi = interp1d(nodes, values, assume_sorted=True)

        def dense(s):
            s = np.asarray(s, dtype=float)
            idx = np.clip(np.searchsorted(nodes, s, side="right") - 1, 0, slopes.size - 1)
            return np.array([fi(np.clip(s, nodes[0], nodes[-1])), slopes[idx]])

        dfv = np.append(slopes, slopes[-1])
        return cls(nodes, values, dfv, horizon, dense, tuple(nodes[1:-1]))


@dataclass(frozen=True)
class SturmDiagnosis:
    lam: float
    horizon: float
    status: str  # not-applicable | consistent | deviation-detected | undetermined
    f_positive: bool
    first_zero: float | None
    k_equals_g: bool
    max_k_minus_g: float
    max_f_minus_m: float
    divergence: str
    note: str = ""


@dataclass(frozen=True)
class SplittingVerdict:
    integral_estimate: float
    divergence_flag: str  # divergent | convergent | undetermined
    liminf_estimate: float
    verdict: str  # ST1 | ST2 | none | undetermined
    tail: str = "unknown"
    conditions: frozenset[str] = frozenset()
    note: str = ""
    threshold: float = LIMINF_THRESHOLD

    def __post_init__(self):
        if self.verdict == "ST1" and self.divergence_flag != "divergent":
            raise ValueError("ST1 requires a divergent integral")
        if self.verdict == "ST2" and not self.liminf_estimate <= self.threshold:
            raise ValueError("ST2 requires a vanishing tail minimum")


# --- ODE solving ------------------------------------------------------------


def solve_scalar_jacobi(p: SturmProblem, rtol: float = 1e-12, atol: float = 1e-14) -> ScalarField:
    """Integrate ``f'' + K f = 0`` over the horizon with dense output."""
    K = p.K

    def rhs(t, u):
        return [u[1], -float(K(t)) * u[0]]

    def blowup(_t, u):
        return OVERFLOW_GUARD - abs(u[0])

    blowup.terminal = True
    sol = solve_ivp(rhs, (0.0, p.horizon), [p.f0, p.df0], method="DOP853", rtol=rtol,
                    atol=atol, dense_output=True, events=blowup)
    if sol.status == -1:
        raise IntegrationError(f"Jacobi integration failed: {sol.message}")
    if sol.t_events[0].size:
        raise IntegrationError(f"Jacobi solution exceeded {OVERFLOW_GUARD:g} at t = {sol.t_events[0][0]:.6g}")
    return ScalarField(sol.t, sol.y[0], sol.y[1], p.horizon, sol.sol)


def jacobi_residual(f: ScalarField, K: Profile, t: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """``f'' + K f`` at ``t`` with ``f''`` from central differences of the dense ``f'``."""
    t = np.clip(np.asarray(t, dtype=float), h, f.horizon - h)
    d2 = (f.derivative(t + h) - f.derivative(t - h)) / (2 * h)
    return d2 + np.asarray([K(s) for s in t]) * f(t)


def _sample(f: ScalarField, n: int = _SAMPLE_POINTS) -> tuple[np.ndarray, np.ndarray]:
    t = np.union1d(f.t, np.linspace(0.0, f.horizon, n))
    return t, np.asarray(f(t), dtype=float)


def first_zero(f: ScalarField) -> float | None:
    """First sign change of ``f`` on ``(0, horizon]``, refined by Brent's method.

    Tangential zeros without a sign change are not zeros here; see
    :func:`grazing_zeros`.
    """
    if not f(0.0) > 0:
        raise ValueError("first_zero needs f(0) > 0")
    t, v = _sample(f)
    neg = np.flatnonzero(v < 0.0)
    exact = np.flatnonzero(v == 0.0)
    for j in exact:
        if neg.size and j > neg[0]:
            break
        # a sampled exact zero counts only when f goes negative next (or the horizon ends)
        after = v[j + 1:][v[j + 1:] != 0.0]
        if not after.size or after[0] < 0:
            return float(t[j])
    if not neg.size:
        return None
    i = neg[0]
    return float(brentq(lambda s: float(f(s)), t[i - 1], t[i], xtol=ZERO_XTOL, rtol=1e-15))


def grazing_zeros(f: ScalarField, tol: float = GRAZE_TOL) -> list[float]:
    """Points where ``f`` touches zero without changing sign (``|f| < tol``, ``f' ~ 0``)."""
    t, v = _sample(f)
    out = []
    a = np.abs(v)
    for i in range(1, t.size - 1):
        if a[i] <= a[i - 1] and a[i] <= a[i + 1] and v[i - 1] * v[i + 1] > 0:
            r = minimize_scalar(lambda s: abs(float(f(s))), bounds=(t[i - 1], t[i + 1]), method="bounded",
                                options={"xatol": 1e-12})
            if r.fun < tol and abs(float(f.derivative(r.x))) < math.sqrt(tol):
                out.append(float(r.x))
    return out


# --- index form -----------------------------------------------------------


def index_form_value(K: Profile, f: ScalarField, lam: float, ell: float) -> tuple[float, float]:
    """``I = int_0^ell (f'^2 - K f^2)`` and the boundary form ``I - lam f(0)^2``."""
    if ell > f.horizon * (1 + 1e-12):
        raise ValueError(f"ell = {ell} exceeds the field horizon {f.horizon}")
    if ell <= 0:
        return 0.0, -lam * float(f(0.0)) ** 2

    def integrand(t):
        fv, dfv = f.dense(t)
        return float(dfv) ** 2 - float(K(t)) * float(fv) ** 2

    pts = sorted({b for b in f.breakpoints if 0 < b < ell})
    edges = [0.0, *pts, ell]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
    return total, total - lam * float(f(0.0)) ** 2


def boundary_identity_residual(K: Profile, f: ScalarField, ell: float) -> float:
    """``I - (f(ell) f'(ell) - f(0) f'(0))``; zero for exact Jacobi solutions."""
    I, _ = index_form_value(K, f, 0.0, ell)
    fe, dfe = f.dense(ell)
    f0, df0 = f.dense(0.0)
    return I - (float(fe) * float(dfe) - float(f0) * float(df0))


# --- Sturm comparison --------------------------------------------------------


def _partial_integrals(m_vals: np.ndarray, t: np.ndarray) -> np.ndarray:
    inv = 1.0 / (m_vals * m_vals)
    return np.concatenate([[0.0], np.cumsum(0.5 * (inv[1:] + inv[:-1]) * np.diff(t))])


def _plateau(t: np.ndarray, partial: np.ndarray, window: float = 0.8, rel: float = 1e-6) -> bool:
    tail = partial[-1] - np.interp(window * t[-1], t, partial)
    return tail <= rel * (1.0 + partial[-1])


def _divergence_from_tail(tail: str | None, t: np.ndarray, partial: np.ndarray) -> str:
    if tail in ("bounded-above", "decays-to-zero"):
        return "divergent"
    if _plateau(t, partial):
        return "convergent"
    return "undetermined"


def sturm_compare(K: Profile, G: Profile, lam: float, horizon: float, *,
                  tail: str | None = None, n_check: int = 1025) -> SturmDiagnosis:
    """Compare ``f'' + K f = 0``, ``f(0) = 1``, ``f'(0) = -lam`` with the model
    warping ``m'' + G m = 0``, ``m(0) = 1``, ``m'(0) = 0``.

    For ``lam = 0`` the question is whether a positive ``f`` together with
    a divergent ``int 1/m^2`` forces ``K = G``; on a finite horizon only the
    absence of a detected deviation can be confirmed.  For ``lam > 0`` with a divergent integral ``f`` must vanish;
    the first zero is reported.  ``tail`` is the declared asymptotic tag of
    ``m``; without it divergence is undetermined unless ``int 1/m^2`` has
    visibly converged.
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    t = np.linspace(0.0, horizon, n_check)
    kv = np.array([K(s) for s in t], dtype=float)
    gv = np.array([G(s) for s in t], dtype=float)
    gap = kv - gv
    if np.min(gap) < -1e-12:
        i = int(np.argmin(gap))
        raise OrderingError(f"K < G at t = {t[i]:.6g} (K - G = {gap[i]:.3g})")
    fk = solve_scalar_jacobi(SturmProblem.boundary(K, lam, horizon))
    # the model warping itself: m(0) = 1, m'(0) = 0
    fm = solve_scalar_jacobi(SturmProblem(G, 1.0, 0.0, horizon))
    t0 = first_zero(fk)
    max_dev = float(np.max(np.abs(fk(t) - fm(t))))
    k_eq = bool(np.max(np.abs(gap)) <= 1e-8)
    positive = t0 is None
    m_zero = first_zero(fm)
    if m_zero is not None:
        div = "undetermined"
        note = f"model solution vanishes at t = {m_zero:.6g}"
    else:
        div = _divergence_from_tail(tail, t, _partial_integrals(fm(t), t))
        note = ""
    if lam == 0:
        if div == "convergent" or not positive:
            status = "not-applicable"
            note = note or ("int 1/m^2 converges" if div == "convergent" else "f vanishes on the horizon")
        elif div == "undetermined":
            status = "undetermined"
        else:
            status = "consistent" if k_eq else "deviation-detected"
            note = note or "finite horizon: K = G verified only up to the horizon"
    else:
        if div == "convergent":
            status = "not-applicable"
            note = note or "int 1/m^2 converges"
        elif div == "undetermined":
            status = "undetermined"
        else:
            status = "consistent" if t0 is not None else "undetermined"
            if t0 is None:
                note = "no zero of f up to the horizon"
    return SturmDiagnosis(lam, horizon, status, positive, t0, k_eq, float(np.max(np.abs(gap))),
                          max_dev, div, note)


def first_zero_oracle(lam: float) -> float:
    """Closed form first zero ``1/lam`` of ``1 - lam t`` (the flat case)."""
    return 1.0 / lam


# --- splitting classifier ---------------------------------------------------


def splitting_classify(w: WarpingFunction | Profile, tail_window: tuple[float, float] = (0.8, 1.0), *,
                       liminf_threshold: float = LIMINF_THRESHOLD, domain_max: float | None = None,
                       tail: str | None = None, n_samples: int = 4097) -> SplittingVerdict:
    """Classify a warping profile as ST1, ST2, none or undetermined.

    ``w`` is a :class:`WarpingFunction` or a bare profile ``m`` together with
    ``domain_max``.  Divergence of ``int_0^inf dt/m^2`` and ``liminf m = 0``
    are read off the declared ``tail`` tag (defaulting to ``w.tail``); the
    sampled data on ``[0, domain_max]`` is only used to refute the tag, in
    which case the verdict is undetermined.  When both conditions hold the
    stronger conclusion ST2 is reported; ``conditions`` lists every one met.
    """
    if isinstance(w, WarpingFunction):
        m = w.m
        D = w.domain_max if domain_max is None else domain_max
        tag = w.tail if tail is None else tail
    else:
        if domain_max is None:
            raise ValueError("a bare profile needs domain_max")
        m, D, tag = w, float(domain_max), tail or "unknown"
    if tag not in TAIL_TAGS:
        raise ValueError(f"unknown tail tag {tag!r}")
    lo, hi = tail_window
    t = np.linspace(0.0, D, n_samples)
    mv = np.asarray(m(t), dtype=float) + 0.0 * t
    partial = _partial_integrals(mv, t)
    integral, _ = quad(lambda s: 1.0 / float(m(s)) ** 2, 0.0, D, limit=500, epsrel=1e-10)
    window = (t >= lo * D) & (t <= hi * D)
    liminf = float(np.min(mv[window]))
    plateau = _plateau(t, partial, lo)

    def verdict(div, v, conds=frozenset(), note=""):
        return SplittingVerdict(float(integral), div, liminf, v, tag, frozenset(conds), note,
                                liminf_threshold)

    if tag == "unknown":
        return verdict("undetermined", "undetermined", note="no tail tag: finite data cannot decide")
    if tag == "bounded-above":
        if plateau:
            return verdict("undetermined", "undetermined",
                           note="tag says bounded but the partial integrals have levelled off")
        return verdict("divergent", "ST1", {"ST1"})
    if tag == "decays-to-zero":
        if liminf > liminf_threshold:
            return verdict("undetermined", "undetermined",
                           note=f"tag says decaying but min m on the tail window is {liminf:.3g}")
        return verdict("divergent", "ST2", {"ST1", "ST2"})
    # grows-unbounded: liminf m = inf, so only the integral is in question
    if plateau:
        return verdict("convergent", "none")
    return verdict("undetermined", "undetermined",
                   note="growing tail but the partial integrals have not levelled off")
