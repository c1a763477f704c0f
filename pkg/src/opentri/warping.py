"""Warping profiles for rotationally symmetric half-planes.

A :class:`WarpingFunction` describes the metric ``dx^2 + m(x)^2 dy^2`` on
``{x >= 0}``.  The boundary ``x = 0`` is totally geodesic exactly when
``m'(0) = 0``; profiles violating that, or ``m(0) = 1``, are rejected.

All callables must accept floats as well as numpy arrays.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, WarpingError
from .tolerances import DEFAULT_DOMAIN_MAX, FD_STEP

Profile = Callable[[Any], Any]

TAIL_TAGS = ("bounded-above", "grows-unbounded", "decays-to-zero", "unknown")

_BOUNDARY_TOL = 1e-12
_CONSISTENCY_RTOL = 1e-6
_CHECK_SAMPLES = 65


def _fd_first(f: Profile) -> Profile:
    def df(t):
        t = np.asarray(t, dtype=float)
        h = FD_STEP * np.maximum(1.0, np.abs(t))
        out = (f(t + h) - f(t - h)) / (2.0 * h)
        return float(out) if out.ndim == 0 else out

    return df


def _fd_second(f: Profile) -> Profile:
    def d2f(t):
        t = np.asarray(t, dtype=float)
        h = FD_STEP * np.maximum(1.0, np.abs(t))
        out = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
        return float(out) if out.ndim == 0 else out

    return d2f


@dataclass(frozen=True)
class WarpingFunction:
    """Profile ``m`` with first and second derivatives.

    ``dm`` and ``d2m`` are optional; when missing they fall back to central
    differences with step ``1e-5 * max(1, t)``.  ``tail`` is the declared
    asymptotic behaviour of ``m`` beyond ``domain_max`` (see ``TAIL_TAGS``),
    consumed by the splitting classifier.  ``scalar`` optionally holds
    float-only versions of ``(m, dm, d2m)`` for the ODE right-hand sides.
    """

    m: Profile
    dm: Profile | None = None
    d2m: Profile | None = None
    domain_max: float = DEFAULT_DOMAIN_MAX
    name: str = "custom"
    tail: str = "unknown"
    params: Mapping[str, Any] = field(default_factory=dict, compare=False)
    scalar: tuple[Profile, Profile, Profile] | None = field(default=None, compare=False, repr=False)
    analytic: bool = field(default=True, init=False, compare=False)

    def __post_init__(self):
        if not self.domain_max > 0:
            raise WarpingError(f"domain_max must be positive, got {self.domain_max}")
        if self.tail not in TAIL_TAGS:
            raise WarpingError(f"unknown tail tag {self.tail!r}; expected one of {TAIL_TAGS}")
        if self.dm is None or self.d2m is None:
            object.__setattr__(self, "analytic", False)
        if self.dm is None:
            object.__setattr__(self, "dm", _fd_first(self.m))
        if self.d2m is None:
            object.__setattr__(self, "d2m", _fd_second(self.m))
        if self.scalar is None:
            object.__setattr__(self, "scalar", (self.m, self.dm, self.d2m))
        self._validate()

    def _validate(self) -> None:
        m0 = float(self.m(0.0))
        dm0 = float(self.dm(0.0))
        if abs(m0 - 1.0) > _BOUNDARY_TOL:
            raise WarpingError(f"{self.name}: m(0) = {m0!r}, expected 1")
        # finite-difference fallbacks carry O(h^2) error at the origin
        dm_tol = _BOUNDARY_TOL if self.analytic else 1e-9
        if abs(dm0) > dm_tol:
            raise WarpingError(
                f"{self.name}: m'(0) = {dm0!r}; the boundary must be totally geodesic"
            )
        t = np.linspace(0.0, self.domain_max, _CHECK_SAMPLES)
        mv = np.asarray(self.m(t), dtype=float)
        if not np.all(np.isfinite(mv)) or np.any(mv <= 0.0):
            raise WarpingError(f"{self.name}: m must be positive and finite on [0, domain_max]")
        if self.analytic:
            h = 1e-5 * np.maximum(1.0, t)
            fd = (np.asarray(self.dm(t + h)) - np.asarray(self.dm(t - h))) / (2.0 * h)
            d2 = np.asarray(self.d2m(t), dtype=float)
            scale = np.maximum(1.0, np.abs(d2))
            bad = np.abs(fd - d2) > _CONSISTENCY_RTOL * scale
            if np.any(bad):
                i = int(np.argmax(bad))
                raise WarpingError(
                    f"{self.name}: d2m inconsistent with dm at t={t[i]:.6g} "
                    f"({d2[i]!r} vs finite difference {fd[i]!r})"
                )

    def check_height(self, t: float) -> None:
        if not (-_BOUNDARY_TOL <= t <= self.domain_max * (1 + 1e-12)):
            raise DomainError(f"height {t!r} outside [0, {self.domain_max}] for {self.name}")

    def curvature(self, t):
        """Gaussian curvature ``-m''/m`` (vectorised, no domain check)."""
        return -np.asarray(self.d2m(t), dtype=float) / np.asarray(self.m(t), dtype=float)

    def describe(self) -> str:
        if self.params:
            args = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
            return f"{self.name}({args})"
        return self.name


# --- named families -------------------------------------------------------


def const(domain_max: float = DEFAULT_DOMAIN_MAX) -> WarpingFunction:
    """Flat half-plane, ``m = 1``."""
    return WarpingFunction(
        m=lambda t: 0.0 * t + 1.0,
        dm=lambda t: 0.0 * t,
        d2m=lambda t: 0.0 * t,
        domain_max=domain_max,
        name="const",
        tail="bounded-above",
        scalar=(lambda t: 1.0, lambda t: 0.0, lambda t: 0.0),
    )


def cosh(domain_max: float = DEFAULT_DOMAIN_MAX) -> WarpingFunction:
    """Hyperbolic half-plane in Fermi coordinates, ``G = -1``."""
    return WarpingFunction(
        m=np.cosh, dm=np.sinh, d2m=np.cosh, domain_max=domain_max, name="cosh",
        tail="grows-unbounded", scalar=(math.cosh, math.sinh, math.cosh),
    )


def exp_decay(domain_max: float = DEFAULT_DOMAIN_MAX) -> WarpingFunction:
    """``m(t) = (1 + t) e^{-t}``: exponential decay with a flat start.

    The bare ``e^{-t}`` has ``m'(0) = -1`` and so no totally geodesic
    boundary; the linear prefactor fixes ``m'(0) = 0`` and keeps the tail.
    """
    return WarpingFunction(
        m=lambda t: (1.0 + t) * np.exp(-t),
        dm=lambda t: -t * np.exp(-t),
        d2m=lambda t: (t - 1.0) * np.exp(-t),
        domain_max=domain_max,
        name="exp-decay",
        tail="decays-to-zero",
        scalar=(lambda t: (1.0 + t) * math.exp(-t), lambda t: -t * math.exp(-t),
                lambda t: (t - 1.0) * math.exp(-t)),
    )


def cos_truncated(domain_max: float = 1.5) -> WarpingFunction:
    """Spherical band ``m = cos t`` (``G = +1``), truncated below the pole."""
    if not domain_max < math.pi / 2:
        raise WarpingError("cos-truncated needs domain_max < pi/2")
    return WarpingFunction(
        m=np.cos,
        dm=lambda t: -np.sin(t),
        d2m=lambda t: -np.cos(t),
        domain_max=domain_max,
        name="cos-truncated",
        tail="unknown",
        params={"domain_max": domain_max},
        scalar=(math.cos, lambda t: -math.sin(t), lambda t: -math.cos(t)),
    )


def from_table(t, m, name: str = "spline", tail: str = "unknown") -> WarpingFunction:
    """Cubic spline through sampled ``(t, m(t))`` with ``m'(0) = 0`` clamped."""
    t = np.asarray(t, dtype=float)
    m = np.asarray(m, dtype=float)
    if t.ndim != 1 or t.shape != m.shape or t.size < 4:
        raise WarpingError("table needs at least four (t, m) rows")
    order = np.argsort(t)
    t, m = t[order], m[order]
    if np.any(np.diff(t) <= 0):
        raise WarpingError("table heights must be distinct")
    if abs(t[0]) > _BOUNDARY_TOL:
        raise WarpingError("table must start at t = 0")
    spline = CubicSpline(t, m, bc_type=((1, 0.0), "not-a-knot"))
    d1, d2 = spline.derivative(1), spline.derivative(2)

    def _wrap(fn):
        def f(x):
            out = fn(x)
            return float(out) if np.ndim(out) == 0 else out

        return f

    return WarpingFunction(
        m=_wrap(spline), dm=_wrap(d1), d2m=_wrap(d2), domain_max=float(t[-1]),
        name=name, tail=tail,
    )


def from_csv(path: str | Path, tail: str = "unknown") -> WarpingFunction:
    """Load a two-column ``t,m`` CSV (a header row is allowed)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except ValueError:
                if rows:
                    raise WarpingError(f"bad row in {path}: {rec}") from None
    if not rows:
        raise WarpingError(f"no data rows in {path}")
    arr = np.array(rows)
    return from_table(arr[:, 0], arr[:, 1], name=f"spline:{Path(path).name}", tail=tail)


FAMILIES: dict[str, Callable[..., WarpingFunction]] = {
    "const": const,
    "cosh": cosh,
    "exp-decay": exp_decay,
    "cos-truncated": cos_truncated,
}


def make_warping(spec: str | Mapping[str, Any] | WarpingFunction) -> WarpingFunction:
    """Build a warping function from ``"name[:arg]"`` or ``{"name": .., "params": ..}``.

    ``const:1`` is accepted for the flat model; ``spline:PATH`` loads a CSV
    table; ``cos-truncated:1.4`` sets the truncation height.
    """
    if isinstance(spec, WarpingFunction):
        return spec
    if isinstance(spec, str):
        name, _, arg = spec.partition(":")
        params: dict[str, Any] = {}
        if name == "spline":
            if not arg:
                raise WarpingError("spline needs a CSV path: spline:PATH")
            return from_csv(arg)
        if arg:
            if name == "const":
                if float(arg) != 1.0:
                    raise WarpingError("const model must have m = 1 (m(0) = 1 is required)")
            else:
                params["domain_max"] = float(arg)
    else:
        name = spec.get("name")
        params = dict(spec.get("params", {}))
        if name == "spline":
            path = params.pop("path", None) or spec.get("path")
            if path is None:
                raise WarpingError("spline model needs a 'path'")
            return from_csv(path, tail=params.pop("tail", "unknown"))
    if name not in FAMILIES:
        raise WarpingError(f"unknown warping family {name!r}; known: {sorted(FAMILIES)} + spline")
    return FAMILIES[name](**params)


def list_models() -> list[tuple[str, str]]:
    """(name, one-line description) for each shipped family."""
    out = []
    for name, factory in FAMILIES.items():
        doc = (factory.__doc__ or "").strip().splitlines()[0]
        out.append((name, doc))
    out.append(("spline", "Cubic spline from a two-column t,m CSV table (spline:PATH)."))
    return out
