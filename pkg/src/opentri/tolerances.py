"""Central tolerance ladder.

Integrator accuracy sits two orders of magnitude below the distance
assertions, which in turn sit below the inequality assertions.  Every
module reads its defaults from here; the CLI may override them per run.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

INTEGRATOR_RTOL = 1e-12
INTEGRATOR_ATOL = 1e-14
DISTANCE_TOL = 1e-8
INEQUALITY_TOL = 1e-6
ANGLE_EQUALITY_TOL = 1e-5
SHOOTING_BRACKETS = 720
ANGLE_XTOL = 1e-12
TIE_TOL = 1e-6
FD_STEP = 1e-5
LIMINF_THRESHOLD = 1e-3
DEFAULT_DOMAIN_MAX = 50.0


@dataclass(frozen=True)
class Tolerances:
    integrator_rtol: float = INTEGRATOR_RTOL
    integrator_atol: float = INTEGRATOR_ATOL
    distance: float = DISTANCE_TOL
    inequality: float = INEQUALITY_TOL
    angle_equality: float = ANGLE_EQUALITY_TOL
    tie: float = TIE_TOL
    liminf_threshold: float = LIMINF_THRESHOLD

    def override(self, values: Mapping[str, Any]) -> "Tolerances":
        known = {f.name for f in fields(self)}
        unknown = set(values) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in values.items()})


DEFAULT = Tolerances()
