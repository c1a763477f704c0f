"""Closed-form distances for the flat and hyperbolic models."""
from __future__ import annotations

import math


def flat_distance(p, q) -> float:
    """Euclidean distance; the flat half-plane is convex so segments stay inside."""
    return math.hypot(q.x - p.x, q.y - p.y)


def hyperbolic_distance(p, q) -> float:
    """Distance for ``dx^2 + cosh(x)^2 dy^2`` (Fermi coordinates along a geodesic).

    ``cosh d = cosh x1 cosh x2 cosh dy - sinh x1 sinh x2``, evaluated as
    ``sinh^2(d/2) = sinh^2((x1 - x2)/2) + cosh x1 cosh x2 sinh^2(dy/2)`` to
    keep precision for short distances.
    """
    h = math.sinh((p.x - q.x) / 2) ** 2 + math.cosh(p.x) * math.cosh(q.x) * math.sinh((q.y - p.y) / 2) ** 2
    return 2.0 * math.asinh(math.sqrt(h))


ORACLES = {"const": flat_distance, "cosh": hyperbolic_distance}
