"""Independent closed-form oracles used by the tests (no package code)."""
from __future__ import annotations

import math


def flat_distance(x1, y1, x2, y2):
    return math.hypot(x2 - x1, y2 - y1)


def fermi_distance(x1, y1, x2, y2):
    """Hyperbolic distance in Fermi coordinates: cosh d = ch ch ch - sh sh."""
    c = math.cosh(x1) * math.cosh(x2) * math.cosh(y2 - y1) - math.sinh(x1) * math.sinh(x2)
    return math.acosh(c)


def planar_open_triangle(a, b, c):
    """Angles against the downward vertical and foot gap for the flat half-plane."""
    cos_p = -(c - a) / b
    angle_p = math.acos(cos_p)
    angle_q = math.pi - angle_p
    footgap = math.sqrt(b * b - (c - a) ** 2)
    return angle_p, angle_q, footgap


def flat_quadrature_length(nu, x1, x2):
    return abs(x2 - x1) / math.sqrt(1 - nu * nu)


def flat_lower_bound(nu, t1, t2):
    return (t2 - t1) * (1 + nu * nu / (2 * math.sqrt(1 - nu * nu)))


def cosh_unit_nu_length(x1, x2):
    """int cosh / sqrt(cosh^2 - 1) = log sinh, for nu = 1 on the hyperbolic model."""
    return abs(math.log(math.sinh(x2) / math.sinh(x1)))


# frozen values (computed once with mpmath at 50 digits)
FERMI_1_0__1_1 = 1.4717208827259036
