"""Comparison geometry of open triangles on surfaces with boundary."""
from __future__ import annotations

from .model_surface import (BVPResult, GeodesicPath, GeodesicState, ModelPoint, geodesic_bvp,
                            integrate_geodesic, length_lower_bound, model_distance,
                            quadrature_length, sector_cut_pair_probe)
from .sturm import splitting_classify, sturm_compare
from .testbed import SyntheticSurface, cylinder_splitting_experiment, surface_geodesic_bvp
from .triangles import (TriangleMeasurements, glue_generalized_triangle, solve_comparison_triangle,
                        verify_toponogov)
from .warping import WarpingFunction, make_warping

__version__ = "0.1.0"

__all__ = [
    "BVPResult", "GeodesicPath", "GeodesicState", "ModelPoint", "SyntheticSurface",
    "TriangleMeasurements", "WarpingFunction", "cylinder_splitting_experiment", "geodesic_bvp",
    "glue_generalized_triangle", "integrate_geodesic", "length_lower_bound", "make_warping",
    "model_distance", "quadrature_length", "sector_cut_pair_probe", "solve_comparison_triangle",
    "splitting_classify", "sturm_compare", "surface_geodesic_bvp", "verify_toponogov",
]
