"""Dispersion of point sets in the unit cube.

Exact and certified solvers for the largest empty axis-parallel box,
closed-form bounds on expected and minimal dispersion, and a seeded Monte
Carlo harness that checks those bounds.
"""

__version__ = "0.1.0"

from .bounds import (BoundEntry, BoundsTable, cor1_bounds, expected_dispersion_bounds,
                     minimal_dispersion_bounds, thm1_bounds)
from .cover import GridCoverConfig, disp_certified, disp_certified_periodic, grid_empty_box_max
from .experiments import (EstimateReport, SimConfig, estimate_expected_dispersion, estimate_inverse,
                          simulate_anchored_box, simulate_circle_gaps, simulate_coupon,
                          simulate_split_lower_bound)
from .geometry import (AxisBox, CertifiedValue, DimensionError, PeriodicBox, PointSet, box_is_empty,
                       box_volume, periodic_box_is_empty, periodic_box_volume)
from .pointsio import PointFileError, read_points, write_points
from .solvers import (ExactResult, WorkBudgetExceeded, disp_brute_force, disp_exact, disp_exact_1d,
                      disp_exact_1d_periodic, disp_exact_2d, disp_single_point)

__all__ = [
    "AxisBox", "BoundEntry", "BoundsTable", "CertifiedValue", "DimensionError", "EstimateReport",
    "ExactResult", "GridCoverConfig", "PeriodicBox", "PointFileError", "PointSet", "SimConfig",
    "WorkBudgetExceeded", "box_is_empty", "box_volume", "cor1_bounds", "disp_brute_force",
    "disp_certified", "disp_certified_periodic", "disp_exact", "disp_exact_1d",
    "disp_exact_1d_periodic", "disp_exact_2d", "disp_single_point", "estimate_expected_dispersion",
    "estimate_inverse", "expected_dispersion_bounds", "grid_empty_box_max",
    "minimal_dispersion_bounds", "periodic_box_is_empty", "periodic_box_volume", "read_points",
    "simulate_anchored_box", "simulate_circle_gaps", "simulate_coupon",
    "simulate_split_lower_bound", "thm1_bounds", "write_points",
]
