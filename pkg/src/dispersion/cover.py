"""Certified dispersion via equidistant grid covers.

Restricting box faces to multiples of ``1/m`` gives an inner approximation:
any empty box can be shrunk to a grid box by rounding each of its ``2d``
faces inward by less than ``1/m``. Volume is 1-Lipschitz in each face
coordinate, so the loss is at most ``2d/m``. The grid optimum ``lower``
therefore satisfies ``lower <= disp <= lower + 2d/m``.

The same rounding argument holds for periodic boxes, whose arcs may wrap
through the 0/1 seam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import AxisBox, CertifiedValue, PeriodicBox, PointSet
from .solvers import DEFAULT_BUDGET, ExactResult, WorkBudgetExceeded


@dataclass(frozen=True)
class GridCoverConfig:
    """Grid resolution for a target certificate width ``delta``.

    ``resolution`` defaults to ``ceil(2*dim/delta)``; passing it explicitly
    (see :meth:`from_resolution`) avoids float round-trips through ``delta``.
    """

    delta: float
    dim: int
    periodic: bool = False
    resolution: int | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.delta <= 1.0):
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        m = self.resolution
        if m is None:
            m = max(1, math.ceil(2 * self.dim / self.delta))
            while 2 * self.dim / m > self.delta:
                m += 1
        elif m < 1:
            raise ValueError("resolution must be positive")
        elif min(1.0, 2 * self.dim / m) > self.delta:
            # upper is clamped to 1, so a width above 1 only needs delta = 1
            raise ValueError(f"resolution {m} too coarse for delta={self.delta} in dimension {self.dim}")
        object.__setattr__(self, "resolution", int(m))

    @classmethod
    def from_resolution(cls, m: int, dim: int, periodic: bool = False) -> "GridCoverConfig":
        return cls(delta=min(1.0, 2 * dim / m), dim=dim, periodic=periodic, resolution=m)

    @property
    def m(self) -> int:
        return self.resolution  # type: ignore[return-value]

    @property
    def width(self) -> float:
        """Certificate width ``2d/m`` (never more than ``delta``)."""
        return 2 * self.dim / self.m


def grid_empty_box_max(
    p: PointSet, m: int, periodic: bool = False, budget: int = DEFAULT_BUDGET
) -> ExactResult:
    """Largest empty box whose faces all lie on the grid ``{0, 1/m, ..., 1}``."""
    if m < 1:
        raise ValueError("m must be positive")
    pts = np.ascontiguousarray(p.points)
    vol, lo, hi, work = _kernels.grid_search(pts, int(m), bool(periodic), int(budget))
    if work[2]:
        raise WorkBudgetExceeded(f"grid search exceeded {budget} nodes (m={m}, d={p.dim})")
    box = PeriodicBox(lo, hi) if periodic else AxisBox(lo, hi)
    return ExactResult(box.volume, box)


def _certify(p: PointSet, cfg: GridCoverConfig, budget: int) -> CertifiedValue:
    if cfg.dim != p.dim:
        raise ValueError(f"config is for dimension {cfg.dim}, point set has {p.dim}")
    res = grid_empty_box_max(p, cfg.m, cfg.periodic, budget)
    upper = min(1.0, res.value + cfg.width)
    return CertifiedValue(res.value, upper, res.witness)


def disp_certified(p: PointSet, cfg: GridCoverConfig, budget: int = DEFAULT_BUDGET) -> CertifiedValue:
    if cfg.periodic:
        raise ValueError("use disp_certified_periodic for periodic covers")
    return _certify(p, cfg, budget)


def disp_certified_periodic(
    p: PointSet, cfg: GridCoverConfig, budget: int = DEFAULT_BUDGET
) -> CertifiedValue:
    if not cfg.periodic:
        raise ValueError("use disp_certified for plain covers")
    return _certify(p, cfg, budget)


def certified_bounds(pts: np.ndarray, m: int, periodic: bool, budget: int = DEFAULT_BUDGET) -> tuple[float, float]:
    """Array-level (lower, upper) used by the Monte Carlo loop."""
    vol, _, _, work = _kernels.grid_search(np.ascontiguousarray(pts), int(m), bool(periodic), int(budget))
    if work[2]:
        raise WorkBudgetExceeded(f"grid search exceeded {budget} nodes (m={m})")
    return float(vol), min(1.0, float(vol) + 2 * pts.shape[1] / m)
