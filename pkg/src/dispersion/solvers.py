"""Exact dispersion: largest empty axis-parallel box of a point set.

``disp_brute_force`` is the ground-truth oracle. It enumerates every box
whose faces come from point coordinates or the cube boundary and is kept
deliberately independent of the compiled search in :mod:`._kernels` that
backs ``disp_exact_2d`` and ``disp_exact``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .geometry import AxisBox, DimensionError, PeriodicBox, PointSet, box_volume

DEFAULT_BUDGET = 10**8


class WorkBudgetExceeded(RuntimeError):
    """The requested computation needs more work than the configured budget."""


@dataclass(frozen=True)
class ExactResult:
    value: float
    witness: AxisBox | PeriodicBox

    def to_dict(self) -> dict:
        kind = "periodic" if isinstance(self.witness, PeriodicBox) else "axis"
        return {"value": self.value, "witness": {"kind": kind, "intervals": self.witness.as_list()}}


def _require_dim(p: PointSet, dim: int) -> None:
    if p.dim != dim:
        raise DimensionError(f"expected a {dim}-dimensional point set, got dimension {p.dim}")


def disp_exact_1d(p: PointSet) -> ExactResult:
    """Largest gap between sorted coordinates, including both end segments."""
    _require_dim(p, 1)
    edges = np.concatenate(([0.0], np.sort(p.points[:, 0]), [1.0]))
    gaps = np.diff(edges)
    i = int(np.argmax(gaps))
    box = AxisBox((edges[i],), (edges[i + 1],))
    return ExactResult(box_volume(box), box)


def circular_gaps(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Arcs between circularly consecutive points as (starts, ends) on [0,1]."""
    c = np.sort(coords)
    starts = c
    ends = np.concatenate((c[1:], c[:1]))
    return starts, ends


def max_circular_gap(coords: np.ndarray) -> float:
    """Length of the largest arc between circularly consecutive points."""
    if coords.size == 0:
        return 1.0
    c = np.sort(coords)
    inner = np.diff(c).max() if c.size > 1 else 0.0
    return max(float(inner), (1.0 - float(c[-1])) + float(c[0]))


def disp_exact_1d_periodic(p: PointSet) -> ExactResult:
    """Largest circular gap; a single point leaves the whole circle minus itself."""
    _require_dim(p, 1)
    coords = p.points[:, 0]
    if coords.size == 0:
        box = PeriodicBox((0.0,), (0.0,))
        return ExactResult(1.0, box)
    starts, ends = circular_gaps(coords)
    lengths = ends - starts
    # the seam gap wraps from the largest coordinate back to the smallest
    lengths[-1] = (1.0 - starts[-1]) + ends[-1]
    best = lengths.max()
    # ties: lexicographically smallest arc (x, y)
    cand = [(float(starts[i]), float(ends[i])) for i in np.flatnonzero(lengths == best)]
    x, y = min(cand)
    box = PeriodicBox((x,), (y,))
    return ExactResult(box.volume, box)


def disp_single_point(x: Sequence[float]) -> float:
    """Dispersion of one point: drop the cube on the far side of one coordinate."""
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("point must lie in the unit cube")
    return float(np.max(np.maximum(x, 1.0 - x)))


def _run_exact(p: PointSet, budget: int) -> ExactResult:
    pts = np.ascontiguousarray(p.points)
    vol, lo, hi, work = _kernels.exact_search(pts, budget)
    if work[2]:
        raise WorkBudgetExceeded(f"exact search exceeded {budget} nodes")
    box = AxisBox(lo, hi)
    return ExactResult(box_volume(box), box)


def disp_exact_2d(p: PointSet) -> ExactResult:
    """Largest empty rectangle in the unit square, O(n^2) after sorting."""
    _require_dim(p, 2)
    return _run_exact(p, DEFAULT_BUDGET)


def disp_exact(p: PointSet, budget: int = DEFAULT_BUDGET) -> ExactResult:
    """Exact dispersion in any dimension.

    Dimensions 1 and 2 use the dedicated solvers. Higher dimensions slice
    the cube into slabs bounded by point coordinates along the leading axes
    and finish with the 2D sweep, pruning any slab that cannot beat the
    incumbent volume.
    """
    if p.dim == 1:
        return disp_exact_1d(p)
    if p.dim == 2:
        return disp_exact_2d(p)
    return _run_exact(p, budget)


def exact_value(pts: np.ndarray, budget: int = DEFAULT_BUDGET) -> float:
    """Array-level shortcut used by the Monte Carlo loop (no witness object)."""
    if pts.shape[0] == 0:
        return 1.0
    if pts.shape[0] == 1:
        return disp_single_point(pts[0])
    if pts.shape[1] == 1:
        edges = np.concatenate(([0.0], np.sort(pts[:, 0]), [1.0]))
        return float(np.diff(edges).max())
    vol, _, _, work = _kernels.exact_search(np.ascontiguousarray(pts), budget)
    if work[2]:
        raise WorkBudgetExceeded(f"exact search exceeded {budget} nodes")
    return float(vol)


def _axis_candidates(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lows = np.unique(np.concatenate(([0.0], coords)))
    highs = np.unique(np.concatenate((coords, [1.0])))
    lo, hi = np.meshgrid(lows, highs, indexing="ij")
    keep = lo < hi
    return lo[keep], hi[keep]


def brute_force_candidates(p: PointSet) -> int:
    """Number of candidate boxes the oracle would enumerate."""
    total = 1
    for k in range(p.dim):
        lo, _ = _axis_candidates(p.points[:, k])
        total *= lo.size
    return total


def _bitmasks(lo: np.ndarray, hi: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Bit i of row r is set when point i lies strictly inside (lo[r], hi[r])."""
    n = coords.size
    words = max(1, -(-n // 64))
    inside = (coords[None, :] > lo[:, None]) & (coords[None, :] < hi[:, None])
    padded = np.zeros((lo.size, words * 64), dtype=bool)
    padded[:, :n] = inside
    bits = np.packbits(padded.reshape(lo.size, words, 64), axis=2, bitorder="little")
    return bits.view(np.uint64).reshape(lo.size, words)


def disp_brute_force(p: PointSet, budget: int = DEFAULT_BUDGET) -> ExactResult:
    """Exhaustive search over boxes with faces on point coordinates.

    Every inclusion-maximal empty box has each face on a point coordinate or
    on the cube boundary, so the maximum over this finite family is exact.
    Cost grows like ``(n+1)^(2d)``; exceeding ``budget`` candidates raises
    :class:`WorkBudgetExceeded` instead of truncating.
    """
    d = p.dim
    if len(p) == 0:
        box = AxisBox.unit(d)
        return ExactResult(1.0, box)
    total = brute_force_candidates(p)
    if total > budget:
        raise WorkBudgetExceeded(
            f"brute force needs {total} candidate boxes, budget is {budget}"
        )
    axes = [_axis_candidates(p.points[:, k]) for k in range(d)]
    masks = [_bitmasks(lo, hi, p.points[:, k]) for k, (lo, hi) in enumerate(axes)]
    widths = [hi - lo for lo, hi in axes]

    best = -1.0
    best_box: tuple[int, ...] | None = None
    # chunk over the first axis so memory stays bounded by the tail product
    head = range(axes[0][0].size) if d > 1 else [None]
    for i in head:
        if i is None:
            m = masks[0]
            vol = np.ones(1) * widths[0]
        else:
            m = masks[0][i][None, :]
            vol = np.ones(1) * widths[0][i]
        for k in range(1, d):
            m = (m[:, None, :] & masks[k][None, :, :]).reshape(-1, m.shape[-1])
            vol = (vol[:, None] * widths[k][None, :]).reshape(-1)
        empty = ~np.any(m != 0, axis=1)
        if not np.any(empty):
            continue
        vol = np.where(empty, vol, -1.0)
        j = int(np.argmax(vol))
        if vol[j] > best:
            best = float(vol[j])
            flat = np.unravel_index(j, [w.size for w in widths[1:]]) if d > 1 else (j,)
            best_box = ((i,) + tuple(int(t) for t in flat)) if d > 1 else (int(flat[0]),)
    assert best_box is not None
    lo = [axes[k][0][best_box[k]] for k in range(d)]
    hi = [axes[k][1][best_box[k]] for k in range(d)]
    box = AxisBox(lo, hi)
    return ExactResult(box_volume(box), box)
