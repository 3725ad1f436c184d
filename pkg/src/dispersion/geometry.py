"""Point sets, axis-parallel boxes and periodic boxes in the unit cube.

Emptiness is always judged against the *open* interior of a box: a point
lying on a face does not make a box non-empty. Under this convention the
supremum in the dispersion is attained by a closed box, so every solver
can return a concrete witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when objects of different dimension are combined."""


class PointSet:
    """n points in [0,1]^d, stored as a read-only ``(n, d)`` float64 array."""

    __slots__ = ("_points",)

    def __init__(self, points: np.ndarray | Sequence[Sequence[float]], dim: int | None = None):
        arr = np.array(points, dtype=np.float64, copy=True)
        if arr.size == 0:
            if dim is None:
                if arr.ndim == 2:
                    dim = arr.shape[1]
                else:
                    raise ValueError("dimension of an empty point set must be given")
            arr = arr.reshape(0, dim)
        if arr.ndim == 1 and dim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValueError(f"points must be a 2-d array, got shape {arr.shape}")
        if dim is not None and arr.shape[1] != dim:
            raise DimensionError(f"points have {arr.shape[1]} coordinates, expected {dim}")
        if arr.shape[1] < 1:
            raise ValueError("dimension must be positive")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coordinates must be finite")
        bad = np.argwhere((arr < 0.0) | (arr > 1.0))
        if bad.size:
            i, k = bad[0]
            raise ValueError(f"coordinate {arr[i, k]!r} of point {i} (axis {k}) is outside [0, 1]")
        arr.setflags(write=False)
        self._points = arr

    @classmethod
    def empty(cls, dim: int) -> "PointSet":
        return cls(np.empty((0, dim)), dim=dim)

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def __len__(self) -> int:
        return self._points.shape[0]

    def __iter__(self):
        return iter(self._points)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self._points.shape == other._points.shape and bool(np.all(self._points == other._points))

    def __hash__(self) -> int:
        return hash((self._points.shape, self._points.tobytes()))

    def __repr__(self) -> str:
        return f"PointSet(n={len(self)}, dim={self.dim})"

    def union(self, other: "PointSet") -> "PointSet":
        _check_dim(self.dim, other.dim)
        return PointSet(np.vstack([self._points, other._points]), dim=self.dim)


def _as_tuple(values: Iterable[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


def _check_dim(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"dimension mismatch: {a} != {b}")


@dataclass(frozen=True)
class AxisBox:
    """Closed box ``prod_k [lo_k, hi_k]`` inside the unit cube."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", _as_tuple(self.lo))
        object.__setattr__(self, "hi", _as_tuple(self.hi))
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ValueError("lo and hi must be non-empty and of equal length")
        for k, (a, b) in enumerate(zip(self.lo, self.hi)):
            if not (0.0 <= a <= b <= 1.0):
                raise ValueError(f"invalid interval [{a}, {b}] on axis {k}")

    @classmethod
    def unit(cls, dim: int) -> "AxisBox":
        return cls((0.0,) * dim, (1.0,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return box_volume(self)

    def as_list(self) -> list[list[float]]:
        return [[a, b] for a, b in zip(self.lo, self.hi)]


@dataclass(frozen=True)
class PeriodicBox:
    """Product of arcs on the circle [0,1).

    Per axis the pair ``(x, y)`` denotes the open interval ``(x, y)`` when
    ``x < y`` and the wrap-around set ``[0,1] \\ [y, x]`` when ``y <= x``.
    ``x == y`` is the full circle minus one point.
    """

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _as_tuple(self.x))
        object.__setattr__(self, "y", _as_tuple(self.y))
        if len(self.x) != len(self.y) or not self.x:
            raise ValueError("x and y must be non-empty and of equal length")
        for k, (a, b) in enumerate(zip(self.x, self.y)):
            if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
                raise ValueError(f"arc endpoints ({a}, {b}) on axis {k} outside [0, 1]")

    @property
    def dim(self) -> int:
        return len(self.x)

    @property
    def volume(self) -> float:
        return periodic_box_volume(self)

    def as_list(self) -> list[list[float]]:
        return [[a, b] for a, b in zip(self.x, self.y)]


@dataclass(frozen=True)
class CertifiedValue:
    """Interval ``[lower, upper]`` guaranteed to contain the true value."""

    lower: float
    upper: float
    witness: AxisBox | PeriodicBox | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise ValueError(f"invalid certified interval [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def box_volume(b: AxisBox) -> float:
    # left-to-right product; solvers use the same order so witness volumes match bit for bit
    vol = 1.0
    for a, c in zip(b.lo, b.hi):
        vol *= c - a
    return vol


def box_is_empty(b: AxisBox, p: PointSet) -> bool:
    _check_dim(b.dim, p.dim)
    if len(p) == 0:
        return True
    pts = p.points
    inside = np.all((pts > np.asarray(b.lo)) & (pts < np.asarray(b.hi)), axis=1)
    return not bool(np.any(inside))


def arc_length(x: float, y: float) -> float:
    if x < y:
        return y - x
    # exact at the seam: x = 1 gives y and y = 0 gives 1 - x
    return (1.0 - x) + y


def periodic_box_volume(b: PeriodicBox) -> float:
    vol = 1.0
    for a, c in zip(b.x, b.y):
        vol *= arc_length(a, c)
    return vol


def arc_contains(x: np.ndarray | float, y: np.ndarray | float, t: np.ndarray) -> np.ndarray:
    """Membership of ``t`` in the open arc ``(x, y)`` (wrap-aware)."""
    x = np.asarray(x)
    y = np.asarray(y)
    plain = (t > x) & (t < y)
    wrap = (t < y) | (t > x)
    return np.where(x < y, plain, wrap)


def periodic_box_is_empty(b: PeriodicBox, p: PointSet) -> bool:
    _check_dim(b.dim, p.dim)
    if len(p) == 0:
        return True
    inside = np.all(arc_contains(np.asarray(b.x), np.asarray(b.y), p.points), axis=1)
    return not bool(np.any(inside))
