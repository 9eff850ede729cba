"""Point-set containers and pairwise cost matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EmptyInput, NonFiniteInput

__all__ = [
    "PointSet",
    "PointSetBatch",
    "as_points",
    "as_batch",
    "cost_matrix",
    "squared_cost_matrix",
]


@dataclass(frozen=True)
class PointSet:
    """An ``(n, d)`` array of points representing one unordered cloud.

    The array is copied on construction and marked read-only.
    """

    points: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.points)
        # float32 is kept for benchmark runs; everything else is promoted to float64
        pts = np.array(raw, dtype=np.float32 if raw.dtype == np.float32 else np.float64)
        if pts.size == 0:
            raise EmptyInput("point set is empty")
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteInput("point coordinates must be finite")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.points
        return self.points.astype(dtype)


PointsLike = Union[PointSet, np.ndarray, Sequence[Sequence[float]]]


def as_points(x: PointsLike) -> PointSet:
    if isinstance(x, PointSet):
        return x
    return PointSet(x)


@dataclass(frozen=True)
class PointSetBatch:
    """A ragged batch of point sets sharing one spatial dimension."""

    sets: tuple

    def __post_init__(self):
        sets = tuple(as_points(s) for s in self.sets)
        if not sets:
            raise EmptyInput("batch is empty")
        dims = {s.d for s in sets}
        if len(dims) != 1:
            raise DimensionMismatch(f"batch mixes dimensions {sorted(dims)}")
        object.__setattr__(self, "sets", sets)

    @property
    def B(self) -> int:
        return len(self.sets)

    @property
    def d(self) -> int:
        return self.sets[0].d

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def __getitem__(self, i):
        return self.sets[i]


def as_batch(x: Union[PointSetBatch, PointsLike, Iterable[PointsLike]]) -> PointSetBatch:
    """Coerce a single set, a ``(B, n, d)`` array, or a list of sets into a batch."""
    if isinstance(x, PointSetBatch):
        return x
    if isinstance(x, PointSet):
        return PointSetBatch((x,))
    if isinstance(x, np.ndarray):
        if x.ndim == 3:
            return PointSetBatch(tuple(x))
        return PointSetBatch((x,))
    items = list(x)
    if items and not isinstance(items[0], PointSet) and np.ndim(items[0]) == 1:
        # a plain nested list of coordinates, i.e. one set
        return PointSetBatch((PointSet(np.asarray(items, dtype=np.float64)),))
    return PointSetBatch(tuple(items))


def _pair(pred, truth):
    pred = as_points(pred)
    truth = as_points(truth)
    if pred.d != truth.d:
        raise DimensionMismatch(f"dimension mismatch: {pred.d} vs {truth.d}")
    dtype = np.result_type(pred.points, truth.points)
    return pred.points.astype(dtype, copy=False), truth.points.astype(dtype, copy=False)


def cost_matrix(pred: PointsLike, truth: PointsLike) -> np.ndarray:
    """Euclidean distance matrix ``C[i, j] = ||pred[i] - truth[j]||``."""
    x, y = _pair(pred, truth)
    return kernels.pairwise_distances(x, y, False)


def squared_cost_matrix(pred: PointsLike, truth: PointsLike) -> np.ndarray:
    """Squared Euclidean distance matrix, computed directly from coordinate differences."""
    x, y = _pair(pred, truth)
    return kernels.pairwise_distances(x, y, True)
