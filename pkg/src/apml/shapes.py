"""Seeded synthetic target shapes for the fitting harness."""

from __future__ import annotations

import enum

import numpy as np

from .geometry import PointSet

__all__ = ["Shape", "generate_shape", "CLUSTER_CENTERS", "CLUSTER_SIGMA"]

CLUSTER_CENTERS = np.array([[-0.5, 0.0, 0.0], [0.5, 0.0, 0.0]])
CLUSTER_SIGMA = 0.05
DENSE_FRACTION = 0.9


class Shape(str, enum.Enum):
    SPHERE = "sphere"
    CUBE = "cube"
    TWO_CLUSTERS = "two_clusters"
    DENSITY_IMBALANCE = "density_imbalance"


def _sphere(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _two_clusters(rng, n):
    half = n // 2
    counts = (half, n - half)
    blobs = [c + CLUSTER_SIGMA * rng.standard_normal((k, 3)) for c, k in zip(CLUSTER_CENTERS, counts)]
    return np.vstack(blobs)


def _density_imbalance(rng, n):
    # dense octant is [0.5, 1]^3 of the unit cube
    n_dense = int(round(DENSE_FRACTION * n))
    dense = 0.5 + 0.5 * rng.random((n_dense, 3))
    sparse = np.empty((0, 3))
    while len(sparse) < n - n_dense:
        cand = rng.random((2 * (n - n_dense) + 8, 3))
        cand = cand[~np.all(cand >= 0.5, axis=1)]
        sparse = np.vstack([sparse, cand])
    return np.vstack([dense, sparse[: n - n_dense]])


def generate_shape(shape, n_points: int, seed: int = 0) -> PointSet:
    """Sample ``n_points`` 3-D points from a named shape; deterministic in ``seed``."""
    if int(n_points) != n_points or n_points < 2:
        raise ValueError(f"n_points must be an integer >= 2, got {n_points}")
    shape = Shape(shape)
    rng = np.random.default_rng(seed)
    n = int(n_points)
    if shape is Shape.SPHERE:
        pts = _sphere(rng, n)
    elif shape is Shape.CUBE:
        pts = rng.random((n, 3))
    elif shape is Shape.TWO_CLUSTERS:
        pts = _two_clusters(rng, n)
    else:
        pts = _density_imbalance(rng, n)
    return PointSet(pts)
