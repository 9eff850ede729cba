"""Adaptive-temperature softmax and bidirectional soft assignments.

Each cost vector is shifted so its minimum is zero, the gap to the next
distinct value sets a closed-form temperature that gives the best match
probability of roughly ``p_min``, and near-ties fall back to a uniform
distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EmptyInput, NonFiniteInput, NonPositiveTemperature

__all__ = [
    "AdaptiveSoftmaxConfig",
    "SoftmaxDiagnostics",
    "DirectionalAssignments",
    "normalize_costs",
    "local_gap",
    "adaptive_temperature",
    "adaptive_softmax_vec",
    "directional_assignments",
    "symmetrize",
]


@dataclass(frozen=True)
class AdaptiveSoftmaxConfig:
    p_min: float = 0.8
    delta: float = 1e-6
    eps_gap: float = 1e-5

    def __post_init__(self):
        if not 0.0 < self.p_min < 1.0:
            raise ValueError(f"p_min must lie in (0, 1), got {self.p_min}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.eps_gap <= 0:
            raise ValueError(f"eps_gap must be positive, got {self.eps_gap}")
        if self.eps_gap <= self.delta:
            raise ValueError("eps_gap must exceed delta")


@dataclass(frozen=True)
class SoftmaxDiagnostics:
    """Per-vector record of how the assignment was produced.

    ``temperature`` is 0.0 when no temperature was used (single element or
    uniform override).
    """

    temperature: float
    override_fired: bool
    gap: float


def _check_vector(c):
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D cost vector, got shape {c.shape}")
    if c.size == 0:
        raise EmptyInput("cost vector is empty")
    if not np.all(np.isfinite(c)):
        raise NonFiniteInput("cost vector contains NaN or Inf")
    return c


def normalize_costs(c) -> np.ndarray:
    """Shift ``c`` so that its minimum is exactly zero."""
    c = _check_vector(c)
    return c - c.min()


def local_gap(c_norm, delta: float = 1e-6, eps_gap: float = 1e-5) -> tuple[float, bool]:
    """Return ``(g, degenerate)`` for a min-shifted cost vector.

    ``g`` is the smallest strictly positive entry plus ``delta`` (just
    ``delta`` when every entry is zero). ``degenerate`` tells whether that
    entry falls below ``eps_gap``; the margin is not included in the test.
    """
    c_norm = _check_vector(c_norm)
    positive = c_norm[c_norm > 0]
    second = float(positive.min()) if positive.size else 0.0
    return second + delta, second < eps_gap


def adaptive_temperature(g: float, K: int, p_min: float) -> float:
    if K < 2:
        raise ValueError("temperature is undefined for K < 2; a single candidate is assigned probability 1")
    if g <= 0:
        raise ValueError(f"gap must be positive, got {g}")
    if not 0.0 < p_min < 1.0:
        raise ValueError(f"p_min must lie in (0, 1), got {p_min}")
    if p_min <= 1.0 / K:
        raise NonPositiveTemperature(f"p_min={p_min} must exceed 1/K={1.0 / K}")
    return -math.log((1.0 - p_min) / ((K - 1) * p_min)) / g


def _check_p_min(K, p_min):
    if K > 1 and p_min <= 1.0 / K:
        raise NonPositiveTemperature(f"p_min={p_min} must exceed 1/K={1.0 / K}")


def adaptive_softmax_vec(c, cfg: AdaptiveSoftmaxConfig | None = None):
    """Adaptive softmax of one cost vector.

    Returns
    -------
    probs : ndarray of shape (K,)
    diag : SoftmaxDiagnostics
    """
    cfg = cfg or AdaptiveSoftmaxConfig()
    c = _check_vector(c)
    K = c.size
    if K == 1:
        return np.ones(1), SoftmaxDiagnostics(0.0, False, 0.0)
    _check_p_min(K, cfg.p_min)
    c_norm = c - c.min()
    g, degenerate = local_gap(c_norm, cfg.delta, cfg.eps_gap)
    if degenerate:
        return np.full(K, 1.0 / K), SoftmaxDiagnostics(0.0, True, g)
    T = adaptive_temperature(g, K, cfg.p_min)
    w = np.exp(-T * c_norm)
    return w / w.sum(), SoftmaxDiagnostics(T, False, g)


@dataclass
class RowAssignment:
    """Row-wise adaptive softmax of a matrix plus what the backward pass needs."""

    probs: np.ndarray
    temperature: np.ndarray
    override: np.ndarray
    argmin: np.ndarray
    second: np.ndarray


def softmax_rows(C, cfg: AdaptiveSoftmaxConfig) -> RowAssignment:
    C = np.asarray(C)
    if C.ndim != 2 or 0 in C.shape:
        raise EmptyInput(f"cost matrix must be a non-empty 2-D array, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise NonFiniteInput("cost matrix contains NaN or Inf")
    _check_p_min(C.shape[1], cfg.p_min)
    probs, temp, override, argmin, second = kernels.adaptive_softmax_rows(C, cfg.p_min, cfg.delta, cfg.eps_gap)
    return RowAssignment(probs, temp, override.astype(bool), argmin, second)


def softmax_cols(C, cfg: AdaptiveSoftmaxConfig) -> RowAssignment:
    """Column-wise adaptive softmax; ``probs`` keeps the ``(N, M)`` layout of ``C``."""
    C = np.asarray(C)
    if C.ndim != 2 or 0 in C.shape:
        raise EmptyInput(f"cost matrix must be a non-empty 2-D array, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise NonFiniteInput("cost matrix contains NaN or Inf")
    _check_p_min(C.shape[0], cfg.p_min)
    probs, temp, override, argmin, second = kernels.adaptive_softmax_cols(C, cfg.p_min, cfg.delta, cfg.eps_gap)
    return RowAssignment(probs, temp, override.astype(bool), argmin, second)


@dataclass
class DirectionalAssignments:
    """Row-stochastic ``P1`` (pred to truth) and column-stochastic ``P2``."""

    P1: np.ndarray
    P2: np.ndarray
    rows: RowAssignment
    cols: RowAssignment  # per-column arrays; cols.probs is P2

    @property
    def override_count(self) -> int:
        return int(self.rows.override.sum() + self.cols.override.sum())

    def __iter__(self):
        # allows ``P1, P2 = directional_assignments(C)``
        return iter((self.P1, self.P2))


def directional_assignments(C, cfg: AdaptiveSoftmaxConfig | None = None) -> DirectionalAssignments:
    cfg = cfg or AdaptiveSoftmaxConfig()
    C = np.asarray(C)
    rows = softmax_rows(C, cfg)
    cols = softmax_cols(C, cfg)
    return DirectionalAssignments(rows.probs, cols.probs, rows, cols)


def symmetrize(P1, P2) -> np.ndarray:
    P1 = np.asarray(P1)
    P2 = np.asarray(P2)
    if P1.shape != P2.shape:
        raise DimensionMismatch(f"shape mismatch: {P1.shape} vs {P2.shape}")
    return 0.5 * (P1 + P2)
