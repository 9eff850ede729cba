"""Reference point-set metrics: Chamfer (L1/L2), exact EMD and F1@tau."""

from __future__ import annotations

import enum
import itertools
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import OracleLimit
from .geometry import as_points, cost_matrix, squared_cost_matrix

__all__ = [
    "EmdNormalization",
    "MetricReport",
    "chamfer_l1",
    "chamfer_l2",
    "chamfer_loss_and_grad",
    "emd_exact",
    "emd_bruteforce",
    "f1_score",
    "compute_metrics",
]

EPS_F1 = 1e-8
DEFAULT_TAU = 0.01


class EmdNormalization(str, enum.Enum):
    SUM = "sum"
    MEAN_PER_POINT = "mean"


def _nn_sq(pred, truth):
    D = squared_cost_matrix(pred, truth)
    return D.min(axis=1), D.min(axis=0)


def chamfer_l1(pred, truth) -> float:
    d_pred, d_truth = _nn_sq(pred, truth)
    return float(np.sqrt(d_pred).mean() + np.sqrt(d_truth).mean())


def chamfer_l2(pred, truth) -> float:
    d_pred, d_truth = _nn_sq(pred, truth)
    return float(d_pred.mean() + d_truth.mean())


def chamfer_loss_and_grad(pred, truth, squared=False):
    """Chamfer loss and its gradient w.r.t. ``pred`` (nearest neighbours held fixed).

    Ties in the nearest-neighbour search resolve to the lowest index.
    """
    x = as_points(pred).points.astype(np.float64)
    y = as_points(truth).points.astype(np.float64)
    N, M = len(x), len(y)
    D = squared_cost_matrix(x, y)
    nn_fwd = D.argmin(axis=1)
    nn_bwd = D.argmin(axis=0)
    diff_fwd = x - y[nn_fwd]
    diff_bwd = x[nn_bwd] - y
    grad = np.zeros_like(x)
    if squared:
        loss = D[np.arange(N), nn_fwd].mean() + D[nn_bwd, np.arange(M)].mean()
        grad += 2.0 * diff_fwd / N
        np.add.at(grad, nn_bwd, 2.0 * diff_bwd / M)
    else:
        d_fwd = np.sqrt(D[np.arange(N), nn_fwd])
        d_bwd = np.sqrt(D[nn_bwd, np.arange(M)])
        loss = d_fwd.mean() + d_bwd.mean()
        with np.errstate(divide="ignore", invalid="ignore"):
            u_fwd = np.where(d_fwd[:, None] > 0, diff_fwd / d_fwd[:, None], 0.0)
            u_bwd = np.where(d_bwd[:, None] > 0, diff_bwd / d_bwd[:, None], 0.0)
        grad += u_fwd / N
        np.add.at(grad, nn_bwd, u_bwd / M)
    return float(loss), grad


def _match_sizes(x, y, seed):
    n = min(len(x), len(y))
    if len(x) == len(y):
        return x, y
    rng = np.random.default_rng(seed)
    if len(x) > n:
        x = x[np.sort(rng.choice(len(x), n, replace=False))]
    else:
        y = y[np.sort(rng.choice(len(y), n, replace=False))]
    return x, y


def emd_exact(pred, truth, normalization=EmdNormalization.SUM, seed: int = 0) -> float:
    """Optimal bijection cost between two point sets.

    When the cardinalities differ the larger set is subsampled without
    replacement (seeded) down to the smaller size.
    """
    x = as_points(pred).points
    y = as_points(truth).points
    x, y = _match_sizes(x, y, seed)
    C = cost_matrix(x, y).astype(np.float64)
    rows, cols = linear_sum_assignment(C)
    total = float(C[rows, cols].sum())
    if EmdNormalization(normalization) is EmdNormalization.MEAN_PER_POINT:
        return total / len(x)
    return total


def emd_bruteforce(pred, truth) -> float:
    """Minimum over all ``N!`` bijections; an oracle for small instances."""
    x = as_points(pred).points
    y = as_points(truth).points
    if len(x) != len(y):
        raise OracleLimit(f"brute force needs equal sizes, got {len(x)} and {len(y)}")
    if len(x) > 8:
        raise OracleLimit(f"brute force is limited to 8 points, got {len(x)}")
    C = cost_matrix(x, y).astype(np.float64)
    n = len(x)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    return float(C[np.arange(n), perms].sum(axis=1).min())


def f1_score(pred, truth, tau: float = DEFAULT_TAU):
    """Return ``(f1, precision, recall)`` at distance threshold ``tau`` (strict ``<``)."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    d_pred, d_truth = _nn_sq(pred, truth)
    precision = float(np.mean(np.sqrt(d_pred) < tau))
    recall = float(np.mean(np.sqrt(d_truth) < tau))
    f1 = 2.0 * precision * recall / (precision + recall + EPS_F1)
    return f1, precision, recall


@dataclass(frozen=True)
class MetricReport:
    cd_l1: float
    cd_l2: float
    emd: float
    emd_times_100: float
    f1: float
    precision: float
    recall: float
    tau: float
    emd_normalization: str = EmdNormalization.MEAN_PER_POINT.value

    def as_dict(self):
        return asdict(self)


def compute_metrics(pred, truth, tau: float = DEFAULT_TAU,
                    emd_normalization=EmdNormalization.MEAN_PER_POINT, seed: int = 0) -> MetricReport:
    emd_norm = EmdNormalization(emd_normalization)
    emd = emd_exact(pred, truth, emd_norm, seed)
    f1, p, r = f1_score(pred, truth, tau)
    return MetricReport(chamfer_l1(pred, truth), chamfer_l2(pred, truth), emd, 100.0 * emd,
                        f1, p, r, tau, emd_norm.value)
