"""Fixed-depth Sinkhorn normalization of soft assignment matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateMarginal, EmptyInput, NonFiniteInput

__all__ = ["SinkhornConfig", "MarginalResiduals", "sinkhorn_normalize", "sinkhorn_backward"]


@dataclass(frozen=True)
class SinkhornConfig:
    # 10 iterations is the experimental setting; 20 is also a common choice
    l_iter: int = 10
    eps_stab: float = 1e-8

    def __post_init__(self):
        if int(self.l_iter) != self.l_iter or self.l_iter < 1:
            raise ValueError(f"l_iter must be an integer >= 1, got {self.l_iter}")
        if self.eps_stab <= 0:
            raise ValueError(f"eps_stab must be positive, got {self.eps_stab}")


@dataclass
class MarginalResiduals:
    max_row_dev: float
    max_col_dev: float
    row_history: np.ndarray = field(repr=False)
    col_history: np.ndarray = field(repr=False)


def _validate(P):
    P = np.asarray(P)
    if P.ndim != 2 or 0 in P.shape:
        raise EmptyInput(f"expected a non-empty 2-D matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise NonFiniteInput("matrix contains NaN or Inf")
    if np.any(P < 0):
        raise ValueError("matrix entries must be nonnegative")
    if not np.all(P.any(axis=1)):
        raise DegenerateMarginal("matrix has an all-zero row")
    if not np.all(P.any(axis=0)):
        raise DegenerateMarginal("matrix has an all-zero column")
    return P


def sinkhorn_normalize(P, cfg: SinkhornConfig | None = None, keep_iterates: bool = False):
    """Alternate column and row normalization ``cfg.l_iter`` times.

    Each iteration divides every column by its sum plus ``eps_stab`` and then
    every row by its sum plus ``eps_stab``, so rows finish (almost exactly)
    normalized. There is no early stopping.

    Returns ``(P, residuals)``, or ``(P, residuals, iterates)`` when
    ``keep_iterates`` is set; ``iterates[l]`` is the matrix entering
    iteration ``l``.
    """
    cfg = cfg or SinkhornConfig()
    P = _validate(P)
    out, row_dev, col_dev, iterates = kernels.sinkhorn(P, cfg.l_iter, cfg.eps_stab, keep_iterates)
    res = MarginalResiduals(float(row_dev[-1]), float(col_dev[-1]), row_dev, col_dev)
    if keep_iterates:
        return out, res, iterates
    return out, res


def _normalize_backward(X, grad_out, axis, eps_stab):
    # Y = X / (sum(X, axis) + eps)  =>  dX = (dY - sum(dY * Y, axis)) / s
    s = X.sum(axis=axis, keepdims=True) + eps_stab
    Y = X / s
    return (grad_out - (grad_out * Y).sum(axis=axis, keepdims=True)) / s


def sinkhorn_backward(iterates, grad_out, eps_stab):
    """Pull a gradient w.r.t. the normalized output back to the input matrix.

    ``iterates`` must come from ``sinkhorn_normalize(..., keep_iterates=True)``.
    """
    grad = np.asarray(grad_out, dtype=np.float64)
    for P in iterates[::-1]:
        Q = P / (P.sum(axis=0, keepdims=True) + eps_stab)
        grad = _normalize_backward(Q, grad, 1, eps_stab)
        grad = _normalize_backward(P, grad, 0, eps_stab)
    return grad
