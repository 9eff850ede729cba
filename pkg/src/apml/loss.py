"""Adaptive probabilistic matching loss and its gradient.

For each pair of sets the loss is the Frobenius inner product of the
Sinkhorn-refined symmetric soft assignment with the Euclidean cost matrix;
batch elements are averaged.

Gradients are computed by a hand-written reverse pass over the fixed-depth
forward computation. Two treatments of the temperature are offered:

``GradMode.FULL``
    differentiates through the temperature as a function of the cost gap
    (valid where the argmin / second-distinct-min indices and the uniform
    override decisions are locally constant).
``GradMode.DETACHED``
    treats each temperature and override decision as a constant captured in
    the forward pass.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .assign import AdaptiveSoftmaxConfig, RowAssignment, softmax_cols, softmax_rows
from .errors import BatchMismatch, DimensionMismatch
from .geometry import PointSet, PointSetBatch, as_batch
from .sinkhorn import MarginalResiduals, SinkhornConfig, sinkhorn_backward, sinkhorn_normalize

__all__ = [
    "GradMode",
    "Reduction",
    "ApmlConfig",
    "ElementDiagnostics",
    "LossResult",
    "apml_forward",
    "apml_gradient",
    "apml_forward_fixed_temperature",
]


class GradMode(str, enum.Enum):
    FULL = "full"
    DETACHED = "detached"


class Reduction(str, enum.Enum):
    SUM = "sum"
    MEAN = "mean"


@dataclass(frozen=True)
class ApmlConfig:
    softmax: AdaptiveSoftmaxConfig = field(default_factory=AdaptiveSoftmaxConfig)
    sinkhorn: SinkhornConfig = field(default_factory=SinkhornConfig)
    grad_mode: GradMode = GradMode.FULL
    reduction: Reduction = Reduction.SUM

    def __post_init__(self):
        object.__setattr__(self, "grad_mode", GradMode(self.grad_mode))
        object.__setattr__(self, "reduction", Reduction(self.reduction))

    @classmethod
    def from_values(cls, p_min=0.8, delta=1e-6, eps_gap=1e-5, l_iter=10, eps_stab=1e-8,
                    grad_mode="full", reduction="sum"):
        return cls(
            AdaptiveSoftmaxConfig(p_min, delta, eps_gap),
            SinkhornConfig(l_iter, eps_stab),
            GradMode(grad_mode),
            Reduction(reduction),
        )


@dataclass
class ElementDiagnostics:
    """Forward-pass record for one batch element."""

    row_temperature: np.ndarray
    col_temperature: np.ndarray
    row_override: np.ndarray
    col_override: np.ndarray
    residuals: MarginalResiduals
    rows: RowAssignment = field(repr=False)
    cols: RowAssignment = field(repr=False)
    pre_sinkhorn: np.ndarray = field(repr=False)

    @property
    def override_count(self) -> int:
        return int(self.row_override.sum() + self.col_override.sum())

    def order_signature(self):
        """Hashable summary of every discrete decision made in the forward pass."""
        return tuple(
            a.tobytes()
            for a in (self.rows.argmin, self.rows.second, self.rows.override,
                      self.cols.argmin, self.cols.second, self.cols.override)
        )


@dataclass
class LossResult:
    loss: float
    element_losses: np.ndarray
    transport: tuple
    diagnostics: tuple
    grad_pred: Optional[object] = None

    @property
    def override_count(self) -> int:
        return sum(d.override_count for d in self.diagnostics)

    def order_signature(self):
        return tuple(d.order_signature() for d in self.diagnostics)


def _transposed(ra: RowAssignment) -> RowAssignment:
    # column assignments as row assignments of C.T (and back); probs is a view
    return RowAssignment(ra.probs.T, ra.temperature, ra.override, ra.argmin, ra.second)


def _frozen_rows(C, ref: RowAssignment) -> RowAssignment:
    """Row softmax with temperatures and override flags taken from ``ref``."""
    n, k = C.shape
    rows = np.arange(n)
    argmin = np.argmin(C, axis=1)
    shifted = C - C[rows, argmin][:, None]
    T = np.asarray(ref.temperature, dtype=np.float64)
    w = np.exp(-T[:, None] * shifted)
    probs = w / w.sum(axis=1, keepdims=True)
    fixed = ~(T > 0)
    probs[fixed] = 1.0 / k
    return RowAssignment(probs, T, np.asarray(ref.override), argmin, np.asarray(ref.second))


def _softmax_rows_backward(C, ra: RowAssignment, grad_probs, delta, full):
    n, _ = C.shape
    rows = np.arange(n)
    T = np.asarray(ra.temperature, dtype=np.float64)
    active = T > 0
    P = np.asarray(ra.probs, dtype=np.float64)
    shifted = C - C[rows, ra.argmin][:, None]

    dz = P * (grad_probs - (P * grad_probs).sum(axis=1, keepdims=True))
    dz[~active] = 0.0
    d_shifted = -T[:, None] * dz
    grad = d_shifted.copy()
    # min subtraction: the argmin entry feeds every shifted cost
    np.subtract.at(grad, (rows, ra.argmin), d_shifted.sum(axis=1))

    if full:
        r = rows[active]
        sec = ra.second[active]
        amin = ra.argmin[active]
        g = shifted[r, sec] + delta
        d_temp = -(dz[active] * shifted[active]).sum(axis=1)
        d_gap = -T[active] / g * d_temp
        np.add.at(grad, (r, sec), d_gap)
        np.subtract.at(grad, (r, amin), d_gap)
    return grad


def _distance_backward(x, y, C, grad_C):
    with np.errstate(divide="ignore", invalid="ignore"):
        W = np.where(C > 0, grad_C / C, 0.0)
    return W.sum(axis=1)[:, None] * x - W @ y


def _element(x, y, cfg: ApmlConfig, need_grad, frozen: Optional[ElementDiagnostics] = None):
    C = kernels.pairwise_distances(x, y, False)
    if frozen is None:
        rows = softmax_rows(C, cfg.softmax)
        cols = softmax_cols(C, cfg.softmax)
    else:
        C64 = C.astype(np.float64)
        rows = _frozen_rows(C64, frozen.rows)
        cols = _transposed(_frozen_rows(C64.T, frozen.cols))
    P0 = 0.5 * (rows.probs + cols.probs)
    if need_grad:
        P, res, iterates = sinkhorn_normalize(P0, cfg.sinkhorn, keep_iterates=True)
    else:
        P, res = sinkhorn_normalize(P0, cfg.sinkhorn)
    scale = 1.0 / x.shape[0] if cfg.reduction is Reduction.MEAN else 1.0
    loss = float(np.sum(P * C, dtype=np.float64)) * scale
    diag = ElementDiagnostics(rows.temperature, cols.temperature, rows.override, cols.override,
                              res, rows, cols, P0)
    grad = None
    if need_grad:
        C64 = C.astype(np.float64)
        full = cfg.grad_mode is GradMode.FULL
        grad_C = P.astype(np.float64) * scale
        grad_P0 = sinkhorn_backward(iterates.astype(np.float64, copy=False), C64 * scale,
                                    cfg.sinkhorn.eps_stab)
        half = 0.5 * grad_P0
        grad_C += _softmax_rows_backward(C64, rows, half, cfg.softmax.delta, full)
        grad_C += _softmax_rows_backward(C64.T, _transposed(cols), half.T, cfg.softmax.delta, full).T
        grad = _distance_backward(x.astype(np.float64), y.astype(np.float64), C64, grad_C)
    return loss, P, diag, grad


def _is_single(x):
    if isinstance(x, PointSet):
        return True
    if isinstance(x, PointSetBatch):
        return False
    if isinstance(x, np.ndarray):
        return x.ndim <= 2
    items = list(x)
    # a list of coordinate rows is one set; a list of arrays is a batch
    return bool(items) and not isinstance(items[0], PointSet) and np.ndim(items[0]) == 1


def _pairs(pred, truth):
    single = _is_single(pred)
    pb = as_batch(pred)
    tb = as_batch(truth)
    if pb.B != tb.B:
        raise BatchMismatch(f"batch sizes differ: {pb.B} vs {tb.B}")
    if pb.d != tb.d:
        raise DimensionMismatch(f"dimension mismatch: {pb.d} vs {tb.d}")
    return single, pb, tb


def _run(pred, truth, cfg, need_grad, frozen=None):
    cfg = cfg or ApmlConfig()
    single, pb, tb = _pairs(pred, truth)
    B = pb.B
    losses, plans, diags, grads = [], [], [], []
    for b in range(B):
        x, y = pb[b].points, tb[b].points
        dtype = np.result_type(x, y)
        ref = frozen.diagnostics[b] if frozen is not None else None
        loss, P, diag, grad = _element(x.astype(dtype, copy=False), y.astype(dtype, copy=False),
                                       cfg, need_grad, ref)
        losses.append(loss)
        plans.append(P)
        diags.append(diag)
        if need_grad:
            grads.append(grad / B)
    losses = np.asarray(losses)
    grad_pred = None
    if need_grad:
        grad_pred = grads[0] if single else tuple(grads)
    return LossResult(float(losses.mean()), losses, tuple(plans), tuple(diags), grad_pred)


def apml_forward(pred, truth, cfg: ApmlConfig | None = None) -> LossResult:
    """Evaluate the loss for a batch (or a single pair) of point sets.

    ``pred`` and ``truth`` may be ``PointSet`` / ``(n, d)`` arrays, ``(B, n, d)``
    arrays, lists of sets, or ``PointSetBatch`` instances.
    """
    return _run(pred, truth, cfg, need_grad=False)


def apml_gradient(pred, truth, cfg: ApmlConfig | None = None) -> LossResult:
    """Loss plus ``grad_pred``, the derivative with respect to every predicted coordinate.

    ``grad_pred`` is an array when a single set was given and a tuple of
    arrays (one per batch element) otherwise.
    """
    return _run(pred, truth, cfg, need_grad=True)


def apml_forward_fixed_temperature(pred, truth, reference: LossResult, cfg: ApmlConfig | None = None) -> LossResult:
    """Forward pass reusing the temperatures and override flags of ``reference``.

    This is the function whose derivative ``GradMode.DETACHED`` computes.
    """
    return _run(pred, truth, cfg, need_grad=False, frozen=reference)
