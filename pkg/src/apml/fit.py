"""Direct point-set fitting by plain gradient descent.

A movable cloud, initialized uniformly in the target's bounding box, is
pushed toward a fixed target by the gradient of the chosen loss. Every step
is scored with the reference metrics so losses can be compared on equal
footing.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError
from .geometry import as_points
from .loss import ApmlConfig, Reduction, apml_gradient
from .metrics import DEFAULT_TAU, EmdNormalization, chamfer_loss_and_grad, compute_metrics
from .shapes import Shape, generate_shape

__all__ = ["LossKind", "FitConfig", "FitRecord", "FitTrace", "fit_pointset", "loss_and_grad", "TRACE_COLUMNS"]

TRACE_COLUMNS = ("step", "loss", "emd_x100", "cd_l1", "cd_l2", "f1", "wall_ms")


class LossKind(str, enum.Enum):
    APML = "apml"
    CD_L1 = "cd_l1"
    CD_L2 = "cd_l2"


@dataclass(frozen=True)
class FitConfig:
    loss_kind: LossKind = LossKind.APML
    steps: int = 500
    step_size: float = 2.0
    seed: int = 7
    n_points: int = 256
    shape: Shape = Shape.SPHERE
    apml: ApmlConfig = field(default_factory=lambda: ApmlConfig(reduction=Reduction.MEAN))

    def __post_init__(self):
        object.__setattr__(self, "loss_kind", LossKind(self.loss_kind))
        object.__setattr__(self, "shape", Shape(self.shape))
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be an integer >= 1, got {self.steps}")
        if not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")


@dataclass(frozen=True)
class FitRecord:
    step: int
    loss: float
    emd_x100: float
    cd_l1: float
    cd_l2: float
    f1: float
    wall_ms: float

    def values(self):
        return dataclasses.astuple(self)


@dataclass
class FitTrace:
    config: FitConfig
    records: list
    target: np.ndarray = field(repr=False)
    final_points: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.records)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def write_csv(self, fh, timing: bool = True):
        """Write the trace as CSV; ``timing=False`` zeroes ``wall_ms`` for byte-stable output."""
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in self.records:
            row = list(r.values())
            if not timing:
                row[-1] = 0.0
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        self.write_csv(buf, timing)
        return buf.getvalue()


def loss_and_grad(kind, points, target, apml_cfg: ApmlConfig | None = None):
    kind = LossKind(kind)
    if kind is LossKind.APML:
        res = apml_gradient(points, target, apml_cfg or ApmlConfig(reduction=Reduction.MEAN))
        return res.loss, res.grad_pred
    return chamfer_loss_and_grad(points, target, squared=kind is LossKind.CD_L2)


def _initial_points(target, n, seed):
    lo, hi = target.min(axis=0), target.max(axis=0)
    rng = np.random.default_rng([seed, 1])
    return lo + (hi - lo) * rng.random((n, target.shape[1]))


def fit_pointset(cfg: FitConfig, target=None, init=None, tau: float = DEFAULT_TAU) -> FitTrace:
    """Run ``cfg.steps`` descent steps and return ``steps + 1`` records.

    ``target`` and ``init`` override the generated shape and the random
    starting cloud. Record ``k`` describes the cloud after ``k`` steps.
    """
    if target is None:
        target = generate_shape(cfg.shape, cfg.n_points, cfg.seed).points
    target = np.array(as_points(target).points, dtype=np.float64)
    if init is None:
        x = _initial_points(target, cfg.n_points, cfg.seed)
    else:
        x = np.array(as_points(init).points, dtype=np.float64)

    records = []
    elapsed = 0.0

    def evaluate(step, x, elapsed):
        t0 = time.perf_counter()
        loss, grad = loss_and_grad(cfg.loss_kind, x, target, cfg.apml)
        elapsed += time.perf_counter() - t0
        if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise DivergenceError("non-finite loss or gradient", step)
        m = compute_metrics(x, target, tau, EmdNormalization.MEAN_PER_POINT)
        records.append(FitRecord(step, loss, m.emd_times_100, m.cd_l1, m.cd_l2, m.f1, 1e3 * elapsed))
        return grad, elapsed

    grad, elapsed = evaluate(0, x, elapsed)
    for step in range(1, cfg.steps + 1):
        t0 = time.perf_counter()
        x = x - cfg.step_size * grad
        elapsed += time.perf_counter() - t0
        grad, elapsed = evaluate(step, x, elapsed)
    return FitTrace(cfg, records, target, x)
