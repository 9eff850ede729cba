"""Adaptive probabilistic matching loss (APML) for unordered point sets.

The loss builds soft correspondences from pairwise distances with a
per-row/per-column temperature chosen in closed form, refines them with a
fixed number of Sinkhorn steps, and returns the transport-weighted cost.
Reference metrics, transport sparsity analysis and a small fitting harness
are included.
"""

from . import kernels
from .assign import (
    AdaptiveSoftmaxConfig,
    SoftmaxDiagnostics,
    adaptive_softmax_vec,
    adaptive_temperature,
    directional_assignments,
    local_gap,
    normalize_costs,
    symmetrize,
)
from .errors import (
    APMLError,
    BatchMismatch,
    DegenerateMarginal,
    DimensionMismatch,
    DivergenceError,
    EmptyInput,
    FormatError,
    NonFiniteInput,
    NonPositiveTemperature,
    OracleLimit,
    ParseError,
)
from .fit import FitConfig, FitTrace, LossKind, fit_pointset
from .geometry import PointSet, PointSetBatch, cost_matrix, squared_cost_matrix
from .io import PointCloudFormat, load_pointcloud, save_pointcloud
from .loss import (
    ApmlConfig,
    GradMode,
    LossResult,
    Reduction,
    apml_forward,
    apml_forward_fixed_temperature,
    apml_gradient,
)
from .metrics import (
    EmdNormalization,
    MetricReport,
    chamfer_l1,
    chamfer_l2,
    compute_metrics,
    emd_bruteforce,
    emd_exact,
    f1_score,
)
from .shapes import Shape, generate_shape
from .sinkhorn import MarginalResiduals, SinkhornConfig, sinkhorn_normalize
from .transport import SparseTransport, SparsityReport, sparsity_stats, threshold_sparsify

__version__ = "0.1.0"
