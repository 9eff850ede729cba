"""Sparsity statistics and thresholded storage of transport matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_THRESHOLD",
    "HEATMAP_THRESHOLD",
    "CLAMP_EDGE",
    "SparsityReport",
    "SparseTransport",
    "sparsity_stats",
    "threshold_sparsify",
]

DEFAULT_THRESHOLD = 1e-3
HEATMAP_THRESHOLD = 1e-4
# in clamped histograms everything below this value lands in the first bin
CLAMP_EDGE = 0.05


@dataclass(frozen=True)
class SparsityReport:
    threshold: float
    fraction_above: float
    sparsity: float
    bin_edges: np.ndarray
    counts: np.ndarray
    n_entries: int

    def histogram_rows(self):
        """``(bin_lo, bin_hi, count)`` tuples, ready for CSV output."""
        return [(float(lo), float(hi), int(c))
                for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts)]


def _histogram(values, n_bins, clamped):
    top = float(values.max()) if values.size else 0.0
    if top <= 0.0:
        top = 1.0
    if clamped:
        if n_bins == 1 or top <= CLAMP_EDGE:
            edges = np.array([0.0, max(top, CLAMP_EDGE)])
            return edges, np.array([values.size])
        edges = np.concatenate([[0.0], np.linspace(CLAMP_EDGE, top, n_bins)])
    else:
        edges = np.linspace(0.0, top, n_bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    return edges, counts


def sparsity_stats(P, threshold: float = DEFAULT_THRESHOLD, n_bins: int = 20, clamped: bool = False) -> SparsityReport:
    """Fraction of entries strictly above ``threshold`` plus a value histogram.

    The histogram spans ``[0, max entry]``. With ``clamped=True`` the first
    bin is ``[0, 0.05)`` and the remaining ``n_bins - 1`` bins split
    ``[0.05, max]`` evenly.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    if int(n_bins) != n_bins or n_bins < 1:
        raise ValueError(f"n_bins must be an integer >= 1, got {n_bins}")
    values = np.asarray(P, dtype=np.float64).ravel()
    n = values.size
    above = int(np.count_nonzero(values > threshold))
    fraction = above / n if n else 0.0
    edges, counts = _histogram(values, int(n_bins), clamped)
    return SparsityReport(float(threshold), fraction, 1.0 - fraction, edges, counts, n)


@dataclass(frozen=True)
class SparseTransport:
    """COO triplets of the entries kept by ``threshold_sparsify``."""

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    shape: tuple
    threshold: float

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @property
    def triplets(self):
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.values.tolist()))

    @property
    def nbytes(self) -> int:
        return int(self.rows.nbytes + self.cols.nbytes + self.values.nbytes)

    @property
    def dense_nbytes(self) -> int:
        return int(self.shape[0] * self.shape[1] * self.values.itemsize)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=self.values.dtype)
        out[self.rows, self.cols] = self.values
        return out

    def to_scipy(self):
        from scipy.sparse import coo_matrix

        return coo_matrix((self.values, (self.rows, self.cols)), shape=self.shape)


def threshold_sparsify(P, threshold: float = DEFAULT_THRESHOLD) -> SparseTransport:
    """Keep entries ``>= threshold``; the rest are dropped (treated as zero)."""
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    P = np.asarray(P)
    if P.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {P.shape}")
    rows, cols = np.nonzero(P >= threshold)
    index_dtype = np.int32 if max(P.shape) < 2**31 else np.int64
    return SparseTransport(rows.astype(index_dtype), cols.astype(index_dtype), P[rows, cols].copy(),
                           P.shape, float(threshold))
