"""NumPy implementations of the hot kernels.

These are the reference versions; the compiled module mirrors their
signatures and results up to floating-point summation order.
"""

import numpy as np


def pairwise_distances(x, y, squared=False):
    diff = x[:, None, :] - y[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    if squared:
        return sq
    return np.sqrt(sq)


def adaptive_softmax_rows(c, p_min, delta, eps_gap):
    """Row-wise adaptive softmax of a 2-D cost array.

    Returns ``(probs, temperature, override, argmin, second)``. Rows with a
    single column or a fired uniform override get temperature 0. ``second``
    is the index of the smallest strictly positive normalized cost, or -1
    when the row is constant.
    """
    c = np.asarray(c)
    n, k = c.shape
    rows = np.arange(n)
    argmin = np.argmin(c, axis=1)
    shifted = c - c[rows, argmin][:, None]
    positive = np.where(shifted > 0, shifted, np.inf)
    second = np.argmin(positive, axis=1)
    gap = positive[rows, second]
    constant = np.isinf(gap)
    gap = np.where(constant, 0.0, gap)
    second = np.where(constant, -1, second).astype(np.intp)

    override = (gap < eps_gap) & (k > 1)
    active = ~override & (k > 1)
    temperature = np.zeros(n, dtype=c.dtype)
    if k > 1:
        log_ratio = np.log((k - 1) * p_min / (1.0 - p_min))
        temperature[active] = log_ratio / (gap[active] + delta)

    weights = np.exp(-temperature[:, None] * shifted)
    probs = weights / weights.sum(axis=1, keepdims=True)
    probs[~active] = 1.0 / k
    return probs.astype(c.dtype, copy=False), temperature, override.astype(np.uint8), argmin.astype(np.intp), second


def sinkhorn(p, n_iter, eps_stab, keep_iterates=False):
    """Column-then-row normalization for a fixed number of iterations.

    Returns ``(p, row_dev, col_dev, iterates)`` where the deviations are
    recorded after each full iteration and ``iterates`` holds the matrix at
    the start of each iteration (or None).
    """
    p = np.array(p, copy=True)
    row_dev = np.empty(n_iter)
    col_dev = np.empty(n_iter)
    iterates = np.empty((n_iter,) + p.shape, dtype=p.dtype) if keep_iterates else None
    for it in range(n_iter):
        if keep_iterates:
            iterates[it] = p
        p /= p.sum(axis=0, keepdims=True) + eps_stab
        p /= p.sum(axis=1, keepdims=True) + eps_stab
        row_dev[it] = np.max(np.abs(p.sum(axis=1) - 1.0))
        col_dev[it] = np.max(np.abs(p.sum(axis=0) - 1.0))
    return p, row_dev, col_dev, iterates


def adaptive_softmax_cols(c, p_min, delta, eps_gap):
    probs, temperature, override, argmin, second = adaptive_softmax_rows(
        np.ascontiguousarray(np.asarray(c).T), p_min, delta, eps_gap)
    return np.ascontiguousarray(probs.T), temperature, override, argmin, second
