"""Greedy recursive growth for the custom MSOP tree, the entropy classifier and the MSE regressor."""

from __future__ import annotations

import math

import numpy as np

from ..core import ChunkGrid, InvalidArgumentError
from ..dataio import AugmentedDataset, BrutDataset, LabeledDataset
from . import _backend
from .nodes import Internal, Leaf, TreeConfig, TreeNode

# A split must beat the unsplit score by this much per sample to count as an improvement.
IMPROVEMENT_TOL = 1e-12


def _threshold(lo: float, hi: float) -> float:
    mid = (lo + hi) / 2.0
    # adjacent floats: the midpoint can round onto lo, which would send lo right
    if not (lo < mid):
        mid = hi
    return mid


def _sorted_feature(X: np.ndarray, idx: np.ndarray, j: int) -> tuple[np.ndarray, np.ndarray]:
    order = idx[np.argsort(X[idx, j], kind="stable")]
    return order, np.ascontiguousarray(X[order, j])


def _check_matrix(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidArgumentError("cannot fit a tree on an empty dataset")
    if not np.all(np.isfinite(X)):
        raise InvalidArgumentError("features must be finite")
    return X


# --- custom MSOP tree ------------------------------------------------------

def normalize_rows(perf) -> np.ndarray:
    perf = np.ascontiguousarray(perf, dtype=np.float64)
    return np.ascontiguousarray(perf / perf.max(axis=1, keepdims=True))


def best_leaf_chunk(ratios: np.ndarray) -> tuple[int, float]:
    """Line search over the grid: column index maximizing region MSOP, and that MSOP.

    ``ratios`` rows are per-example normalized performances. Ties go to the
    smaller chunk-size.
    """
    n = ratios.shape[0]
    if n == 0:
        return 0, 1.0
    best_c, best_sum = 0, -math.inf
    for c in range(ratios.shape[1]):
        s = math.fsum(ratios[:, c])
        if s > best_sum:
            best_c, best_sum = c, s
    return best_c, best_sum / n


def grow_custom(X, perf, grid: ChunkGrid, config: TreeConfig = TreeConfig(), kernels=None) -> TreeNode:
    """Fit a classification tree that maximizes MSOP directly.

    ``X`` is (n, F) features, ``perf`` is (n, |grid|) performances.
    """
    kernels = kernels or _backend.kernels
    X = _check_matrix(X)
    R = normalize_rows(perf)
    if R.shape != (X.shape[0], len(grid)):
        raise InvalidArgumentError(f"perf shape {R.shape} does not match ({X.shape[0]}, {len(grid)})")
    values = grid.values
    min_leaf = config.min_leaf_samples

    def grow(idx: np.ndarray, level: int) -> TreeNode:
        n = idx.shape[0]
        c, region = best_leaf_chunk(R[idx])
        leaf = Leaf(values[c], region, n)
        if region >= config.msop_stop_threshold or level >= config.max_depth or n < 2 * min_leaf:
            return leaf
        parent_sum = region * n
        best_score, best = -math.inf, None
        for j in range(X.shape[1]):
            order, xs = _sorted_feature(X, idx, j)
            score, pos = kernels.msop_split(xs, np.ascontiguousarray(R[order]), min_leaf)
            if pos >= 0 and score > best_score:
                best_score, best = score, (j, order, xs, pos)
        if best is None or not best_score > parent_sum + IMPROVEMENT_TOL * n:
            return leaf
        j, order, xs, pos = best
        return Internal(j, _threshold(float(xs[pos - 1]), float(xs[pos])),
                        grow(order[:pos], level + 1), grow(order[pos:], level + 1), n)

    return grow(np.arange(X.shape[0]), 0)


def fit_custom_tree(data: BrutDataset, config: TreeConfig = TreeConfig(), kernels=None) -> TreeNode:
    if len(data) == 0:
        raise InvalidArgumentError("cannot fit a tree on an empty dataset")
    return grow_custom(data.feature_matrix(), data.perf_matrix(), data.grid, config, kernels)


# --- classical entropy classifier ------------------------------------------

def _plogp_table(n: int) -> np.ndarray:
    c = np.arange(n + 1, dtype=np.float64)
    table = np.zeros(n + 1)
    table[1:] = c[1:] * np.log2(c[1:])
    return table


def grow_classifier(X, labels, grid: ChunkGrid, config: TreeConfig = TreeConfig(), kernels=None) -> TreeNode:
    """Information-gain tree; ``labels`` are chunk-sizes from ``grid``."""
    kernels = kernels or _backend.kernels
    X = _check_matrix(X)
    y = np.array([grid.index(int(v)) for v in labels], dtype=np.int64)
    if y.shape[0] != X.shape[0]:
        raise InvalidArgumentError("labels and features differ in length")
    g = len(grid)
    plogp = _plogp_table(X.shape[0])
    min_leaf = config.min_leaf_samples

    def grow(idx: np.ndarray, level: int) -> TreeNode:
        n = idx.shape[0]
        counts = np.bincount(y[idx], minlength=g)
        c = int(np.argmax(counts))
        leaf = Leaf(grid.values[c], float(counts[c] / n), n)
        if counts[c] == n or level >= config.max_depth or n < 2 * min_leaf:
            return leaf
        best_cost, best = math.inf, None
        for j in range(X.shape[1]):
            order, xs = _sorted_feature(X, idx, j)
            cost, pos = kernels.entropy_split(xs, np.ascontiguousarray(y[order]), g, min_leaf, plogp)
            if pos >= 0 and cost < best_cost:
                best_cost, best = cost, (j, order, xs, pos)
        if best is None:
            return leaf
        j, order, xs, pos = best
        return Internal(j, _threshold(float(xs[pos - 1]), float(xs[pos])),
                        grow(order[:pos], level + 1), grow(order[pos:], level + 1), n)

    return grow(np.arange(X.shape[0]), 0)


def fit_classifier_tree(data: LabeledDataset, config: TreeConfig = TreeConfig(), kernels=None) -> TreeNode:
    if len(data) == 0:
        raise InvalidArgumentError("cannot fit a tree on an empty dataset")
    X = np.array([fv.as_list() for fv, _ in data.pairs], dtype=np.float64)
    return grow_classifier(X, [cs for _, cs in data.pairs], data.grid, config, kernels)


# --- MSE regressor ---------------------------------------------------------

def grow_regressor(X, y, config: TreeConfig = TreeConfig(), kernels=None) -> TreeNode:
    kernels = kernels or _backend.kernels
    X = _check_matrix(X)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise InvalidArgumentError("targets and features differ in length")
    min_leaf = config.min_leaf_samples

    def grow(idx: np.ndarray, level: int) -> TreeNode:
        n = idx.shape[0]
        yr = y[idx]
        mean = math.fsum(yr) / n
        leaf = Leaf(float(mean), math.fsum((yr - mean) ** 2) / n, n)
        if yr.max() == yr.min() or level >= config.max_depth or n < 2 * min_leaf:
            return leaf
        best_cost, best = math.inf, None
        for j in range(X.shape[1]):
            order, xs = _sorted_feature(X, idx, j)
            # centering keeps the sum-of-squares identity well conditioned
            cost, pos = kernels.sse_split(xs, np.ascontiguousarray(y[order] - mean), min_leaf)
            if pos >= 0 and cost < best_cost:
                best_cost, best = cost, (j, order, xs, pos)
        if best is None:
            return leaf
        j, order, xs, pos = best
        return Internal(j, _threshold(float(xs[pos - 1]), float(xs[pos])),
                        grow(order[:pos], level + 1), grow(order[pos:], level + 1), n)

    return grow(np.arange(X.shape[0]), 0)


def fit_regressor_tree(data: AugmentedDataset, config: TreeConfig = TreeConfig(), kernels=None) -> TreeNode:
    if len(data) == 0:
        raise InvalidArgumentError("cannot fit a tree on an empty dataset")
    X = np.array([row.as_list() for row in data.rows], dtype=np.float64)
    y = np.array([row.target_perf for row in data.rows], dtype=np.float64)
    return grow_regressor(X, y, config, kernels)
