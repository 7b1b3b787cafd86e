"""Exhaustive reference for the custom tree, written without the split kernels.

Every quantity is recomputed from ``BrutExample`` records with ``region_msop``.
"""

from chunkwise.core import region_msop
from chunkwise.trees import Internal, Leaf

TIE = 1e-9


def line_search(examples, grid):
    scores = [region_msop(cs, examples) for cs in grid]
    best = max(scores)
    return grid.values[scores.index(best)], best


def candidates(examples, grid, min_leaf):
    """All (score, feature, threshold) splits with weighted score sum_k N_k * MSOP_k."""
    out = []
    for j in range(4):
        values = sorted({e.features.as_list()[j] for e in examples})
        for lo, hi in zip(values, values[1:]):
            t = (lo + hi) / 2
            left = [e for e in examples if e.features.as_list()[j] < t]
            right = [e for e in examples if not e.features.as_list()[j] < t]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            score = len(left) * line_search(left, grid)[1] + len(right) * line_search(right, grid)[1]
            out.append((score, j, t))
    return out


def check_tree(tree, examples, grid, config, level=0, report=None):
    """Walk ``tree`` against the training ``examples``; return a list of violations."""
    report = [] if report is None else report
    n = len(examples)
    value, region = line_search(examples, grid)
    cands = candidates(examples, grid, config.min_leaf_samples)
    best = max((c[0] for c in cands), default=None)
    if isinstance(tree, Leaf):
        if abs(region_msop(tree.value, examples) - region) > 1e-12:
            report.append(f"leaf {tree.value} is not a line-search maximum ({region})")
        stopped = (region >= config.msop_stop_threshold or level >= config.max_depth
                   or n < 2 * config.min_leaf_samples)
        if not stopped and best is not None and best > n * region + TIE:
            report.append(f"leaf at level {level} left an improving split unused")
        return report
    if best is None:
        report.append("split where no candidate exists")
        return report
    ties = sorted((j, t) for s, j, t in cands if s >= best - TIE)
    if (tree.feature_index, tree.threshold) != ties[0]:
        report.append(f"split {(tree.feature_index, tree.threshold)} != oracle {ties[0]} (score {best})")
    if not best > n * region:
        report.append("accepted split does not improve the weighted score")
    j, t = tree.feature_index, tree.threshold
    check_tree(tree.left, [e for e in examples if e.features.as_list()[j] < t], grid, config, level + 1, report)
    check_tree(tree.right, [e for e in examples if not e.features.as_list()[j] < t], grid, config, level + 1, report)
    return report


def internal_nodes(tree):
    if isinstance(tree, Internal):
        return [tree] + internal_nodes(tree.left) + internal_nodes(tree.right)
    return []
