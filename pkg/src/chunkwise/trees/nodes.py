from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from ..core import InvalidArgumentError


@dataclass(frozen=True)
class Leaf:
    value: Union[int, float]
    region_score: float
    n_samples: int = 0


@dataclass(frozen=True)
class Internal:
    """Routes ``x`` left iff ``x[feature_index] < threshold``."""

    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"
    n_samples: int = 0


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 8
    min_leaf_samples: int = 1
    msop_stop_threshold: float = 0.95

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise InvalidArgumentError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_leaf_samples < 1:
            raise InvalidArgumentError(f"min_leaf_samples must be >= 1, got {self.min_leaf_samples}")
        if not 0 <= self.msop_stop_threshold <= 1:
            raise InvalidArgumentError(
                f"msop_stop_threshold must be in [0, 1], got {self.msop_stop_threshold}"
            )


def max_feature_index(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return -1
    return max(tree.feature_index, max_feature_index(tree.left), max_feature_index(tree.right))


def predict(tree: TreeNode, x: Sequence[float]):
    needed = max_feature_index(tree)
    if len(x) <= needed:
        raise InvalidArgumentError(
            f"feature vector has {len(x)} entries, tree uses index {needed}"
        )
    return _walk(tree, x)


def _walk(node: TreeNode, x: Sequence[float]):
    while isinstance(node, Internal):
        node = node.left if x[node.feature_index] < node.threshold else node.right
    return node.value


def node_count(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 1
    return 1 + node_count(tree.left) + node_count(tree.right)


def depth(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(tree.left), depth(tree.right))


def leaves(tree: TreeNode) -> list[Leaf]:
    if isinstance(tree, Leaf):
        return [tree]
    return leaves(tree.left) + leaves(tree.right)


def is_classification(tree: TreeNode) -> bool:
    return all(isinstance(leaf.value, int) and not isinstance(leaf.value, bool) for leaf in leaves(tree))
