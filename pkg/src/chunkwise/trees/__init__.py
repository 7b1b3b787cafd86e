"""Binary decision trees sharing one node representation."""

from ._backend import BACKEND
from .growth import (
    fit_classifier_tree,
    fit_custom_tree,
    fit_regressor_tree,
    grow_classifier,
    grow_custom,
    grow_regressor,
)
from .nodes import Internal, Leaf, TreeConfig, TreeNode, depth, is_classification, leaves, node_count, predict

__all__ = [
    "BACKEND",
    "Internal",
    "Leaf",
    "TreeConfig",
    "TreeNode",
    "depth",
    "fit_classifier_tree",
    "fit_custom_tree",
    "fit_regressor_tree",
    "grow_classifier",
    "grow_custom",
    "grow_regressor",
    "is_classification",
    "leaves",
    "node_count",
    "predict",
]
