"""Model persistence (JSON) and tree-to-source code generation."""

from __future__ import annotations

import json
import math
import os

from .core import ChunkGrid, ChunkwiseError, InvalidArgumentError
from .dataio import Standardizer
from .models import BlackBoxModel, ModelKind
from .trees import Internal, Leaf, TreeNode, is_classification

FORMAT_VERSION = 1


class LoadError(ChunkwiseError, ValueError):
    pass


class UnsupportedModelError(ChunkwiseError, TypeError):
    pass


def tree_to_dict(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"value": node.value, "score": node.region_score, "n": node.n_samples}
    return {
        "feature": node.feature_index,
        "threshold": node.threshold,
        "n": node.n_samples,
        "left": tree_to_dict(node.left),
        "right": tree_to_dict(node.right),
    }


def _num(d: dict, key: str, kinds=(int, float)):
    v = d.get(key)
    if isinstance(v, bool) or not isinstance(v, kinds):
        raise LoadError(f"tree record field {key!r} has invalid value {v!r}")
    return v


def tree_from_dict(d) -> TreeNode:
    if not isinstance(d, dict):
        raise LoadError(f"tree record must be an object, got {type(d).__name__}")
    if "value" in d:
        return Leaf(_num(d, "value"), float(_num(d, "score")), _num(d, "n", int))
    if "feature" in d:
        feature = _num(d, "feature", int)
        threshold = float(_num(d, "threshold"))
        if feature < 0 or not math.isfinite(threshold):
            raise LoadError(f"invalid split record feature={feature} threshold={threshold}")
        return Internal(feature, threshold, tree_from_dict(d.get("left")), tree_from_dict(d.get("right")),
                        _num(d, "n", int))
    raise LoadError("tree record is neither a leaf nor a split")


def model_to_dict(model: BlackBoxModel) -> dict:
    if model.plugin is not None:
        raise UnsupportedModelError("models wrapping external estimators cannot be serialized")
    return {
        "format_version": FORMAT_VERSION,
        "kind": model.kind.value,
        "learner": model.learner,
        "grid": list(model.grid.values),
        "scaler": model.scaler.to_dict() if model.scaler is not None else None,
        "tree": tree_to_dict(model.inner) if model.inner is not None else None,
        "metadata": model.metadata,
    }


def model_from_dict(doc) -> BlackBoxModel:
    if not isinstance(doc, dict):
        raise LoadError("model document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise LoadError(f"unsupported model format version {version!r} (expected {FORMAT_VERSION})")
    missing = {"kind", "grid", "tree", "metadata"} - doc.keys()
    if missing:
        raise LoadError(f"model document lacks {sorted(missing)}")
    try:
        kind = ModelKind(doc["kind"])
        grid = ChunkGrid(tuple(doc["grid"]))
        scaler = Standardizer.from_dict(doc["scaler"]) if doc.get("scaler") else None
    except (ValueError, TypeError, KeyError) as exc:
        raise LoadError(f"invalid model document: {exc}") from None
    tree = tree_from_dict(doc["tree"]) if doc["tree"] is not None else None
    if kind in (ModelKind.PRETO, ModelKind.POSTO) and tree is None:
        raise LoadError(f"{kind.value} model document has no tree")
    if not isinstance(doc["metadata"], dict):
        raise LoadError("metadata must be an object")
    return BlackBoxModel(kind, grid, tree, doc.get("learner"), scaler, doc["metadata"])


def dumps_model(model: BlackBoxModel) -> str:
    # json writes floats with repr(), the shortest round-tripping decimal
    return json.dumps(model_to_dict(model), indent=2, sort_keys=True, allow_nan=False) + "\n"


def save_model(model: BlackBoxModel, path: str | os.PathLike) -> None:
    text = dumps_model(model)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_model(path: str | os.PathLike) -> BlackBoxModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise LoadError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc)


# --- code generation -------------------------------------------------------

INDENT = "    "


def _emit(node: TreeNode, level: int, out: list[str]) -> None:
    pad = INDENT * level
    if isinstance(node, Leaf):
        out.append(f"{pad}return {node.value};")
        return
    out.append(f"{pad}if (featureVector[{node.feature_index}] < {node.threshold!r}) {{")
    _emit(node.left, level + 1, out)
    out.append(f"{pad}}}")
    out.append(f"{pad}else {{")
    _emit(node.right, level + 1, out)
    out.append(f"{pad}}}")


def emit_tree_source(tree: TreeNode, function_name: str = "decisionTree", template: bool = True) -> str:
    """Render a classification tree as one nested if/else function.

    The body uses only ``if``/``else``, array indexing, ``<`` and ``return``,
    so it is valid in any curly-brace language; the signature is C++.
    """
    if not is_classification(tree):
        raise InvalidArgumentError("only classification trees (integer leaves) can be exported")
    if not function_name.isidentifier():
        raise InvalidArgumentError(f"invalid function name {function_name!r}")
    out = []
    if template:
        out.append("template <typename T>")
        out.append(f"inline int {function_name}(const std::vector<T>& featureVector) {{")
    else:
        out.append(f"int {function_name}(const double* featureVector) {{")
    _emit(tree, 1, out)
    out.append("}")
    return "\n".join(out) + "\n"


def export_model_source(model: BlackBoxModel, function_name: str = "decisionTree") -> str:
    if model.kind is not ModelKind.PRETO or model.inner is None:
        raise UnsupportedModelError(f"only tree-backed PreTO models can be exported, got {model.kind.value}")
    return emit_tree_source(model.inner, function_name)
