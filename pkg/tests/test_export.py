import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import minicpp
from chunkwise.core import ChunkGrid, FeatureVector, InvalidArgumentError
from chunkwise.export import (
    FORMAT_VERSION,
    LoadError,
    UnsupportedModelError,
    dumps_model,
    emit_tree_source,
    export_model_source,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from chunkwise.models import equal_share_model, fit_posto, fit_preto, random_guess
from chunkwise.trees import Internal, Leaf, TreeConfig, predict

from conftest import random_dataset
from split_oracle import internal_nodes

SAMPLE_TREE = Internal(1, 0.4, Leaf(2, 1.0, 1), Internal(0, 1.0, Leaf(2, 1.0, 1), Leaf(1, 1.0, 1), 2), 3)

SAMPLE_SOURCE = """\
template <typename T>
inline int decisionTree(const std::vector<T>& featureVector) {
    if (featureVector[1] < 0.4) {
        return 2;
    }
    else {
        if (featureVector[0] < 1.0) {
            return 2;
        }
        else {
            return 1;
        }
    }
}
"""


def boundary_inputs(tree, rng, per_node=4):
    """Inputs sitting exactly on, and one ulp below, every threshold."""
    out = []
    for node in internal_nodes(tree):
        for v in (node.threshold, math.nextafter(node.threshold, -math.inf)):
            for _ in range(per_node):
                x = list(rng.uniform(0.0, 10.0, 4))
                x[node.feature_index] = v
                out.append(x)
    return out


# --- code generation -------------------------------------------------------------

def test_sample_source_exact():
    assert emit_tree_source(SAMPLE_TREE) == SAMPLE_SOURCE
    conditions = [ln.strip() for ln in SAMPLE_SOURCE.splitlines() if ln.strip().startswith("if")]
    assert conditions == ["if (featureVector[1] < 0.4) {", "if (featureVector[0] < 1.0) {"]


def test_sample_source_runs_in_interpreter():
    program = minicpp.parse(emit_tree_source(SAMPLE_TREE))
    assert minicpp.run(program, [0.5, 0.3]) == 2
    assert minicpp.run(program, [2.0, 0.9]) == 1
    assert minicpp.run(program, [1.0, 0.4]) == 1  # equality takes the else branch


def test_single_leaf_source():
    src = emit_tree_source(Leaf(4, 1.0, 3), "pick", template=False)
    assert src == "int pick(const double* featureVector) {\n    return 4;\n}\n"
    assert minicpp.run(minicpp.parse(src), []) == 4


def test_regression_tree_rejected(toy2):
    post = fit_posto(toy2)
    with pytest.raises(InvalidArgumentError):
        emit_tree_source(post.inner)
    with pytest.raises(UnsupportedModelError):
        export_model_source(post)
    with pytest.raises(InvalidArgumentError):
        emit_tree_source(SAMPLE_TREE, "not a name")


def test_thresholds_use_shortest_round_trip():
    t = 0.1 + 0.2
    src = emit_tree_source(Internal(0, t, Leaf(1, 1.0, 1), Leaf(2, 1.0, 1), 2))
    assert "featureVector[0] < 0.30000000000000004)" in src
    assert minicpp.parse(src)[1] == t


def test_emission_deterministic(default_data):
    model = fit_preto(default_data, TreeConfig(msop_stop_threshold=1.0))
    assert export_model_source(model) == export_model_source(model)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["custom", "classical"]))
def test_emitted_source_matches_predict(seed, learner):
    rng = np.random.default_rng(seed)
    data = random_dataset(rng, 40, distinct=10)
    tree = fit_preto(data, TreeConfig(msop_stop_threshold=1.0), learner=learner).inner
    program = minicpp.parse(emit_tree_source(tree))
    inputs = [list(rng.uniform(0.0, 10.0, 4)) for _ in range(200)]
    inputs += boundary_inputs(tree, rng) + [e.features.as_list() for e in data.examples]
    for x in inputs:
        assert minicpp.run(program, x) == predict(tree, x)


# --- persistence -------------------------------------------------------------------

@pytest.mark.parametrize("fit", [
    lambda d: fit_preto(d), lambda d: fit_preto(d, learner="classical"), lambda d: fit_posto(d),
])
def test_save_load_predicts_identically(fit, default_data, tmp_path):
    model = fit(default_data)
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    assert back.kind == model.kind and back.grid == model.grid and back.inner == model.inner
    rng = np.random.default_rng(0)
    for _ in range(2000):
        x = FeatureVector(int(rng.integers(1, 10**6)), float(rng.uniform(0, 3000)),
                          int(rng.integers(1, 17)), int(rng.integers(1, 70_000)))
        assert back.predict(x) == model.predict(x)
    assert dumps_model(back) == path.read_text()


def test_random_guess_round_trip():
    model = random_guess(ChunkGrid(), 42)
    doc = model_to_dict(model)
    assert doc["metadata"]["seed"] == 42
    back = model_from_dict(json.loads(json.dumps(doc)))
    x = FeatureVector(1, 1.0, 1, 1)
    a, b = model.predictor(), back.predictor()
    assert [a(x) for _ in range(50)] == [b(x) for _ in range(50)]


def test_equal_share_round_trip():
    back = model_from_dict(model_to_dict(equal_share_model(ChunkGrid())))
    assert back.predict(FeatureVector(1, 1.0, 16, 245)) == 10


def test_model_file_is_deterministic(default_data, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_model(fit_preto(default_data, seed=3), a)
    save_model(fit_preto(default_data, seed=3), b)
    assert a.read_bytes() == b.read_bytes()


def _doc(toy2):
    return model_to_dict(fit_preto(toy2))


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(format_version=FORMAT_VERSION + 1),
    lambda d: d.pop("format_version"),
    lambda d: d.pop("tree"),
    lambda d: d.update(kind="Forest"),
    lambda d: d.update(grid=[3, 2]),
    lambda d: d.update(tree=None),
    lambda d: d.update(tree={"feature": 0}),
    lambda d: d.update(tree={"leaf": 1}),
    lambda d: d.update(tree={"value": "2", "score": 1.0, "n": 1}),
    lambda d: d.update(tree={"feature": -1, "threshold": 1.0, "n": 2, "left": {}, "right": {}}),
    lambda d: d.update(metadata=[]),
])
def test_load_rejects_bad_documents(toy2, mutate):
    doc = _doc(toy2)
    mutate(doc)
    with pytest.raises(LoadError):
        model_from_dict(doc)


def test_load_rejects_non_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(LoadError):
        load_model(p)
    with pytest.raises(LoadError):
        model_from_dict([])
