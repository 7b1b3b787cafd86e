import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chunkwise.core import BrutExample, ChunkGrid, FeatureVector, InvalidArgumentError
from chunkwise.dataio import (
    BrutDataset,
    ParseError,
    Standardizer,
    augment,
    derive_labels,
    format_brut_csv,
    kfold,
    load_brut_csv,
    read_brut_csv,
    regroup,
    save_brut_csv,
    shuffle_split,
    split_indices,
)

from conftest import random_dataset

HEADER = "ms,mflop,n_thr,n_ite," + ",".join(f"perf_cs_{c}" for c in range(1, 11))


def _csv(rows):
    return io.StringIO(HEADER + "\n" + "".join(r + "\n" for r in rows))


def test_toy2_labels(toy2):
    labeled = derive_labels(toy2)
    assert [label for _, label in labeled.pairs] == [2, 1]


def test_flat_perf_labels_smallest_chunk():
    ex = BrutExample(FeatureVector(1, 0.0, 1, 1), (7.0,) * 10)
    assert derive_labels(BrutDataset(ChunkGrid(), (ex,))).pairs[0][1] == 1


def test_toy2_augmentation_rows(toy2):
    rows = augment(toy2).rows
    got = [(r.features.mflop, r.cs, r.target_perf) for r in rows]
    assert got == [(2.3, 1, 1000.0), (2.3, 2, 2100.0), (1.5, 1, 2500.0), (1.5, 2, 1200.0)]


def test_augment_empty_and_default_size(default_data):
    assert len(augment(BrutDataset(ChunkGrid(), ()))) == 0
    assert len(augment(default_data)) == 2880


def test_read_valid_csv():
    data = read_brut_csv(_csv(["100,0.01,4,25," + ",".join(str(10 * c) for c in range(1, 11))]))
    assert len(data) == 1 and data.grid == ChunkGrid()
    assert data.examples[0].best_chunk == 10


def test_zero_perf_reports_location():
    perf = ["5.0"] * 10
    perf[2] = "0"
    with pytest.raises(ParseError) as err:
        read_brut_csv(_csv(["1,1.0,1,1," + ",".join(["5.0"] * 10), "1,1.0,1,1," + ",".join(perf)]))
    assert err.value.row == 3 and err.value.column == "perf_cs_3"


@pytest.mark.parametrize("text,column", [
    ("ms,mflop,n_thr\n", "n_ite"),
    (HEADER + "\nx,1.0,1,1," + ",".join(["1"] * 10) + "\n", "ms"),
    (HEADER + "\n1,1.0,1\n", "n_ite"),
])
def test_malformed_csv(text, column):
    with pytest.raises(ParseError) as err:
        read_brut_csv(io.StringIO(text))
    assert err.value.column == column


def test_empty_data_section():
    with pytest.raises(ParseError):
        read_brut_csv(_csv([]))
    with pytest.raises(ParseError):
        read_brut_csv(io.StringIO(""))


def test_save_load_bit_identical(tmp_path, default_data):
    path = tmp_path / "d.csv"
    save_brut_csv(default_data, path)
    back = load_brut_csv(path)
    assert back.examples == default_data.examples
    assert format_brut_csv(back) == path.read_text()


def test_split_sizes(default_data):
    train, test = shuffle_split(default_data, 2 / 3, seed=0)
    assert (len(train), len(test)) == (192, 96)
    assert [len(p) for p in split_indices(3, 0.5, 0)] == [2, 1]
    with pytest.raises(InvalidArgumentError):
        split_indices(3, 1.0, 0)


def test_split_deterministic():
    assert split_indices(50, 2 / 3, 7) == split_indices(50, 2 / 3, 7)
    assert split_indices(50, 2 / 3, 7) != split_indices(50, 2 / 3, 8)


def test_kfold_sizes():
    assert kfold(192, 3, 0).fold_sizes() == [64, 64, 64]
    assert sorted(kfold(10, 3, 0).fold_sizes(), reverse=True) == [4, 3, 3]
    plan = kfold(192, 3, 0)
    assert [len(plan.train_indices(f)) for f in range(3)] == [128, 128, 128]
    with pytest.raises(InvalidArgumentError):
        kfold(10, 1, 0)
    with pytest.raises(InvalidArgumentError):
        kfold(2, 3, 0)


def test_fold_plan_text():
    text = kfold(5, 2, 3).to_text()
    assert text.startswith("fold 0: ") and text.count("\n") == 2


def test_standardizer_round_trip():
    X = np.array([[1.0, 5.0], [3.0, 5.0]])
    s = Standardizer.fit(X)
    assert s.std == (1.0, 1.0)
    assert np.allclose(s.transform(X), [[-1.0, 0.0], [1.0, 0.0]])
    assert Standardizer.from_dict(s.to_dict()) == s


# --- properties --------------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30), st.integers(1, 10))
def test_augment_round_trip(seed, n, k):
    grid = ChunkGrid(tuple(range(1, k + 1)))
    data = random_dataset(np.random.default_rng(seed), n, grid)
    rows = augment(data)
    assert len(rows) == n * k
    assert regroup(rows, grid) == list(data.examples)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=20))
def test_labels_invariant_under_scaling(seed, factors):
    data = random_dataset(np.random.default_rng(seed), len(factors))
    scaled = BrutDataset(data.grid, tuple(
        BrutExample(e.features, tuple(p * f for p in e.perf), e.grid) for e, f in zip(data.examples, factors)))
    assert derive_labels(scaled) == derive_labels(data)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 500), st.floats(0.01, 0.99), st.integers(0, 2**63 - 1))
def test_split_partitions(n, ratio, seed):
    train, test = split_indices(n, ratio, seed)
    assert sorted(train + test) == list(range(n))
    assert not set(train) & set(test)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 300), st.integers(2, 10), st.integers(0, 2**63 - 1))
def test_kfold_balanced_partition(n, k, seed):
    if k > n:
        return
    sizes = kfold(n, k, seed).fold_sizes()
    assert sum(sizes) == n and max(sizes) - min(sizes) <= 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 20))
def test_csv_round_trip_random(seed, n):
    data = random_dataset(np.random.default_rng(seed), n)
    back = read_brut_csv(io.StringIO(format_brut_csv(data)))
    assert back.examples == data.examples
