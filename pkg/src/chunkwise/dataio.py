"""Brut dataset I/O, label derivation, feature augmentation and splitting."""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DEFAULT_GRID,
    FEATURE_NAMES,
    AugmentedExample,
    BrutExample,
    ChunkGrid,
    ChunkwiseError,
    FeatureVector,
    InvalidArgumentError,
)

PERF_PREFIX = "perf_cs_"


class ParseError(ChunkwiseError, ValueError):
    """Malformed brut CSV; carries the 1-based row and the column name."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.row = row
        self.column = column


@dataclass(frozen=True)
class BrutDataset:
    grid: ChunkGrid
    examples: tuple[BrutExample, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "examples", tuple(self.examples))
        for i, ex in enumerate(self.examples):
            if ex.grid != self.grid:
                raise InvalidArgumentError(f"example {i} grid {ex.grid.values} != dataset grid {self.grid.values}")

    def __len__(self) -> int:
        return len(self.examples)

    def subset(self, indices: Sequence[int]) -> "BrutDataset":
        return BrutDataset(self.grid, tuple(self.examples[i] for i in indices), self.provenance)

    def feature_matrix(self) -> np.ndarray:
        return np.array([ex.features.as_list() for ex in self.examples], dtype=np.float64).reshape(-1, 4)

    def perf_matrix(self) -> np.ndarray:
        return np.array([ex.perf for ex in self.examples], dtype=np.float64).reshape(-1, len(self.grid))


@dataclass(frozen=True)
class LabeledDataset:
    pairs: tuple[tuple[FeatureVector, int], ...]
    grid: ChunkGrid = DEFAULT_GRID

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(self.pairs))
        for _, label in self.pairs:
            if label not in self.grid:
                raise InvalidArgumentError(f"label {label} outside grid {self.grid.values}")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class AugmentedDataset:
    rows: tuple[AugmentedExample, ...]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: tuple[int, ...]
    seed: int

    def fold_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignments) if f == fold]

    def train_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignments) if f != fold]

    def fold_sizes(self) -> list[int]:
        return [self.assignments.count(f) for f in range(self.k)]

    def to_text(self) -> str:
        return "".join(
            f"fold {f}: {' '.join(map(str, self.fold_indices(f)))}\n" for f in range(self.k)
        )


# --- CSV -------------------------------------------------------------------

def _parse_grid(header: list[str]) -> ChunkGrid:
    if header[:4] != list(FEATURE_NAMES):
        for i, name in enumerate(FEATURE_NAMES):
            if i >= len(header) or header[i] != name:
                raise ParseError(f"expected feature column {name!r}", row=1, column=name)
    perf_cols = header[4:]
    if not perf_cols:
        raise ParseError("no perf_cs_<v> columns", row=1)
    values = []
    for col in perf_cols:
        if not col.startswith(PERF_PREFIX):
            raise ParseError("unexpected column", row=1, column=col)
        try:
            values.append(int(col[len(PERF_PREFIX):]))
        except ValueError:
            raise ParseError("chunk-size suffix is not an integer", row=1, column=col) from None
    try:
        return ChunkGrid(tuple(values))
    except InvalidArgumentError as exc:
        raise ParseError(str(exc), row=1) from None


def _parse_number(text: str, kind, row: int, column: str):
    try:
        if kind is int:
            value = int(text)
        else:
            value = float(text)
    except ValueError:
        raise ParseError(f"malformed number {text!r}", row=row, column=column) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r}", row=row, column=column)
    return value


def read_brut_csv(stream, provenance: str = "") -> BrutDataset:
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("empty file: missing header", row=1) from None
    grid = _parse_grid(header)
    examples = []
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            missing = header[len(row)] if len(row) < len(header) else None
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=rowno, column=missing)
        ms = _parse_number(row[0], int, rowno, "ms")
        mflop = _parse_number(row[1], float, rowno, "mflop")
        n_thr = _parse_number(row[2], int, rowno, "n_thr")
        n_ite = _parse_number(row[3], int, rowno, "n_ite")
        perf = []
        for col, text in zip(header[4:], row[4:]):
            p = _parse_number(text, float, rowno, col)
            if p <= 0:
                raise ParseError(f"performance must be positive, got {text!r}", row=rowno, column=col)
            perf.append(p)
        try:
            fv = FeatureVector(ms, mflop, n_thr, n_ite)
        except InvalidArgumentError as exc:
            raise ParseError(str(exc), row=rowno) from None
        examples.append(BrutExample(fv, tuple(perf), grid))
    if not examples:
        raise ParseError("dataset has no data rows")
    return BrutDataset(grid, tuple(examples), provenance)


def load_brut_csv(path: str | os.PathLike) -> BrutDataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return read_brut_csv(fh, provenance=os.path.basename(os.fspath(path)))


def format_brut_csv(data: BrutDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(FEATURE_NAMES) + [f"{PERF_PREFIX}{cs}" for cs in data.grid])
    for ex in data.examples:
        fv = ex.features
        # repr() gives the shortest string that round-trips the float exactly
        writer.writerow([fv.ms, repr(float(fv.mflop)), fv.n_thr, fv.n_ite] + [repr(p) for p in ex.perf])
    return buf.getvalue()


def save_brut_csv(data: BrutDataset, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(format_brut_csv(data))


def file_sha256(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


# --- transforms ------------------------------------------------------------

def derive_labels(data: BrutDataset) -> LabeledDataset:
    return LabeledDataset(tuple((ex.features, ex.best_chunk) for ex in data.examples), data.grid)


def augment(data: BrutDataset) -> AugmentedDataset:
    rows = tuple(
        AugmentedExample(ex.features, cs, p)
        for ex in data.examples
        for cs, p in zip(data.grid, ex.perf)
    )
    return AugmentedDataset(rows)


def regroup(rows: AugmentedDataset, grid: ChunkGrid) -> list[BrutExample]:
    """Inverse of :func:`augment` for example-major, grid-ascending rows."""
    g = len(grid)
    if len(rows) % g:
        raise InvalidArgumentError(f"{len(rows)} rows is not a multiple of grid size {g}")
    out = []
    for start in range(0, len(rows), g):
        block = rows.rows[start:start + g]
        if [r.cs for r in block] != list(grid.values) or len({r.features for r in block}) != 1:
            raise InvalidArgumentError(f"rows {start}..{start + g - 1} are not one grouped example")
        out.append(BrutExample(block[0].features, tuple(r.target_perf for r in block), grid))
    return out


# --- splitting -------------------------------------------------------------

def _permutation(n: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle of range(n) driven by PCG64."""
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def split_indices(n: int, ratio: float, seed: int) -> tuple[list[int], list[int]]:
    if not 0 < ratio < 1:
        raise InvalidArgumentError(f"ratio must be in (0, 1), got {ratio}")
    perm = _permutation(n, seed)
    n_train = math.floor(n * ratio + 0.5)
    return perm[:n_train], perm[n_train:]


def shuffle_split(data: BrutDataset, ratio: float = 2 / 3, seed: int = 0) -> tuple[BrutDataset, BrutDataset]:
    train_idx, test_idx = split_indices(len(data), ratio, seed)
    return data.subset(train_idx), data.subset(test_idx)


def kfold(data: BrutDataset | int, k: int = 3, seed: int = 0) -> FoldPlan:
    n = data if isinstance(data, int) else len(data)
    if k < 2:
        raise InvalidArgumentError(f"k must be >= 2, got {k}")
    if k > n:
        raise InvalidArgumentError(f"k={k} exceeds the number of examples ({n})")
    perm = _permutation(n, seed)
    assignments = [0] * n
    for pos, idx in enumerate(perm):
        assignments[idx] = pos % k
    return FoldPlan(k, tuple(assignments), seed)


def split_manifest_text(train: Sequence[int], test: Sequence[int], seed: int) -> str:
    return (
        f"seed: {seed}\n"
        f"train: {' '.join(map(str, train))}\n"
        f"test: {' '.join(map(str, test))}\n"
    )


# --- feature scaling -------------------------------------------------------

@dataclass(frozen=True)
class Standardizer:
    """Per-feature standardization with constants learned on training data."""

    mean: tuple[float, ...]
    std: tuple[float, ...]

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        return cls(tuple(float(m) for m in mean), tuple(float(s) for s in std))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - np.asarray(self.mean)) / np.asarray(self.std)

    def to_dict(self) -> dict:
        return {"mean": list(self.mean), "std": list(self.std)}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(tuple(float(v) for v in d["mean"]), tuple(float(v) for v in d["std"]))
