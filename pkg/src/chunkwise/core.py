"""Domain types and the three scoring functions shared by learners and evaluators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence


class ChunkwiseError(Exception):
    """Base class for library errors."""


class InvalidArgumentError(ChunkwiseError, ValueError):
    pass


class OutOfGridError(ChunkwiseError, ValueError):
    pass


class StateError(ChunkwiseError, RuntimeError):
    pass


@dataclass(frozen=True)
class ChunkGrid:
    """Ordered set of admissible chunk-sizes."""

    values: tuple[int, ...] = tuple(range(1, 11))

    def __post_init__(self) -> None:
        vals = tuple(int(v) for v in self.values)
        if not vals:
            raise InvalidArgumentError("chunk grid must not be empty")
        if any(v < 1 for v in vals):
            raise InvalidArgumentError(f"chunk-sizes must be >= 1, got {vals}")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise InvalidArgumentError(f"chunk grid must be strictly increasing, got {vals}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __contains__(self, cs: object) -> bool:
        return cs in self.values

    def index(self, cs: int) -> int:
        try:
            return self.values.index(cs)
        except ValueError:
            raise OutOfGridError(f"chunk-size {cs!r} is not in grid {self.values}") from None

    @property
    def max(self) -> int:
        return self.values[-1]

    @property
    def min(self) -> int:
        return self.values[0]


DEFAULT_GRID = ChunkGrid()

FEATURE_NAMES = ("ms", "mflop", "n_thr", "n_ite")


@dataclass(frozen=True)
class FeatureVector:
    """Run-time description of one loop instance."""

    ms: int
    mflop: float
    n_thr: int
    n_ite: int

    def __post_init__(self) -> None:
        for name in FEATURE_NAMES:
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidArgumentError(f"feature {name} must be finite, got {v!r}")
        if self.ms < 1:
            raise InvalidArgumentError(f"ms must be positive, got {self.ms}")
        if self.mflop < 0:
            raise InvalidArgumentError(f"mflop must be non-negative, got {self.mflop}")
        if self.n_thr < 1:
            raise InvalidArgumentError(f"n_thr must be >= 1, got {self.n_thr}")
        if self.n_ite < 1:
            raise InvalidArgumentError(f"n_ite must be >= 1, got {self.n_ite}")

    def as_list(self) -> list[float]:
        return [float(self.ms), float(self.mflop), float(self.n_thr), float(self.n_ite)]


@dataclass(frozen=True)
class BrutExample:
    """A feature vector together with its performance at every grid chunk-size.

    ``perf`` is stored as a tuple aligned with ``grid.values`` (MFlop/s).
    """

    features: FeatureVector
    perf: tuple[float, ...]
    grid: ChunkGrid = DEFAULT_GRID

    def __post_init__(self) -> None:
        perf = tuple(float(p) for p in self.perf)
        if len(perf) != len(self.grid):
            raise InvalidArgumentError(
                f"perf has {len(perf)} entries, grid has {len(self.grid)}"
            )
        for cs, p in zip(self.grid, perf):
            if not (p > 0 and math.isfinite(p)):
                raise InvalidArgumentError(f"performance at cs={cs} must be positive and finite, got {p!r}")
        object.__setattr__(self, "perf", perf)

    @classmethod
    def from_map(cls, features: FeatureVector, perf: Mapping[int, float],
                 grid: ChunkGrid = DEFAULT_GRID) -> "BrutExample":
        if set(perf) != set(grid.values):
            raise InvalidArgumentError(
                f"perf map keys {sorted(perf)} do not match grid {grid.values}"
            )
        return cls(features, tuple(perf[cs] for cs in grid), grid)

    def perf_map(self) -> dict[int, float]:
        return dict(zip(self.grid.values, self.perf))

    def perf_at(self, cs: int) -> float:
        return self.perf[self.grid.index(cs)]

    @property
    def best_perf(self) -> float:
        return max(self.perf)

    @property
    def best_chunk(self) -> int:
        return argmax_chunk(self.perf, self.grid)


@dataclass(frozen=True)
class AugmentedExample:
    """Feature vector extended with a chunk-size, targeting the measured performance."""

    features: FeatureVector
    cs: int
    target_perf: float

    def as_list(self) -> list[float]:
        return self.features.as_list() + [float(self.cs)]


def argmax_chunk(perf: Sequence[float], grid: ChunkGrid = DEFAULT_GRID) -> int:
    """Chunk-size with the highest performance; ties go to the smallest chunk-size."""
    best_i = 0
    for i in range(1, len(perf)):
        if perf[i] > perf[best_i]:
            best_i = i
    return grid.values[best_i]


def _check_lengths(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise InvalidArgumentError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise InvalidArgumentError("inputs must be non-empty")


def accuracy(predictions: Sequence[int], targets: Sequence[int]) -> float:
    _check_lengths(predictions, targets)
    hits = sum(1 for p, t in zip(predictions, targets) if p == t)
    return hits / len(targets)


def mse(predicted_perf: Sequence[float], actual_perf: Sequence[float]) -> float:
    _check_lengths(predicted_perf, actual_perf)
    return math.fsum((p - a) ** 2 for p, a in zip(predicted_perf, actual_perf)) / len(actual_perf)


def normalized_perf(example: BrutExample, cs: int) -> float:
    """Per(x, cs) / max over the grid of Per(x, .)."""
    if cs not in example.grid:
        raise OutOfGridError(f"prediction {cs!r} is outside grid {example.grid.values}")
    return example.perf_at(cs) / example.best_perf


def msop(model: Callable[[FeatureVector], int], examples: Iterable[BrutExample]) -> float:
    """Mean ratio of achieved to best-possible performance over ``examples``."""
    examples = list(examples)
    if not examples:
        raise InvalidArgumentError("msop needs at least one example")
    return msop_of_choices([model(ex.features) for ex in examples], examples)


def msop_of_choices(choices: Sequence[int], examples: Sequence[BrutExample]) -> float:
    """MSOP of an explicit per-example list of chosen chunk-sizes."""
    _check_lengths(choices, examples)
    ratios = [normalized_perf(ex, cs) for ex, cs in zip(examples, choices)]
    return math.fsum(ratios) / len(ratios)


def region_msop(cs: int, examples: Sequence[BrutExample]) -> float:
    """MSOP of the constant predictor ``cs`` on a region; empty regions score 1.0."""
    if not examples:
        return 1.0
    return math.fsum(normalized_perf(ex, cs) for ex in examples) / len(examples)


def argmax_predictor(ex_lookup: Mapping[FeatureVector, BrutExample]) -> Callable[[FeatureVector], int]:
    """Oracle predictor that returns each known example's best chunk-size."""
    def predict(x: FeatureVector) -> int:
        return ex_lookup[x].best_chunk
    return predict
