"""Synthetic performance oracle and feature helpers for the linear-algebra benchmark families.

The oracle produces bell-shaped performance-vs-chunk-size curves: a steep
drop for chunks that are too small (scheduling overhead) and a slower one for
chunks that are too large (starved threads).
"""

from __future__ import annotations

import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from .core import DEFAULT_GRID, BrutExample, ChunkGrid, ChunkwiseError, FeatureVector, InvalidArgumentError
from .dataio import BrutDataset


class CoverageError(ChunkwiseError, ValueError):
    """No block-size entry covers the requested size."""


class SpecFileError(ChunkwiseError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class BlockSizeEntry:
    family: str
    lo: int
    hi: int
    block: tuple[int, int]
    hi_inclusive: bool = True

    def covers(self, ms: int) -> bool:
        return self.lo <= ms and (ms <= self.hi if self.hi_inclusive else ms < self.hi)


_MM_SMALL, _MM_LARGE = (64, 64), (256, 256)

BLOCK_TABLE: tuple[BlockSizeEntry, ...] = (
    BlockSizeEntry("dvecdvecadd", 25_000, 1_000_000, (1, 4096)),
    BlockSizeEntry("dmatdvecmult", 250, 2500, (1, 16)),
    BlockSizeEntry("dmatdmatadd", 100, 1000, (4, 1024)),
    BlockSizeEntry("tdmattdmatadd", 100, 1000, (1024, 4)),
    BlockSizeEntry("dmattdmatadd", 100, 1000, (64, 64)),
    BlockSizeEntry("tdmatdmatadd", 100, 1000, (64, 64)),
    BlockSizeEntry("dmatdmatmult", 100, 1000, _MM_SMALL, hi_inclusive=False),
    BlockSizeEntry("dmatdmatmult", 1000, 10_000, _MM_LARGE),
    BlockSizeEntry("tdmattdmatmult", 100, 1000, _MM_SMALL, hi_inclusive=False),
    BlockSizeEntry("tdmattdmatmult", 1000, 10_000, _MM_LARGE),
    BlockSizeEntry("dmattdmatmult", 100, 1000, _MM_SMALL, hi_inclusive=False),
    BlockSizeEntry("dmattdmatmult", 1000, 10_000, _MM_LARGE),
    # no reference entry exists; a 4096-element tile distinct from the addition kernels
    BlockSizeEntry("dmatscalarmult", 100, 1000, (2, 2048)),
)

# family -> (flop kind, one-dimensional target)
FAMILIES: dict[str, tuple[str, bool]] = {
    "dvecdvecadd": ("vecadd", True),
    "dmatdvecmult": ("matvec", True),
    "dmatdmatadd": ("matadd", False),
    "tdmattdmatadd": ("matadd", False),
    "dmattdmatadd": ("matadd", False),
    "tdmatdmatadd": ("matadd", False),
    "dmatscalarmult": ("scalar", False),
    "dmatdmatmult": ("matmul", False),
    "tdmattdmatmult": ("matmul", False),
    "dmattdmatmult": ("matmul", False),
}

DATASET_FAMILIES = ("dvecdvecadd", "dmatdvecmult", "dmatdmatadd", "dmattdmatadd", "dmatscalarmult", "dmatdmatmult")
DEFAULT_THREADS = (2, 4, 6, 8, 10, 12, 14, 16)


def _family(name: str) -> str:
    key = name.lower()
    if key not in FAMILIES:
        raise InvalidArgumentError(f"unknown benchmark family {name!r}")
    return key


def lookup_block_size(family: str, ms: int) -> tuple[int, int]:
    key = _family(family)
    for entry in BLOCK_TABLE:
        if entry.family == key and entry.covers(ms):
            return entry.block
    raise CoverageError(f"no block-size entry for {key} at ms={ms}")


def is_vector_family(family: str) -> bool:
    return FAMILIES[_family(family)][1]


def n_iterations(ms: int, block: tuple[int, int], vector: bool = False) -> int:
    """Number of blocks the parallel loop iterates over.

    Vector targets are blocked along one dimension only, by ``block[1]``.
    """
    b1, b2 = block
    if ms < 1 or b1 < 1 or b2 < 1:
        raise InvalidArgumentError(f"ms and block dimensions must be positive, got {ms}, {block}")
    if vector:
        return -(-ms // b2)
    return -(-ms // b1) * -(-ms // b2)


def estimate_mflop(family: str, ms: int) -> float:
    if ms < 1:
        raise InvalidArgumentError(f"ms must be positive, got {ms}")
    kind = FAMILIES[_family(family)][0]
    if kind == "vecadd":
        flops = ms
    elif kind == "matvec":
        flops = 2 * ms * ms
    elif kind in ("matadd", "scalar"):
        flops = ms * ms
    else:
        flops = 2 * ms ** 3
    return flops * 1e-6


def make_features(family: str, ms: int, n_thr: int) -> FeatureVector:
    block = lookup_block_size(family, ms)
    return FeatureVector(ms, estimate_mflop(family, ms), n_thr, n_iterations(ms, block, is_vector_family(family)))


# --- oracle ----------------------------------------------------------------

@dataclass(frozen=True)
class OptRule:
    """Location of the performance peak as a function of (n_ite, n_thr).

    ``const``: always ``scale``.  ``share``: ``scale * n_ite / n_thr``.
    Both are clipped to ``[lo, hi]``.
    """

    kind: str = "share"
    scale: float = 0.25
    lo: float = 1.0
    hi: float = 12.0

    def __post_init__(self) -> None:
        if self.kind not in ("const", "share"):
            raise InvalidArgumentError(f"unknown rule kind {self.kind!r}")
        if not (self.scale > 0 and 0 < self.lo <= self.hi):
            raise InvalidArgumentError(f"invalid rule parameters {self}")

    def __call__(self, n_ite: int, n_thr: int) -> float:
        raw = self.scale if self.kind == "const" else self.scale * n_ite / n_thr
        return min(self.hi, max(self.lo, raw))

    def to_text(self) -> str:
        if self.kind == "const":
            return f"const {self.scale!r}"
        return f"share {self.scale!r} {self.lo!r} {self.hi!r}"

    @classmethod
    def parse(cls, text: str) -> "OptRule":
        parts = text.split()
        if not parts:
            raise InvalidArgumentError("empty rule")
        if parts[0] == "const" and len(parts) == 2:
            v = float(parts[1])
            return cls("const", v, min(v, 1.0), max(v, 1.0))
        if parts[0] == "share" and len(parts) in (2, 4):
            nums = [float(p) for p in parts[1:]]
            return cls("share", *nums)
        raise InvalidArgumentError(f"rule must be 'const <c>' or 'share <scale> [<lo> <hi>]', got {text!r}")


@dataclass(frozen=True)
class SyntheticSpec:
    family: str
    peak_perf: float = 10_000.0
    cs_opt_rule: OptRule = field(default_factory=OptRule)
    left_width: float = 0.4
    right_width: float = 0.9
    noise_sigma: float = 0.0
    seed: int = 0
    thread_sigma: float = 0.05

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", _family(self.family))
        if not self.peak_perf > 0:
            raise InvalidArgumentError("peak_perf must be positive")
        if not (self.left_width > 0 and self.right_width > 0):
            raise InvalidArgumentError("bell widths must be positive")
        if not 0 <= self.noise_sigma < 0.2:
            raise InvalidArgumentError("noise_sigma must be in [0, 0.2)")


def thread_efficiency(n_thr: int, sigma: float = 0.05) -> float:
    return n_thr / (1.0 + sigma * (n_thr - 1))


_MIN_LOG_BELL = -700.0


def bell(cs: float, peak_at: float, left_width: float, right_width: float) -> float:
    """Asymmetric Gaussian in log(cs), equal to 1 at ``peak_at``."""
    d = math.log(cs) - math.log(peak_at)
    w = left_width if d < 0 else right_width
    # clamp so the tails stay strictly positive instead of underflowing to 0
    return math.exp(max(-0.5 * (d / w) ** 2, _MIN_LOG_BELL))


def _noise(spec: SyntheticSpec, x: FeatureVector, cs: int) -> float:
    entropy = [spec.seed & 0xFFFFFFFFFFFFFFFF, x.ms, x.n_thr, x.n_ite, int(cs),
               sum(map(ord, spec.family))]
    rng = np.random.default_rng(entropy)
    while True:
        z = rng.standard_normal()
        if abs(z) <= 3.0:
            return spec.noise_sigma * float(z)


def synth_perf(spec: SyntheticSpec, x: FeatureVector, cs: int) -> float:
    if cs < 1:
        raise InvalidArgumentError(f"chunk-size must be >= 1, got {cs}")
    peak_at = spec.cs_opt_rule(x.n_ite, x.n_thr)
    value = (spec.peak_perf * thread_efficiency(x.n_thr, spec.thread_sigma)
             * bell(cs, peak_at, spec.left_width, spec.right_width))
    if spec.noise_sigma > 0:
        value *= 1.0 + _noise(spec, x, cs)
    return max(value, sys.float_info.min)


def generate_dataset(
    specs: Sequence[SyntheticSpec],
    ms_values: Mapping[str, Sequence[int]],
    thread_values: Sequence[int] = DEFAULT_THREADS,
    grid: ChunkGrid = DEFAULT_GRID,
    jobs: int = 1,
) -> BrutDataset:
    """One example per (spec, ms, n_thr) triple, in that nesting order."""
    if not specs or not thread_values:
        raise InvalidArgumentError("need at least one spec and one thread count")
    triples = []
    for spec in specs:
        sizes = ms_values.get(spec.family)
        if not sizes:
            raise InvalidArgumentError(f"no ms values for family {spec.family}")
        for ms in sizes:
            for n_thr in thread_values:
                triples.append((spec, int(ms), int(n_thr)))

    def build(triple):
        spec, ms, n_thr = triple
        x = make_features(spec.family, ms, n_thr)
        return BrutExample(x, tuple(synth_perf(spec, x, cs) for cs in grid), grid)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            examples = list(pool.map(build, triples))
    else:
        examples = [build(t) for t in triples]
    names = ",".join(dict.fromkeys(s.family for s in specs))
    return BrutDataset(grid, tuple(examples), f"synthetic:{names}")


def log_spaced_sizes(lo: int, hi: int, count: int) -> list[int]:
    if count == 1:
        return [lo]
    return [int(round(v)) for v in np.geomspace(lo, hi, count)]


# --- spec files ------------------------------------------------------------

@dataclass(frozen=True)
class GenerationPlan:
    specs: tuple[SyntheticSpec, ...]
    ms_values: dict[str, tuple[int, ...]]
    threads: tuple[int, ...] = DEFAULT_THREADS
    grid: ChunkGrid = DEFAULT_GRID
    seed: int = 0

    def with_seed(self, seed: int) -> "GenerationPlan":
        return replace(self, seed=seed, specs=tuple(replace(s, seed=seed) for s in self.specs))

    def generate(self, jobs: int = 1) -> BrutDataset:
        return generate_dataset(self.specs, self.ms_values, self.threads, self.grid, jobs)


_SECTION = re.compile(r"^\[\s*([A-Za-z0-9_ ]+?)\s*\]$")
_SPEC_KEYS = {"peak_perf", "cs_opt_rule", "left_width", "right_width", "noise_sigma", "seed",
              "ms_values", "thread_sigma"}


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


def parse_spec_text(text: str) -> GenerationPlan:
    """Parse the key-value spec format.

    ``[global]`` holds ``threads``, ``grid`` and ``seed``; every other section
    is a benchmark family and holds SyntheticSpec fields plus ``ms_values``.
    A family seed defaults to the global one.
    """
    sections: list[tuple[str, int, dict[str, tuple[str, int]]]] = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current = (m.group(1).lower(), lineno, {})
            sections.append(current)
            continue
        if "=" not in line:
            raise SpecFileError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if current is None:
            raise SpecFileError("key outside of any [section]", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in current[2]:
            raise SpecFileError(f"duplicate key {key!r}", lineno)
        current[2][key] = (value, lineno)

    threads, grid, seed = DEFAULT_THREADS, DEFAULT_GRID, 0
    specs, ms_values = [], {}
    seen = set()
    for name, lineno, items in sections:
        if name in seen:
            raise SpecFileError(f"duplicate section [{name}]", lineno)
        seen.add(name)
        if name == "global":
            for key, (value, kl) in items.items():
                try:
                    if key == "threads":
                        threads = _ints(value)
                    elif key == "grid":
                        grid = ChunkGrid(_ints(value))
                    elif key == "seed":
                        seed = int(value)
                    else:
                        raise SpecFileError(f"unknown global key {key!r}", kl)
                except (ValueError, InvalidArgumentError) as exc:
                    if isinstance(exc, SpecFileError):
                        raise
                    raise SpecFileError(f"bad value for {key!r}: {exc}", kl) from None
            continue
        if name not in FAMILIES:
            raise SpecFileError(f"unknown benchmark family [{name}]", lineno)
        kwargs = {}
        for key, (value, kl) in items.items():
            if key not in _SPEC_KEYS:
                raise SpecFileError(f"unknown key {key!r}", kl)
            try:
                if key == "ms_values":
                    sizes = _ints(value)
                    for ms in sizes:
                        lookup_block_size(name, ms)
                    ms_values[name] = sizes
                elif key == "cs_opt_rule":
                    kwargs[key] = OptRule.parse(value)
                elif key == "seed":
                    kwargs[key] = int(value)
                else:
                    kwargs[key] = float(value)
            except (ValueError, InvalidArgumentError) as exc:
                raise SpecFileError(f"bad value for {key!r}: {exc}", kl) from None
        if name not in ms_values:
            raise SpecFileError(f"section [{name}] has no ms_values", lineno)
        kwargs.setdefault("seed", seed)
        try:
            specs.append(SyntheticSpec(name, **kwargs))
        except InvalidArgumentError as exc:
            raise SpecFileError(str(exc), lineno) from None
    if not specs:
        raise SpecFileError("spec file defines no benchmark family")
    if not threads:
        raise SpecFileError("threads list is empty")
    return GenerationPlan(tuple(specs), ms_values, tuple(threads), grid, seed)


def load_spec_file(path) -> GenerationPlan:
    with open(path, encoding="utf-8") as fh:
        return parse_spec_text(fh.read())


def default_spec_text() -> str:
    return resources.files("chunkwise").joinpath("data/default_spec.ini").read_text(encoding="utf-8")


def default_plan() -> GenerationPlan:
    return parse_spec_text(default_spec_text())


def format_spec(plan: GenerationPlan) -> str:
    lines = ["[global]",
             f"threads = {' '.join(map(str, plan.threads))}",
             f"grid = {' '.join(map(str, plan.grid))}",
             f"seed = {plan.seed}"]
    for s in plan.specs:
        lines += ["", f"[{s.family}]",
                  f"ms_values = {' '.join(map(str, plan.ms_values[s.family]))}",
                  f"peak_perf = {s.peak_perf!r}",
                  f"cs_opt_rule = {s.cs_opt_rule.to_text()}",
                  f"left_width = {s.left_width!r}",
                  f"right_width = {s.right_width!r}",
                  f"noise_sigma = {s.noise_sigma!r}",
                  f"thread_sigma = {s.thread_sigma!r}",
                  f"seed = {s.seed}"]
    return "\n".join(lines) + "\n"
