import numpy as np
import pytest

from chunkwise.core import BrutExample, ChunkGrid, FeatureVector
from chunkwise.dataio import BrutDataset
from chunkwise.synth import default_plan

GRID2 = ChunkGrid((1, 2))


def fv(x: float = 0.0, ms: int = 1, n_thr: int = 1, n_ite: int = 1) -> FeatureVector:
    return FeatureVector(ms, x, n_thr, n_ite)


@pytest.fixture
def toy2():
    """The two-example, two-chunk-size table used to illustrate feature augmentation.

    The single feature x sits in the ``mflop`` slot (index 1).
    """
    return BrutDataset(GRID2, (
        BrutExample(fv(2.3), (1000.0, 2100.0), GRID2),
        BrutExample(fv(1.5), (2500.0, 1200.0), GRID2),
    ))


def random_dataset(rng: np.random.Generator, n: int, grid: ChunkGrid = ChunkGrid(),
                   n_features: int = 2, distinct: int = 6) -> BrutDataset:
    """Small random brut set; only the first ``n_features`` features vary."""
    examples = []
    for _ in range(n):
        ms = int(rng.integers(1, distinct + 1))
        mflop = float(rng.integers(0, distinct)) / 2 if n_features > 1 else 0.0
        perf = tuple(float(p) for p in rng.uniform(100.0, 1000.0, len(grid)))
        examples.append(BrutExample(FeatureVector(ms, mflop, 1, 1), perf, grid))
    return BrutDataset(grid, tuple(examples), "random")


@pytest.fixture(scope="session")
def default_data():
    return default_plan().generate()
