"""Black-box chunk-size predictors, reference baselines and the cross-validation protocol."""

from __future__ import annotations

import csv
import enum
import io
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence, Union

import numpy as np

from .core import (
    ChunkGrid,
    FeatureVector,
    InvalidArgumentError,
    OutOfGridError,
    StateError,
    msop,
    msop_of_choices,
)
from .dataio import BrutDataset, Standardizer, augment, derive_labels, kfold
from .trees import (
    TreeConfig,
    TreeNode,
    fit_classifier_tree,
    fit_custom_tree,
    fit_regressor_tree,
    node_count,
    predict,
)


class ModelKind(str, enum.Enum):
    PRETO = "PreTO"
    POSTO = "PosTO"
    RANDOM = "RandomGuess"
    EQUAL_SHARE = "EqualShare"


# A plug-in learner is a zero-argument factory returning an object with
# ``fit(X, y)`` and ``predict(X)`` (scikit-learn style).
Learner = Union[str, Callable[[], Any]]


@dataclass
class BlackBoxModel:
    kind: ModelKind
    grid: ChunkGrid
    inner: TreeNode | None = None
    learner: str | None = None
    scaler: Standardizer | None = None
    metadata: dict = field(default_factory=dict)
    plugin: Any = None

    def __post_init__(self) -> None:
        self.kind = ModelKind(self.kind)
        self._rng = None
        if self.kind is ModelKind.RANDOM:
            self._rng = np.random.default_rng(self.seed)

    @property
    def seed(self) -> int:
        return int(self.metadata.get("seed", 0))

    @property
    def trained(self) -> bool:
        if self.kind in (ModelKind.PRETO, ModelKind.POSTO):
            return self.inner is not None or self.plugin is not None
        return True

    @property
    def model_evals_per_prediction(self) -> int:
        return {ModelKind.PRETO: 1, ModelKind.POSTO: len(self.grid)}.get(self.kind, 0)

    @property
    def node_count(self) -> int | None:
        return node_count(self.inner) if self.inner is not None else None

    def _evaluate_inner(self, row: list[float]):
        """One evaluation of the wrapped classifier/regressor."""
        if self.scaler is not None:
            row = list(self.scaler.transform([row])[0])
        if self.inner is not None:
            return predict(self.inner, row)
        return self.plugin.predict(np.asarray([row], dtype=np.float64))[0]

    def predict(self, x: FeatureVector, rng: np.random.Generator | None = None) -> int:
        if not self.trained:
            raise StateError(f"{self.kind.value} model has not been trained")
        if self.kind is ModelKind.PRETO:
            cs = int(self._evaluate_inner(x.as_list()))
        elif self.kind is ModelKind.POSTO:
            base = x.as_list()
            best_cs, best = self.grid.values[0], -math.inf
            for cs in self.grid:
                p = float(self._evaluate_inner(base + [float(cs)]))
                if p > best:
                    best_cs, best = cs, p
            cs = best_cs
        elif self.kind is ModelKind.RANDOM:
            rng = rng if rng is not None else self._rng
            cs = self.grid.values[int(rng.integers(len(self.grid)))]
        else:
            cs = equal_share(x, self.grid)
        if cs not in self.grid:
            raise OutOfGridError(f"model produced {cs}, outside grid {self.grid.values}")
        return cs

    def predictor(self) -> Callable[[FeatureVector], int]:
        """A prediction callable with its own random stream, restarted from the model seed."""
        if self.kind is ModelKind.RANDOM:
            rng = np.random.default_rng(self.seed)
            return lambda x: self.predict(x, rng)
        return self.predict


def predict_chunk(model: BlackBoxModel, x: FeatureVector) -> int:
    return model.predict(x)


def equal_share(x: FeatureVector, grid: ChunkGrid) -> int:
    """One chunk per thread, capped at the largest grid value.

    On grids with gaps the share is rounded up to the next grid value.
    """
    share = -(-x.n_ite // x.n_thr)
    for cs in grid:
        if cs >= share:
            return cs
    return grid.max


def _base_metadata(config: TreeConfig | None, seed: int, timestamp: float | None) -> dict:
    meta = {"seed": int(seed), "fit_timestamp": timestamp}
    if config is not None:
        meta["config"] = asdict(config)
    return meta


def fit_preto(train: BrutDataset, config: TreeConfig = TreeConfig(), learner: Learner = "custom",
              seed: int = 0, timestamp: float | None = None) -> BlackBoxModel:
    """Optimize labels first (argmax per example), then learn features -> chunk-size."""
    if len(train) == 0:
        raise InvalidArgumentError("cannot train on an empty dataset")
    meta = _base_metadata(config, seed, timestamp)
    meta["n_train"] = len(train)
    if learner == "custom":
        tree = fit_custom_tree(train, config)
    elif learner == "classical":
        tree = fit_classifier_tree(derive_labels(train), config)
    elif callable(learner):
        labeled = derive_labels(train)
        X = np.array([fv.as_list() for fv, _ in labeled.pairs])
        scaler = Standardizer.fit(X)
        est = learner()
        est.fit(scaler.transform(X), np.array([cs for _, cs in labeled.pairs]))
        model = BlackBoxModel(ModelKind.PRETO, train.grid, None, getattr(learner, "__name__", "plugin"),
                              scaler, meta, est)
        meta["train_msop"] = msop(model.predict, train.examples)
        return model
    else:
        raise InvalidArgumentError(f"unknown PreTO learner {learner!r}")
    model = BlackBoxModel(ModelKind.PRETO, train.grid, tree, learner, None, meta)
    meta["node_count"] = node_count(tree)
    meta["train_msop"] = msop(model.predict, train.examples)
    return model


def fit_posto(train: BrutDataset, config: TreeConfig = TreeConfig(), learner: Learner = "dtr",
              seed: int = 0, timestamp: float | None = None) -> BlackBoxModel:
    """Learn a performance regression over (features, chunk-size); optimize at prediction time."""
    if len(train) == 0:
        raise InvalidArgumentError("cannot train on an empty dataset")
    meta = _base_metadata(config, seed, timestamp)
    meta["n_train"] = len(train)
    aug = augment(train)
    if learner == "dtr":
        tree = fit_regressor_tree(aug, config)
        model = BlackBoxModel(ModelKind.POSTO, train.grid, tree, "dtr", None, meta)
        meta["node_count"] = node_count(tree)
    elif callable(learner):
        Z = np.array([row.as_list() for row in aug.rows])
        scaler = Standardizer.fit(Z)
        est = learner()
        est.fit(scaler.transform(Z), np.array([row.target_perf for row in aug.rows]))
        model = BlackBoxModel(ModelKind.POSTO, train.grid, None, getattr(learner, "__name__", "plugin"),
                              scaler, meta, est)
    else:
        raise InvalidArgumentError(f"unknown PosTO learner {learner!r}")
    meta["train_msop"] = msop(model.predict, train.examples)
    return model


def random_guess(grid: ChunkGrid, seed: int = 0) -> BlackBoxModel:
    return BlackBoxModel(ModelKind.RANDOM, grid, metadata={"seed": int(seed)})


def equal_share_model(grid: ChunkGrid) -> BlackBoxModel:
    return BlackBoxModel(ModelKind.EQUAL_SHARE, grid, metadata={"seed": 0})


def evaluate_test(model: BlackBoxModel, test: BrutDataset) -> float:
    if len(test) == 0:
        raise InvalidArgumentError("test set is empty")
    if model.grid != test.grid:
        raise InvalidArgumentError(f"model grid {model.grid.values} != data grid {test.grid.values}")
    return msop(model.predictor(), test.examples)


# --- model selection -------------------------------------------------------

ORACLE = "oracle"


@dataclass(frozen=True)
class ModelSpec:
    name: str
    kind: ModelKind | str
    learner: Learner | None = None
    config: TreeConfig = TreeConfig()

    def fit(self, train: BrutDataset, seed: int) -> BlackBoxModel:
        kind = self.kind
        if kind == ModelKind.PRETO:
            return fit_preto(train, self.config, self.learner or "custom", seed)
        if kind == ModelKind.POSTO:
            return fit_posto(train, self.config, self.learner or "dtr", seed)
        if kind == ModelKind.RANDOM:
            return random_guess(train.grid, seed)
        if kind == ModelKind.EQUAL_SHARE:
            return equal_share_model(train.grid)
        raise InvalidArgumentError(f"cannot fit model kind {kind!r}")


MODEL_NAMES = ("preto-custom", "preto-dtc", "posto-dtr", "random", "equal-share", ORACLE)
PLUGIN_ROWS = ("preto-logreg", "posto-mlp")


def model_spec(name: str, config: TreeConfig = TreeConfig(), plugin: Callable[[], Any] | None = None) -> ModelSpec:
    if name == "preto-custom":
        return ModelSpec(name, ModelKind.PRETO, "custom", config)
    if name == "preto-dtc":
        return ModelSpec(name, ModelKind.PRETO, "classical", config)
    if name == "posto-dtr":
        return ModelSpec(name, ModelKind.POSTO, "dtr", config)
    if name == "random":
        return ModelSpec(name, ModelKind.RANDOM, None, config)
    if name == "equal-share":
        return ModelSpec(name, ModelKind.EQUAL_SHARE, None, config)
    if name == ORACLE:
        return ModelSpec(name, ORACLE, None, config)
    if name in PLUGIN_ROWS:
        if plugin is None:
            raise InvalidArgumentError(f"{name} needs an external estimator; none is bundled")
        kind = ModelKind.PRETO if name.startswith("preto") else ModelKind.POSTO
        return ModelSpec(name, kind, plugin, config)
    raise InvalidArgumentError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")


@dataclass(frozen=True)
class ReportRow:
    name: str
    kind: str
    msop_mean: float
    msop_std: float
    prediction_time_mean: float | None
    prediction_time_std: float | None
    model_evals_per_prediction: int
    node_count_mean: float | None
    node_count_std: float | None
    fold_msop: tuple[float, ...]


CSV_COLUMNS = ("model", "kind", "msop_mean", "msop_std", "prediction_time_mean_us",
               "prediction_time_std_us", "model_evals_per_prediction", "node_count_mean",
               "node_count_std", "fold_msop")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[ReportRow, ...]
    k: int
    seed: int
    n_examples: int

    def row(self, name: str) -> ReportRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.name, r.kind, _fmt(r.msop_mean), _fmt(r.msop_std), _fmt(r.prediction_time_mean),
                        _fmt(r.prediction_time_std), r.model_evals_per_prediction, _fmt(r.node_count_mean),
                        _fmt(r.node_count_std), " ".join(repr(m) for m in r.fold_msop)])
        return buf.getvalue()

    def to_table(self) -> str:
        header = ("Model", "MSOP (%)", "Prediction Time (us)", "Evals/pred", "Nodes")
        body = []
        for r in self.rows:
            t = "-" if r.prediction_time_mean is None else f"{r.prediction_time_mean:.2f} ± {r.prediction_time_std:.2f}"
            nodes = "-" if r.node_count_mean is None else f"{r.node_count_mean:.1f} ± {r.node_count_std:.1f}"
            body.append((r.name, f"{100 * r.msop_mean:.1f} ± {100 * r.msop_std:.1f}", t,
                         str(r.model_evals_per_prediction), nodes))
        widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
        sep = "-+-".join("-" * w for w in widths)
        lines = [" | ".join(h.ljust(w) for h, w in zip(header, widths)), sep]
        lines += [" | ".join(c.ljust(w) for c, w in zip(row, widths)) for row in body]
        title = f"{self.k}-fold cross-validation on {self.n_examples} examples (seed {self.seed})"
        return title + "\n" + "\n".join(line.rstrip() for line in lines) + "\n"


def _std(values: Sequence[float]) -> float:
    return statistics.stdev(values) if len(values) > 1 else 0.0


def median_latency_us(predict_fn: Callable[[FeatureVector], int], inputs: Sequence[FeatureVector],
                      calls: int = 1000, warmup: int = 50) -> float:
    """Median wall-clock latency of single predictions, in microseconds."""
    n = len(inputs)
    for i in range(warmup):
        predict_fn(inputs[i % n])
    samples = []
    clock = time.perf_counter_ns
    for i in range(calls):
        x = inputs[i % n]
        t0 = clock()
        predict_fn(x)
        samples.append(clock() - t0)
    return statistics.median(samples) / 1000.0


def _fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, fold]).generate_state(1, np.uint64)[0])


def cross_validate(data: BrutDataset, k: int = 3, seed: int = 0,
                   model_specs: Sequence[ModelSpec] | None = None, timing: bool = True,
                   timing_calls: int = 1000, jobs: int = 1) -> EvaluationReport:
    """k-fold model comparison: mean and sample std of held-out MSOP per model."""
    if k < 2:
        raise InvalidArgumentError(f"k must be >= 2, got {k}")
    specs = list(model_specs) if model_specs is not None else [model_spec(n) for n in MODEL_NAMES]
    plan = kfold(data, k, seed)
    folds = [(data.subset(plan.train_indices(f)), data.subset(plan.fold_indices(f))) for f in range(k)]

    def run_fold(f: int):
        train, val = folds[f]
        out = []
        for spec in specs:
            if spec.kind == ORACLE:
                best = [ex.best_chunk for ex in val.examples]
                out.append((msop_of_choices(best, val.examples), None, 0))
                continue
            model = spec.fit(train, _fold_seed(seed, f))
            out.append((evaluate_test(model, val), model, model.model_evals_per_prediction))
        return out

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_fold, range(k)))
    else:
        results = [run_fold(f) for f in range(k)]

    rows = []
    for s_i, spec in enumerate(specs):
        per_fold = [results[f][s_i] for f in range(k)]
        scores = [r[0] for r in per_fold]
        models = [r[1] for r in per_fold]
        counts = [m.node_count for m in models if m is not None and m.node_count is not None]
        t_mean = t_std = None
        if timing and spec.kind != ORACLE and spec.kind not in (ModelKind.RANDOM, ModelKind.EQUAL_SHARE):
            lat = [median_latency_us(m.predictor(), [ex.features for ex in folds[f][1].examples], timing_calls)
                   for f, m in enumerate(models)]
            t_mean, t_std = statistics.fmean(lat), _std(lat)
        evals = per_fold[0][2]
        rows.append(ReportRow(
            spec.name, spec.kind.value if isinstance(spec.kind, ModelKind) else str(spec.kind),
            math.fsum(scores) / k, _std(scores), t_mean, t_std, evals,
            statistics.fmean(counts) if counts else None, _std(counts) if counts else None,
            tuple(scores),
        ))
    rows.sort(key=lambda r: (-r.msop_mean, r.name))
    return EvaluationReport(tuple(rows), k, seed, len(data))
