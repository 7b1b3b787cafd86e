"""Compare the compiled split kernels with the numpy fallback.

Run from the repository root after an editable install:

    python benchmarks/bench_kernels.py [--repeat 5] [--scale 4]

Reports the median wall time of each kernel on random inputs and of full
tree fits on the bundled synthetic campaign, for both backends.
"""

import argparse
import statistics
import time

import numpy as np

from chunkwise.dataio import augment, derive_labels
from chunkwise.synth import default_plan
from chunkwise.trees import TreeConfig, fit_classifier_tree, fit_custom_tree, fit_regressor_tree
from chunkwise.trees import _backend
from chunkwise.trees.growth import _plogp_table


def median_time(fn, repeat):
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def kernel_cases(n, g, rng):
    xs = np.sort(rng.integers(0, n // 4 + 1, n).astype(np.float64))
    R = rng.uniform(0.1, 1.0, (n, g))
    R = np.ascontiguousarray(R / R.max(axis=1, keepdims=True))
    labels = rng.integers(0, g, n).astype(np.int64)
    y = rng.normal(0.0, 1.0, n)
    plogp = _plogp_table(n)
    return {
        "msop_split": lambda k: k.msop_split(xs, R, 1),
        "entropy_split": lambda k: k.entropy_split(xs, labels, g, 1, plogp),
        "sse_split": lambda k: k.sse_split(xs, y, 1),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--scale", type=int, default=1, help="replicate the campaign this many times")
    args = parser.parse_args()

    backends = {"python": _backend.pure}
    if _backend.compiled is not None:
        backends["cython"] = _backend.compiled
    else:
        print("compiled kernels are not built; timing the numpy fallback only")

    rng = np.random.default_rng(0)
    print(f"{'case':<34}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    rows = []
    for n in (288, 2880):
        for name, fn in kernel_cases(n, 10, rng).items():
            rows.append((f"{name} n={n}", {b: median_time(lambda: fn(k), args.repeat) for b, k in backends.items()}))

    data = default_plan().generate()
    if args.scale > 1:
        data = type(data)(data.grid, data.examples * args.scale, data.provenance)
    config = TreeConfig(max_depth=12, msop_stop_threshold=1.0)
    labeled, rows_aug = derive_labels(data), augment(data)
    fits = {
        "fit custom tree": lambda k: fit_custom_tree(data, config, k),
        "fit entropy tree": lambda k: fit_classifier_tree(labeled, config, k),
        "fit regression tree": lambda k: fit_regressor_tree(rows_aug, config, k),
    }
    for name, fn in fits.items():
        rows.append((f"{name} N={len(data)}", {b: median_time(lambda: fn(k), args.repeat) for b, k in backends.items()}))

    for label, times in rows:
        line = f"{label:<34}" + "".join(f"{1e3 * times[b]:>10.3f}ms" for b in backends)
        if "cython" in times:
            line += f"{times['python'] / times['cython']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
