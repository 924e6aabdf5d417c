"""Compare the compiled kernel backend against the NumPy fallback.

Times the three hot paths (k-means build, DBSCAN build, silhouette score)
on synthetic standardized data and verifies both backends produce the same
partitions while at it.

    python benchmarks/bench_kernels.py --n 20000 --d 7 --k 8
"""

from __future__ import annotations

import argparse
import time
from datetime import date

import numpy as np

from seglab import kernels
from seglab.cluster import dbscan, kmeans, silhouette
from seglab.features import FeatureMatrix


def synthetic_matrix(n: int, d: int, seed: int) -> FeatureMatrix:
    rng = np.random.default_rng(seed)
    # A few blobs plus background noise, standardized-ish scale.
    centers = rng.normal(scale=2.0, size=(max(4, d), d))
    points = np.vstack(
        [
            centers[i % len(centers)] + rng.normal(scale=0.6, size=(1, d))
            for i in range(n)
        ]
    )
    points = (points - points.mean(axis=0)) / points.std(axis=0)
    return FeatureMatrix(
        customer_ids=[f"cust{i}" for i in range(n)],
        feature_ids=[f"f{j}" for j in range(d)],
        raw=points,
        reference_date=date(2024, 1, 1),
        window_days=365,
        standardized=np.ascontiguousarray(points),
        feature_means=np.zeros(d),
        feature_stds=np.ones(d),
    )


def timed(fn, repeat: int) -> tuple[float, object]:
    best = float("inf")
    result = None
    for _ in range(repeat):
        started = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - started)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=20000, help="customers for k-means")
    parser.add_argument("--n-dbscan", type=int, default=4000)
    parser.add_argument("--n-silhouette", type=int, default=3000)
    parser.add_argument("--d", type=int, default=7)
    parser.add_argument("--k", type=int, default=8)
    parser.add_argument("--eps", type=float, default=0.6)
    parser.add_argument("--min-pts", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "c" not in backends:
        print("warning: compiled backend not built; benchmarking fallback only")

    rows = []

    big = synthetic_matrix(args.n, args.d, args.seed)
    results = {}
    for name in backends:
        kern = kernels.get_backend(name)
        best, model = timed(
            lambda: kmeans(big, k=args.k, seed=args.seed, kernels=kern), args.repeat
        )
        results[name] = model
        rows.append((f"kmeans n={args.n} d={args.d} k={args.k}", name, best))
    if len(results) == 2 and not np.array_equal(results["c"].labels, results["python"].labels):
        raise SystemExit("backend mismatch: kmeans partitions differ")

    medium = synthetic_matrix(args.n_dbscan, args.d, args.seed + 1)
    results = {}
    for name in backends:
        kern = kernels.get_backend(name)
        best, model = timed(
            lambda: dbscan(medium, eps=args.eps, min_pts=args.min_pts, kernels=kern),
            args.repeat,
        )
        results[name] = model
        rows.append((f"dbscan n={args.n_dbscan} d={args.d}", name, best))
    if len(results) == 2 and not np.array_equal(results["c"].labels, results["python"].labels):
        raise SystemExit("backend mismatch: dbscan partitions differ")

    small = synthetic_matrix(args.n_silhouette, args.d, args.seed + 2)
    sil_model = kmeans(small, k=args.k, seed=args.seed)
    scores = {}
    for name in backends:
        kern = kernels.get_backend(name)
        best, score = timed(lambda: silhouette(sil_model, small, kernels=kern), args.repeat)
        scores[name] = score
        rows.append((f"silhouette n={args.n_silhouette} d={args.d}", name, best))
    if len(scores) == 2 and abs(scores["c"] - scores["python"]) > 1e-9:
        raise SystemExit("backend mismatch: silhouette scores differ")

    width = max(len(r[0]) for r in rows)
    print(f"{'workload'.ljust(width)}  backend  best-of-{args.repeat}")
    for workload, name, best in rows:
        print(f"{workload.ljust(width)}  {name:7}  {best * 1000:10.1f} ms")
    for workload in dict.fromkeys(r[0] for r in rows):
        times = {name: best for w, name, best in rows if w == workload}
        if len(times) == 2:
            print(f"{workload.ljust(width)}  speedup  {times['python'] / times['c']:10.1f} x")


if __name__ == "__main__":
    main()
