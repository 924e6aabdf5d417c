"""NumPy fallback for the hot distance kernels.

Mirrors ``_ckernels`` exactly: same signatures, same scan orders, same
tie-breaking, so a partition computed with either backend is identical.
Accumulations run in ascending row order to stay bit-compatible with the
compiled loops.
"""

from __future__ import annotations

from collections import deque

import numpy as np

NAME = "python"


def sq_dists_to_point(X: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance from every row of X to point p."""
    return ((X - p) ** 2).sum(axis=1)


def assign_to_centroids(X: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest centroid per row (ties: lowest centroid index wins)."""
    n = X.shape[0]
    k = C.shape[0]
    dists = np.empty((n, k), dtype=np.float64)
    for c in range(k):
        dists[:, c] = ((X - C[c]) ** 2).sum(axis=1)
    labels = dists.argmin(axis=1).astype(np.int64)
    best = dists[np.arange(n), labels]
    return labels, best


def accumulate_clusters(X: np.ndarray, labels: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster coordinate sums and member counts."""
    sums = np.zeros((k, X.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, X)  # processes rows in ascending order
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts


def dbscan_labels(X: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Density-based cluster labels; -1 marks noise.

    Closed eps-ball neighborhoods (self included); seeds scanned in
    ascending row order with first-in-first-out expansion, so border points
    join the earliest cluster that reaches them.
    """
    n = X.shape[0]
    eps2 = eps * eps
    UNDEFINED, NOISE = -2, -1
    labels = np.full(n, UNDEFINED, dtype=np.int64)
    in_queue = np.zeros(n, dtype=bool)

    def region(i: int) -> np.ndarray:
        return np.flatnonzero(((X - X[i]) ** 2).sum(axis=1) <= eps2)

    cluster = -1
    for i in range(n):
        if labels[i] != UNDEFINED:
            continue
        neighbors = region(i)
        if neighbors.size < min_pts:
            labels[i] = NOISE
            continue
        cluster += 1
        labels[i] = cluster
        queue: deque[int] = deque()
        for h in neighbors:
            if h != i and labels[h] in (UNDEFINED, NOISE) and not in_queue[h]:
                queue.append(int(h))
                in_queue[h] = True
        while queue:
            j = queue.popleft()
            in_queue[j] = False
            if labels[j] == NOISE:
                labels[j] = cluster  # border point claimed, never expanded
                continue
            labels[j] = cluster
            neighbors_j = region(j)
            if neighbors_j.size >= min_pts:
                for h in neighbors_j:
                    if labels[h] in (UNDEFINED, NOISE) and not in_queue[h]:
                        queue.append(int(h))
                        in_queue[h] = True
    return labels


def cluster_pair_distance_sums(
    X: np.ndarray, labels: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """For every point, the sum of Euclidean distances to each cluster.

    Noise rows (label < 0) are skipped as distance targets but still get a
    sum row of their own. Self-distances contribute 0.
    """
    n = X.shape[0]
    sums = np.zeros((n, k), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    dists = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=-1))
    for c in range(k):
        members = np.flatnonzero(labels == c)
        counts[c] = members.size
        if members.size:
            sums[:, c] = dists[:, members].sum(axis=1)
    return sums, counts
