"""Unsupervised cluster models over the standardized feature matrix.

K-Means uses k-means++ seeding from an explicitly seeded generator and runs
several independent initializations, keeping the lowest within-cluster sum
of squares; identical (matrix, k, seed) inputs therefore reproduce the model
bit for bit. DBSCAN is pinned to ascending-index scanning with FIFO
expansion so border-point ties are deterministic as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels as kernels_mod
from .errors import UndefinedMetricError, ValidationError
from .features import FeatureMatrix

#: Sentinel cluster index for DBSCAN noise points.
NOISE = -1

KMEANS_TOL = 1e-6
KMEANS_MAX_ITER = 100
KMEANS_N_INIT = 10


@dataclass
class ClusterModel:
    algorithm: str  # "kmeans" | "dbscan"
    params: dict
    customer_ids: list[str]
    labels: np.ndarray  # int64, one entry per customer; NOISE = -1
    centroids: np.ndarray  # (n_clusters, n_features), standardized space
    feature_ids: list[str]
    iterations_run: int
    converged: bool
    wcss: float
    wcss_trace: list[float] = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def assignment(self) -> dict[str, int]:
        return {cid: int(c) for cid, c in zip(self.customer_ids, self.labels)}

    def members(self, cluster: int) -> list[str]:
        return [cid for cid, c in zip(self.customer_ids, self.labels) if c == cluster]

    @property
    def noise_customer_ids(self) -> list[str]:
        return self.members(NOISE)


@dataclass
class ClusterEntry:
    cluster: int
    size: int
    feature_stats: dict[str, dict[str, float]]  # feature -> mean/median/min/max (raw space)
    centroid_z: dict[str, float]
    profit_share: float | None
    volume_share: float | None


@dataclass
class ClusterStats:
    clusters: list[ClusterEntry]
    noise_size: int
    global_means: dict[str, float]  # raw-space mean over all customers


def _kern(kernels):
    return kernels if kernels is not None else kernels_mod.active


def _kmeanspp_centers(X: np.ndarray, k: int, rng: np.random.Generator, kern) -> np.ndarray:
    """k-means++ seeding: spread initial centers by squared-distance weighting."""
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]), dtype=np.float64)
    chosen: list[int] = []
    first = int(rng.integers(n))
    centers[0] = X[first]
    chosen.append(first)
    d2 = kern.sq_dists_to_point(X, centers[0])
    for c in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            idx = min(idx, n - 1)
        else:
            # Remaining mass is zero (duplicate points); pick any unchosen row.
            candidates = [i for i in range(n) if i not in chosen]
            idx = candidates[int(rng.integers(len(candidates)))]
        centers[c] = X[idx]
        chosen.append(idx)
        d2 = np.minimum(d2, kern.sq_dists_to_point(X, centers[c]))
    return centers


def _point_to_centroid_sq_dists(X: np.ndarray, C: np.ndarray, kern) -> np.ndarray:
    out = np.empty((X.shape[0], C.shape[0]), dtype=np.float64)
    for c in range(C.shape[0]):
        out[:, c] = kern.sq_dists_to_point(X, np.ascontiguousarray(C[c]))
    return out


_SWAP_POLISH_MAX_N = 512


def _best_single_move(X, labels, C, counts, kern):
    """Best strictly improving one-point reassignment (Hartigan delta).

    Exact wcss change for moving x from cluster a (size n_a) to b:
    n_b/(n_b+1)*|x-mu_b|^2 - n_a/(n_a-1)*|x-mu_a|^2. Singletons never move
    (that would empty a cluster)."""
    k = C.shape[0]
    dists = _point_to_centroid_sq_dists(X, C, kern)
    own = dists[np.arange(len(labels)), labels]
    own_counts = counts[labels]
    with np.errstate(divide="ignore", invalid="ignore"):
        remove = np.where(own_counts > 1, own_counts / (own_counts - 1) * own, 0.0)
    add = counts / (counts + 1) * dists
    gain = add - remove[:, None]
    gain[own_counts == 1, :] = np.inf  # moving a singleton would empty its cluster
    gain[np.arange(len(labels)), labels] = np.inf
    flat = int(gain.argmin())
    i, b = divmod(flat, k)
    return float(gain[i, b]), ("move", i, b)


def _best_swap(X, labels, C, counts):
    """Best strictly improving exchange of two points between clusters.

    Removing x from its cluster changes wcss by -n/(n-1)*|x-mu|^2 and leaves
    mean (n*mu - x)/(n-1); adding y to that cluster then adds
    (n-1)/n*|y-mu'|^2. Swapping i and j composes both deltas on each side;
    singleton clusters contribute zero on their side."""
    n = X.shape[0]
    sizes = counts[labels].astype(np.float64)
    mu_own = C[labels]
    own_sq = ((X - mu_own) ** 2).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        removal = np.where(sizes > 1, sizes / (sizes - 1) * own_sq, 0.0)
        mu_without = np.where(
            (sizes > 1)[:, None], (sizes[:, None] * mu_own - X) / (sizes - 1)[:, None], mu_own
        )
        refill = np.where(sizes > 1, (sizes - 1) / sizes, 0.0)
    cross = ((X[None, :, :] - mu_without[:, None, :]) ** 2).sum(axis=-1)  # [i, j]
    gain = (
        -removal[:, None]
        - removal[None, :]
        + refill[:, None] * cross
        + refill[None, :] * cross.T
    )
    gain[labels[:, None] == labels[None, :]] = np.inf
    flat = int(gain.argmin())
    i, j = divmod(flat, n)
    return float(gain[i, j]), ("swap", i, j)


def _first_variation_polish(X, labels, C, kern, max_moves=200):
    """Escape Lloyd fixed points by descending on single-point moves and
    (at desk scale) pairwise exchanges, applying the best strictly improving
    change until none remains.

    A stable state has every point at its nearest centroid, so the result is
    still a Lloyd fixed point and every ClusterModel invariant holds; each
    accepted change appends a strictly smaller wcss to the returned trace.
    """
    k = C.shape[0]
    n = X.shape[0]
    labels = labels.copy()
    C = C.copy()
    trace: list[float] = []
    current = float(((X - C[labels]) ** 2).sum())
    try_swaps = n <= _SWAP_POLISH_MAX_N
    for _ in range(max_moves):
        counts = np.bincount(labels, minlength=k)
        candidates = [_best_single_move(X, labels, C, counts, kern)]
        if try_swaps:
            candidates.append(_best_swap(X, labels, C, counts))
        gain, action = min(candidates, key=lambda item: item[0])
        if not gain < -1e-12:
            break
        previous = (labels.copy(), C.copy())
        if action[0] == "move":
            labels[action[1]] = action[2]
        else:
            _, i, j = action
            labels[i], labels[j] = labels[j], labels[i]
        sums, counts = kern.accumulate_clusters(X, labels, k)
        occupied = counts > 0
        C[occupied] = sums[occupied] / counts[occupied, None]
        updated = float(((X - C[labels]) ** 2).sum())
        if not updated < current:  # fp disagreement with the delta; stop here
            labels, C = previous
            break
        current = updated
        trace.append(current)
    return labels, C, trace


def _lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int, tol: float, kern):
    k = centers.shape[0]
    C = centers.copy()
    trace: list[float] = []
    labels = None
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        labels, _ = kern.assign_to_centroids(X, C)
        sums, counts = kern.accumulate_clusters(X, labels, k)
        new_C = C.copy()
        occupied = counts > 0
        new_C[occupied] = sums[occupied] / counts[occupied, None]
        # Empty clusters are reseeded with the point farthest from their
        # stale centroid; each repair in a pass consumes a distinct point.
        taken: set[int] = set()
        for c in np.flatnonzero(~occupied):
            far = kern.sq_dists_to_point(X, C[c])
            for idx in np.argsort(-far, kind="stable"):
                if int(idx) not in taken:
                    taken.add(int(idx))
                    new_C[c] = X[idx]
                    break
        displacement = float(np.sqrt(((new_C - C) ** 2).sum(axis=1).max()))
        C = new_C
        trace.append(float(((X - C[labels]) ** 2).sum()))
        if displacement < tol:
            converged = True
            break
    return labels, C, iterations, converged, trace


def kmeans(
    matrix: FeatureMatrix,
    k: int,
    seed: int,
    max_iter: int = KMEANS_MAX_ITER,
    tol: float = KMEANS_TOL,
    n_init: int = KMEANS_N_INIT,
    kernels=None,
) -> ClusterModel:
    """Lloyd's algorithm with k-means++ seeding, best of ``n_init`` starts."""
    kern = _kern(kernels)
    X = matrix.require_standardized()
    n = X.shape[0]
    if not isinstance(k, (int, np.integer)) or not (2 <= k <= n):
        raise ValidationError(f"k must be an integer in [2, {n}], got {k!r}", field="k")
    rng = np.random.Generator(np.random.PCG64(seed))
    best = None
    for _ in range(n_init):
        centers = _kmeanspp_centers(X, k, rng, kern)
        labels, C, iterations, converged, trace = _lloyd(X, centers, max_iter, tol, kern)
        labels, C, polish_trace = _first_variation_polish(X, labels, C, kern)
        trace = trace + polish_trace
        wcss = trace[-1]
        if best is None or wcss < best[0]:
            best = (wcss, labels, C, iterations, converged, trace)
    wcss, labels, C, iterations, converged, trace = best
    return ClusterModel(
        algorithm="kmeans",
        params={"k": int(k), "seed": int(seed)},
        customer_ids=list(matrix.customer_ids),
        labels=labels,
        centroids=C,
        feature_ids=list(matrix.feature_ids),
        iterations_run=iterations,
        converged=converged,
        wcss=float(wcss),
        wcss_trace=[float(v) for v in trace],
    )


def dbscan(matrix: FeatureMatrix, eps: float, min_pts: int, kernels=None) -> ClusterModel:
    """Density clustering; an all-noise result is legal."""
    kern = _kern(kernels)
    X = matrix.require_standardized()
    if eps <= 0:
        raise ValidationError("eps must be > 0", field="eps")
    if min_pts < 1:
        raise ValidationError("min_pts must be >= 1", field="min_pts")
    labels = kern.dbscan_labels(X, float(eps), int(min_pts))
    m = int(labels.max()) + 1 if labels.size else 0
    centroids = np.zeros((m, X.shape[1]), dtype=np.float64)
    wcss = 0.0
    for c in range(m):
        members = labels == c
        centroids[c] = X[members].mean(axis=0)
        wcss += float(((X[members] - centroids[c]) ** 2).sum())
    return ClusterModel(
        algorithm="dbscan",
        params={"eps": float(eps), "min_pts": int(min_pts)},
        customer_ids=list(matrix.customer_ids),
        labels=labels,
        centroids=centroids,
        feature_ids=list(matrix.feature_ids),
        iterations_run=1,
        converged=True,
        wcss=wcss,
    )


def cluster_stats(model: ClusterModel, matrix: FeatureMatrix) -> ClusterStats:
    """Raw-space descriptive statistics per cluster plus profit/volume shares.

    Shares are taken over all non-noise customers and only computed when the
    corresponding feature was part of the selection.
    """
    if model.customer_ids != matrix.customer_ids:
        raise ValidationError("model assignments do not refer to this matrix")
    raw = matrix.raw
    labels = model.labels
    non_noise = labels >= 0

    def total(feature: str) -> float | None:
        if feature not in matrix.feature_ids:
            return None
        return float(raw[non_noise, matrix.feature_index(feature)].sum())

    profit_total = total("profit")
    volume_total = total("volume_tons")

    entries = []
    for c in range(model.n_clusters):
        members = labels == c
        sub = raw[members]
        stats = {
            f: {
                "mean": float(sub[:, j].mean()),
                "median": float(np.median(sub[:, j])),
                "min": float(sub[:, j].min()),
                "max": float(sub[:, j].max()),
            }
            for j, f in enumerate(matrix.feature_ids)
        }
        centroid_z = {f: float(model.centroids[c, j]) for j, f in enumerate(matrix.feature_ids)}

        def share(feature: str, grand_total: float | None) -> float | None:
            if grand_total is None or grand_total == 0:
                return None
            j = matrix.feature_index(feature)
            return float(sub[:, j].sum()) / grand_total

        entries.append(
            ClusterEntry(
                cluster=c,
                size=int(members.sum()),
                feature_stats=stats,
                centroid_z=centroid_z,
                profit_share=share("profit", profit_total),
                volume_share=share("volume_tons", volume_total),
            )
        )
    global_means = {f: float(raw[:, j].mean()) for j, f in enumerate(matrix.feature_ids)}
    return ClusterStats(
        clusters=entries,
        noise_size=int((~non_noise).sum()),
        global_means=global_means,
    )


def silhouette(model: ClusterModel, matrix: FeatureMatrix, kernels=None) -> float:
    """Mean silhouette over non-noise points; singletons contribute 0."""
    kern = _kern(kernels)
    X = matrix.require_standardized()
    labels = model.labels
    m = model.n_clusters
    sums, counts = kern.cluster_pair_distance_sums(X, labels, m)
    occupied = np.flatnonzero(counts > 0)
    if occupied.size < 2:
        raise UndefinedMetricError("silhouette needs at least 2 non-empty clusters")
    scores = []
    for i in range(X.shape[0]):
        c = int(labels[i])
        if c < 0:
            continue
        if counts[c] == 1:
            scores.append(0.0)
            continue
        a = sums[i, c] / (counts[c] - 1)
        b = min(sums[i, o] / counts[o] for o in occupied if o != c)
        denom = max(a, b)
        scores.append(0.0 if denom == 0 else (b - a) / denom)
    return float(np.mean(scores))
