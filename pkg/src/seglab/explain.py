"""Why is this customer in this segment?

Two complementary answers: a local surrogate (perturb the customer's
standardized vector, label each perturbation by nearest-centroid membership
of the customer's own cluster, fit a distance-weighted linear model) and
rule-based cluster characterizations (features whose centroid z-magnitude
clears a threshold, rendered as high/low statements against the global
mean).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels as kernels_mod
from .cluster import ClusterModel, ClusterStats
from .errors import UndefinedMetricError, ValidationError
from .features import FeatureMatrix

DEFAULT_N_SAMPLES = 1000
PERTURBATION_SCALE = 0.5
DEFAULT_TOP_M = 3
DEFAULT_RULE_THRESHOLD = 0.5


@dataclass(frozen=True)
class ExplainConfig:
    n_samples: int = DEFAULT_N_SAMPLES
    kernel_width: float | None = None  # default 0.75 * sqrt(n_features)
    seed: int = 0

    def resolved_kernel_width(self, n_features: int) -> float:
        if self.kernel_width is not None:
            return float(self.kernel_width)
        return 0.75 * float(np.sqrt(n_features))


@dataclass
class Explanation:
    customer_id: str
    cluster: int
    coefficients: dict[str, float]  # signed, standardized space, every feature
    intercept: float
    fidelity: float  # weighted R^2 of the surrogate fit, <= 1
    sample_count: int
    kernel_width: float
    seed: int

    def top(self, m: int = DEFAULT_TOP_M) -> list[tuple[str, float]]:
        """Sorted |coefficient|-descending projection for display; storage
        always keeps every feature."""
        ranked = sorted(self.coefficients.items(), key=lambda kv: -abs(kv[1]))
        return ranked[:m]

    def to_doc(self) -> dict:
        return {
            "customer_id": self.customer_id,
            "cluster": self.cluster,
            "coefficients": dict(self.coefficients),
            "intercept": self.intercept,
            "fidelity": self.fidelity,
            "sample_count": self.sample_count,
            "kernel_width": self.kernel_width,
            "seed": self.seed,
            "top": [{"feature": f, "coefficient": c} for f, c in self.top()],
        }


@dataclass(frozen=True)
class Rule:
    feature: str
    direction: str  # "high" | "low"
    centroid_z: float
    cluster_mean: float  # raw space
    global_mean: float  # raw space

    def to_doc(self) -> dict:
        return {
            "feature": self.feature,
            "direction": self.direction,
            "centroid_z": self.centroid_z,
            "cluster_mean": self.cluster_mean,
            "global_mean": self.global_mean,
        }


@dataclass
class RuleSet:
    threshold: float
    rules: dict[int, list[Rule]]  # cluster index -> rules, |z| descending

    def to_doc(self) -> dict:
        return {
            "threshold": self.threshold,
            "rules": {str(c): [r.to_doc() for r in rs] for c, rs in sorted(self.rules.items())},
        }


def explain_instance(
    model: ClusterModel,
    matrix: FeatureMatrix,
    customer_id: str,
    config: ExplainConfig | None = None,
    kernels=None,
) -> Explanation:
    """Fit a weighted least-squares surrogate around one customer.

    Perturbations are drawn per feature (column by column) from a normal
    with std 0.5 in standardized space; constant features stay fixed. Each
    perturbation is labeled 1 when its nearest centroid is the customer's
    own cluster. Weights decay as exp(-d^2 / kernel_width^2). The fit is
    deterministic under a fixed seed.
    """
    config = config or ExplainConfig()
    kern = kernels if kernels is not None else kernels_mod.active
    X = matrix.require_standardized()
    if model.n_clusters < 2:
        raise UndefinedMetricError("explanations need a model with at least 2 clusters")
    if config.n_samples < 2:
        raise ValidationError("n_samples must be >= 2", field="n_samples")
    try:
        row = matrix.customer_index(customer_id)
    except KeyError:
        raise ValidationError(f"unknown customer {customer_id!r}", field="customer_id")
    own = int(model.labels[row])
    if own < 0:
        raise UndefinedMetricError(
            f"customer {customer_id!r} is noise; no cluster membership to explain"
        )

    x0 = X[row]
    d = X.shape[1]
    n = int(config.n_samples)
    kernel_width = config.resolved_kernel_width(d)
    rng = np.random.Generator(np.random.PCG64(config.seed))

    # Column-wise draws keep a feature's noise stream independent of how
    # many other features exist; constant columns get zero spread.
    if matrix.feature_stds is not None:
        col_scale = np.where(matrix.feature_stds == 0.0, 0.0, PERTURBATION_SCALE)
    else:
        col_scale = np.full(d, PERTURBATION_SCALE)
    samples = np.empty((n, d), dtype=np.float64)
    for j in range(d):
        samples[:, j] = x0[j] + rng.standard_normal(n) * col_scale[j]

    nearest, _ = kern.assign_to_centroids(np.ascontiguousarray(samples), model.centroids)
    y = (nearest == own).astype(np.float64)
    d2 = ((samples - x0) ** 2).sum(axis=1)
    weights = np.exp(-d2 / (kernel_width * kernel_width))

    design = np.hstack([np.ones((n, 1)), samples])
    sw = np.sqrt(weights)
    beta, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
    fitted = design @ beta

    w_mean = float(np.average(y, weights=weights))
    ss_res = float(np.sum(weights * (y - fitted) ** 2))
    ss_tot = float(np.sum(weights * (y - w_mean) ** 2))
    fidelity = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot

    return Explanation(
        customer_id=customer_id,
        cluster=own,
        coefficients={f: float(beta[j + 1]) for j, f in enumerate(matrix.feature_ids)},
        intercept=float(beta[0]),
        fidelity=fidelity,
        sample_count=n,
        kernel_width=kernel_width,
        seed=int(config.seed),
    )


def characterize_cluster(
    model: ClusterModel,
    stats: ClusterStats,
    z_threshold: float = DEFAULT_RULE_THRESHOLD,
) -> RuleSet:
    """Defining-feature rules: one per feature with |centroid z| >= threshold.

    Zero-z features never produce a rule (they have no direction), which
    only matters at threshold 0. Rules are sorted by |z| descending; a
    cluster with no feature past the threshold legally has no rules.
    """
    if z_threshold < 0:
        raise ValidationError("z_threshold must be >= 0", field="z_threshold")
    rules: dict[int, list[Rule]] = {}
    by_cluster = {entry.cluster: entry for entry in stats.clusters}
    for c in range(model.n_clusters):
        entry = by_cluster[c]
        cluster_rules = []
        for j, feature in enumerate(model.feature_ids):
            z = float(model.centroids[c, j])
            if abs(z) >= z_threshold and z != 0.0:
                cluster_rules.append(
                    Rule(
                        feature=feature,
                        direction="high" if z > 0 else "low",
                        centroid_z=z,
                        cluster_mean=entry.feature_stats[feature]["mean"],
                        global_mean=stats.global_means[feature],
                    )
                )
        cluster_rules.sort(key=lambda r: -abs(r.centroid_z))
        rules[c] = cluster_rules
    return RuleSet(threshold=float(z_threshold), rules=rules)
