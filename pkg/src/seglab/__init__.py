"""seglab: interactive B2B customer segmentation workbench.

Pipeline: transaction ingest -> per-customer features -> clustering ->
optimal semantic labels -> inspection (stats, rules, local surrogates) ->
versioned storage and cross-version comparison, behind an HTTP API and CLI.
"""

__version__ = "0.1.0"

from .cluster import ClusterModel, ClusterStats, dbscan, kmeans, silhouette, cluster_stats
from .explain import ExplainConfig, Explanation, RuleSet, characterize_cluster, explain_instance
from .features import FEATURE_IDS, FeatureMatrix, derive_features, standardize
from .ingest import (
    FilterSpec,
    Transaction,
    customer_history,
    filter_transactions,
    flag_outliers,
    parse_transactions,
)
from .label import LabelAssignment, LabelSpec, OverrideScope, assign_labels, label_cost
from .store import BuildConfig, ModelVersion, Workspace, adjusted_rand_index, compare_versions

__all__ = [
    "__version__",
    "FEATURE_IDS",
    "BuildConfig",
    "ClusterModel",
    "ClusterStats",
    "ExplainConfig",
    "Explanation",
    "FeatureMatrix",
    "FilterSpec",
    "LabelAssignment",
    "LabelSpec",
    "ModelVersion",
    "OverrideScope",
    "RuleSet",
    "Transaction",
    "Workspace",
    "adjusted_rand_index",
    "assign_labels",
    "characterize_cluster",
    "cluster_stats",
    "compare_versions",
    "customer_history",
    "dbscan",
    "derive_features",
    "explain_instance",
    "filter_transactions",
    "flag_outliers",
    "kmeans",
    "label_cost",
    "parse_transactions",
    "silhouette",
    "standardize",
]
