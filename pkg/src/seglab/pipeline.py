"""End-to-end build orchestration shared by the HTTP service and the CLI.

filter -> derive -> standardize -> cluster -> (k-means) optimal labels ->
stats -> silhouette -> version. A stored config replayed through this module
reproduces the stored model exactly.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Callable

from . import cluster as cluster_mod
from .errors import UndefinedMetricError, ValidationError
from .features import FEATURE_IDS, FeatureMatrix, derive_features, standardize
from .ingest import filter_transactions
from .label import LabelSpec, assign_labels
from .store import BuildConfig, ModelVersion, Workspace

ProgressFn = Callable[[str], None]


def validate_config(workspace: Workspace, config: BuildConfig) -> list[dict]:
    """Field-level validation of a build request; returns [{field, message}]."""
    errors: list[dict] = []

    try:
        workspace.dataset_record(config.dataset_id)
    except Exception:
        errors.append({"field": "dataset_id", "message": f"unknown dataset {config.dataset_id!r}"})

    unknown = [f for f in config.features if f not in FEATURE_IDS]
    if unknown:
        errors.append({"field": "features", "message": f"unknown feature id(s): {unknown}"})
    elif len(config.features) < 2 or len(set(config.features)) != len(config.features):
        errors.append(
            {"field": "features", "message": "select at least 2 distinct features"}
        )

    specs = config.label_specs
    if specs is not None:
        names = [s.label_name for s in specs]
        if any(not n for n in names):
            errors.append({"field": "label_specs", "message": "label names must be non-empty"})
        if len(set(names)) != len(names):
            errors.append({"field": "label_specs", "message": "label names must be distinct"})
        for spec in specs:
            stray = [f for f in spec.levels if f not in config.features]
            if stray:
                errors.append(
                    {
                        "field": "label_specs",
                        "message": f"label '{spec.label_name}' rates feature(s) {stray} "
                        "outside the selection",
                    }
                )

    if config.algorithm == "kmeans":
        k = config.params.get("k")
        seed = config.params.get("seed")
        if not isinstance(k, int) or isinstance(k, bool) or k < 2:
            errors.append({"field": "params.k", "message": "k must be an integer >= 2"})
        if not isinstance(seed, int) or isinstance(seed, bool):
            errors.append({"field": "params.seed", "message": "seed must be an integer"})
        if specs is None:
            errors.append(
                {"field": "label_specs", "message": "k-means builds need one label per cluster"}
            )
        elif isinstance(k, int) and not isinstance(k, bool) and k >= 2 and len(specs) != k:
            errors.append(
                {
                    "field": "label_specs",
                    "message": f"label count mismatch: k={k} clusters but "
                    f"{len(specs)} label spec(s); submit exactly k labels",
                }
            )
    elif config.algorithm == "dbscan":
        eps = config.params.get("eps")
        min_pts = config.params.get("min_pts")
        if not isinstance(eps, (int, float)) or isinstance(eps, bool) or eps <= 0:
            errors.append({"field": "params.eps", "message": "eps must be a number > 0"})
        if not isinstance(min_pts, int) or isinstance(min_pts, bool) or min_pts < 1:
            errors.append({"field": "params.min_pts", "message": "min_pts must be an integer >= 1"})
        if specs is not None:
            errors.append(
                {
                    "field": "label_specs",
                    "message": "dbscan discovers its cluster count; submit label specs "
                    "after the build via POST /models/{id}/labels",
                }
            )
    else:
        errors.append(
            {"field": "algorithm", "message": f"unknown algorithm {config.algorithm!r}"}
        )
    return errors


def build_matrix(workspace: Workspace, config: BuildConfig) -> FeatureMatrix:
    """Reproduce the (standardized) feature matrix for a build config."""
    parsed = workspace.load_dataset(config.dataset_id)
    transactions = filter_transactions(parsed.transactions, config.filter)
    return standardize(derive_features(transactions, config.features, config.filter))


def build_version(
    workspace: Workspace,
    config: BuildConfig,
    progress: ProgressFn | None = None,
    kernels=None,
) -> ModelVersion:
    """Run the full pipeline for a validated config; returns an unsaved version."""

    def note(message: str) -> None:
        if progress is not None:
            progress(message)

    note("deriving features")
    matrix = build_matrix(workspace, config)

    note("clustering")
    if config.algorithm == "kmeans":
        model = cluster_mod.kmeans(
            matrix, config.params["k"], config.params["seed"], kernels=kernels
        )
    elif config.algorithm == "dbscan":
        model = cluster_mod.dbscan(
            matrix, config.params["eps"], config.params["min_pts"], kernels=kernels
        )
    else:
        raise ValidationError(f"unknown algorithm {config.algorithm!r}", field="algorithm")

    labels = None
    if config.label_specs is not None:
        note("assigning labels")
        labels = assign_labels(
            model.centroids, config.label_specs, feature_ids=matrix.feature_ids
        )

    note("computing statistics")
    stats = cluster_mod.cluster_stats(model, matrix)
    try:
        sil = cluster_mod.silhouette(model, matrix, kernels=kernels)
    except UndefinedMetricError:
        sil = None

    return ModelVersion(
        version_id=None,
        created_at=datetime.now(timezone.utc),
        config=config,
        model=model,
        labels=labels,
        overrides=[],
        stats=stats,
        metrics={"wcss": model.wcss, "silhouette": sil},
        source_hash=workspace.dataset_record(config.dataset_id)["sha256"],
    )


def build_and_save(
    workspace: Workspace,
    config: BuildConfig,
    progress: ProgressFn | None = None,
    kernels=None,
) -> ModelVersion:
    version = build_version(workspace, config, progress=progress, kernels=kernels)
    workspace.save_version(version)
    return version


def complete_labels(
    workspace: Workspace, version_id: int, specs: list[LabelSpec]
) -> ModelVersion:
    """Phase-two labeling for dbscan builds: one spec per discovered cluster."""
    version = workspace.load_version(version_id)
    n_clusters = version.model.n_clusters
    if len(specs) != n_clusters:
        raise ValidationError(
            f"label count mismatch: model discovered {n_clusters} cluster(s) but "
            f"{len(specs)} label spec(s) were submitted",
            field="label_specs",
        )
    for spec in specs:
        stray = [f for f in spec.levels if f not in version.model.feature_ids]
        if stray:
            raise ValidationError(
                f"label '{spec.label_name}' rates feature(s) {stray} outside the model",
                field="label_specs",
            )
    assignment = assign_labels(
        version.model.centroids, specs, feature_ids=version.model.feature_ids
    )
    return workspace.set_labels(version_id, assignment)
