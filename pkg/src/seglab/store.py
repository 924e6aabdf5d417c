"""Workspace persistence: datasets, immutable model versions, comparison.

A workspace is a directory holding registered transaction files and one
self-contained JSON document per segmentation model version. Versions are
immutable once written except for override appends; raw transaction data is
never copied into a version, only the filter spec and a content hash of the
source (loads fail loudly when the registered source changed). Writes are
atomic (write-temp-then-rename) and serialized by a per-workspace lock.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cluster import ClusterEntry, ClusterModel, ClusterStats
from .errors import (
    NotFoundError,
    SourceHashMismatchError,
    StorageError,
    UndefinedMetricError,
    ValidationError,
)
from .ingest import (
    FilterSpec,
    ParseResult,
    dataset_summary as transactions_summary,
    filter_spec_from_doc,
    filter_spec_to_doc,
    parse_transactions,
)
from .label import (
    LabelAssignment,
    LabelSpec,
    OverrideRecord,
    parse_rfc3339,
    resolve_effective_labels,
    rfc3339,
)


@dataclass
class BuildConfig:
    """Everything needed to rebuild a model bit for bit."""

    dataset_id: str
    filter: FilterSpec
    features: list[str]
    algorithm: str  # "kmeans" | "dbscan"
    params: dict
    label_specs: list[LabelSpec] | None = None

    def to_doc(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "filter": filter_spec_to_doc(self.filter),
            "features": list(self.features),
            "algorithm": self.algorithm,
            "params": dict(self.params),
            "label_specs": [s.to_doc() for s in self.label_specs]
            if self.label_specs is not None
            else None,
        }

    @staticmethod
    def from_doc(doc: Mapping) -> "BuildConfig":
        specs = doc.get("label_specs")
        return BuildConfig(
            dataset_id=doc["dataset_id"],
            filter=filter_spec_from_doc(doc["filter"]),
            features=list(doc["features"]),
            algorithm=doc["algorithm"],
            params=dict(doc["params"]),
            label_specs=[LabelSpec.from_doc(s) for s in specs] if specs is not None else None,
        )


@dataclass
class ModelVersion:
    version_id: int | None
    created_at: datetime
    config: BuildConfig
    model: ClusterModel
    labels: LabelAssignment | None
    overrides: list[OverrideRecord]
    stats: ClusterStats
    metrics: dict
    source_hash: str

    def effective_labels(self) -> dict[str, str]:
        return resolve_effective_labels(
            self.model.assignment, self.labels, self.overrides, self.model.n_clusters
        )


def model_to_doc(model: ClusterModel) -> dict:
    return {
        "algorithm": model.algorithm,
        "params": dict(model.params),
        "assignment": {cid: int(c) for cid, c in zip(model.customer_ids, model.labels)},
        "centroids": [[float(v) for v in row] for row in model.centroids],
        "feature_ids": list(model.feature_ids),
        "iterations_run": int(model.iterations_run),
        "converged": bool(model.converged),
        "wcss": float(model.wcss),
    }


def model_from_doc(doc: Mapping) -> ClusterModel:
    customer_ids = list(doc["assignment"])
    return ClusterModel(
        algorithm=doc["algorithm"],
        params=dict(doc["params"]),
        customer_ids=customer_ids,
        labels=np.array([doc["assignment"][cid] for cid in customer_ids], dtype=np.int64),
        centroids=np.array(doc["centroids"], dtype=np.float64).reshape(
            len(doc["centroids"]), -1
        ),
        feature_ids=list(doc["feature_ids"]),
        iterations_run=int(doc["iterations_run"]),
        converged=bool(doc["converged"]),
        wcss=float(doc["wcss"]),
    )


def stats_to_doc(stats: ClusterStats) -> dict:
    return {
        "clusters": [
            {
                "cluster": e.cluster,
                "size": e.size,
                "feature_stats": e.feature_stats,
                "centroid_z": e.centroid_z,
                "profit_share": e.profit_share,
                "volume_share": e.volume_share,
            }
            for e in stats.clusters
        ],
        "noise_size": stats.noise_size,
        "global_means": dict(stats.global_means),
    }


def stats_from_doc(doc: Mapping) -> ClusterStats:
    return ClusterStats(
        clusters=[
            ClusterEntry(
                cluster=int(e["cluster"]),
                size=int(e["size"]),
                feature_stats={f: dict(v) for f, v in e["feature_stats"].items()},
                centroid_z={f: float(v) for f, v in e["centroid_z"].items()},
                profit_share=e["profit_share"],
                volume_share=e["volume_share"],
            )
            for e in doc["clusters"]
        ],
        noise_size=int(doc["noise_size"]),
        global_means={f: float(v) for f, v in doc["global_means"].items()},
    )


def version_to_doc(version: ModelVersion) -> dict:
    return {
        "version_id": version.version_id,
        "created_at": rfc3339(version.created_at),
        "config": version.config.to_doc(),
        "model": model_to_doc(version.model),
        "labels": version.labels.to_doc() if version.labels is not None else None,
        "overrides": [r.to_doc() for r in version.overrides],
        "stats": stats_to_doc(version.stats),
        "metrics": dict(version.metrics),
        "source_hash": version.source_hash,
    }


def version_from_doc(doc: Mapping) -> ModelVersion:
    return ModelVersion(
        version_id=int(doc["version_id"]),
        created_at=parse_rfc3339(doc["created_at"]),
        config=BuildConfig.from_doc(doc["config"]),
        model=model_from_doc(doc["model"]),
        labels=LabelAssignment.from_doc(doc["labels"]) if doc["labels"] is not None else None,
        overrides=[OverrideRecord.from_doc(r) for r in doc["overrides"]],
        stats=stats_from_doc(doc["stats"]),
        metrics=dict(doc["metrics"]),
        source_hash=doc["source_hash"],
    )


def content_hash(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


class Workspace:
    """Directory-backed store; single writer, many readers."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.RLock()
        (self.root / "datasets").mkdir(parents=True, exist_ok=True)
        (self.root / "versions").mkdir(parents=True, exist_ok=True)

    # -- low-level json io ----------------------------------------------

    def _read_json(self, path: Path, default=None):
        if not path.exists():
            return default
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def _write_json(self, path: Path, doc) -> None:
        tmp = path.with_name(path.name + ".tmp")
        try:
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageError(f"workspace write failed: {exc}") from exc

    # -- datasets ---------------------------------------------------------

    def _dataset_index(self) -> dict:
        return self._read_json(
            self.root / "datasets" / "index.json", {"next_id": 1, "datasets": {}}
        )

    def register_dataset(self, content: bytes | str, name: str | None = None) -> dict:
        """Store a transaction file and return its registration record."""
        if isinstance(content, str):
            content = content.encode("utf-8")
        parsed = parse_transactions(content)
        with self._lock:
            index = self._dataset_index()
            dataset_id = f"ds{index['next_id']}"
            index["next_id"] += 1
            path = self.root / "datasets" / f"{dataset_id}.csv"
            try:
                path.write_bytes(content)
            except OSError as exc:
                raise StorageError(f"dataset write failed: {exc}") from exc
            record = {
                "dataset_id": dataset_id,
                "name": name or dataset_id,
                "sha256": content_hash(content),
                "uploaded_at": rfc3339(datetime.now(timezone.utc)),
                "rows_accepted": len(parsed.transactions),
                "rows_rejected": len(parsed.rejects),
            }
            index["datasets"][dataset_id] = record
            self._write_json(self.root / "datasets" / "index.json", index)
        return record

    def dataset_record(self, dataset_id: str) -> dict:
        record = self._dataset_index()["datasets"].get(dataset_id)
        if record is None:
            raise NotFoundError(f"unknown dataset {dataset_id!r}")
        return record

    def list_datasets(self) -> list[dict]:
        return list(self._dataset_index()["datasets"].values())

    def load_dataset(self, dataset_id: str) -> ParseResult:
        self.dataset_record(dataset_id)  # raises NotFoundError
        content = (self.root / "datasets" / f"{dataset_id}.csv").read_bytes()
        return parse_transactions(content)

    def dataset_summary(self, dataset_id: str) -> dict:
        record = self.dataset_record(dataset_id)
        parsed = self.load_dataset(dataset_id)
        summary = transactions_summary(parsed.transactions)
        summary["dataset_id"] = dataset_id
        summary["name"] = record["name"]
        summary["rows_rejected"] = len(parsed.rejects)
        return summary

    # -- versions ---------------------------------------------------------

    def _version_index(self) -> dict:
        return self._read_json(
            self.root / "versions" / "index.json", {"next_id": 1, "versions": []}
        )

    def _version_path(self, version_id: int) -> Path:
        return self.root / "versions" / f"version_{version_id:06d}.json"

    def save_version(self, version: ModelVersion) -> int:
        """Assign the next id and write the version document durably."""
        with self._lock:
            index = self._version_index()
            version.version_id = index["next_id"]
            index["next_id"] += 1
            index["versions"].append(version.version_id)
            self._write_json(self._version_path(version.version_id), version_to_doc(version))
            self._write_json(self.root / "versions" / "index.json", index)
        return version.version_id

    def load_version(self, version_id: int) -> ModelVersion:
        doc = self.load_version_doc(version_id)
        return version_from_doc(doc)

    def load_version_doc(self, version_id: int) -> dict:
        path = self._version_path(int(version_id))
        doc = self._read_json(path)
        if doc is None:
            raise NotFoundError(f"unknown model version {version_id}")
        dataset_id = doc["config"]["dataset_id"]
        index = self._dataset_index()["datasets"]
        if dataset_id in index and index[dataset_id]["sha256"] != doc["source_hash"]:
            raise SourceHashMismatchError(
                f"dataset {dataset_id!r} content changed since version {version_id} was built"
            )
        return doc

    def list_version_ids(self) -> list[int]:
        return list(self._version_index()["versions"])

    def update_version(self, version: ModelVersion) -> None:
        """Rewrite a version document in place (override appends and the
        one-time label completion; everything else is immutable)."""
        if version.version_id is None:
            raise ValidationError("version has no id; save it first")
        with self._lock:
            if not self._version_path(version.version_id).exists():
                raise NotFoundError(f"unknown model version {version.version_id}")
            self._write_json(self._version_path(version.version_id), version_to_doc(version))

    def append_override(self, version_id: int, record: OverrideRecord) -> ModelVersion:
        with self._lock:
            version = self.load_version(version_id)
            version.overrides.append(record)
            self.update_version(version)
            return version

    def set_labels(self, version_id: int, labels: LabelAssignment) -> ModelVersion:
        """One-time label completion for models built without specs."""
        with self._lock:
            version = self.load_version(version_id)
            if version.labels is not None:
                raise ValidationError(
                    "version already has a label assignment; use overrides to relabel"
                )
            version.labels = labels
            self.update_version(version)
            return version


# -- comparison -----------------------------------------------------------


def adjusted_rand_index(labels_a: Sequence[int], labels_b: Sequence[int]) -> float:
    """Chance-corrected pair-counting agreement between two partitions."""
    if len(labels_a) != len(labels_b) or not labels_a:
        raise ValidationError("partitions must be non-empty and equal-length")

    def comb2(x: int) -> int:
        return x * (x - 1) // 2

    contingency: dict[tuple, int] = {}
    count_a: dict = {}
    count_b: dict = {}
    for a, b in zip(labels_a, labels_b):
        contingency[(a, b)] = contingency.get((a, b), 0) + 1
        count_a[a] = count_a.get(a, 0) + 1
        count_b[b] = count_b.get(b, 0) + 1
    index = sum(comb2(v) for v in contingency.values())
    sum_a = sum(comb2(v) for v in count_a.values())
    sum_b = sum(comb2(v) for v in count_b.values())
    total = comb2(len(labels_a))
    expected = sum_a * sum_b / total
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:  # both partitions trivial and identical
        return 1.0
    return (index - expected) / (max_index - expected)


@dataclass
class ComparisonReport:
    version_a: int
    version_b: int
    shared_customers: int
    ari: float
    transitions: dict[str, dict[str, int]]  # label in A -> label in B -> count
    moved: list[dict]  # customer_id, from_label, to_label

    def to_doc(self) -> dict:
        return {
            "version_a": self.version_a,
            "version_b": self.version_b,
            "shared_customers": self.shared_customers,
            "ari": self.ari,
            "transitions": {a: dict(row) for a, row in self.transitions.items()},
            "moved": list(self.moved),
        }


def compare_versions(workspace: Workspace, a: int, b: int) -> ComparisonReport:
    """Partition agreement plus effective-label transitions on shared customers."""
    va = workspace.load_version(a)
    vb = workspace.load_version(b)
    assign_a = va.model.assignment
    assign_b = vb.model.assignment
    shared = sorted(set(assign_a) & set(assign_b))
    if not shared:
        raise UndefinedMetricError("versions share no customers; comparison undefined")
    ari = adjusted_rand_index([assign_a[c] for c in shared], [assign_b[c] for c in shared])
    eff_a = va.effective_labels()
    eff_b = vb.effective_labels()
    transitions: dict[str, dict[str, int]] = {}
    moved = []
    for customer in shared:
        la, lb = eff_a[customer], eff_b[customer]
        transitions.setdefault(la, {}).setdefault(lb, 0)
        transitions[la][lb] += 1
        if la != lb:
            moved.append({"customer_id": customer, "from_label": la, "to_label": lb})
    return ComparisonReport(
        version_a=int(a),
        version_b=int(b),
        shared_customers=len(shared),
        ari=ari,
        transitions=transitions,
        moved=moved,
    )
