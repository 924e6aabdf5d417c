"""Semantic cluster labels: ordinal specs, optimal assignment, overrides.

An operator names each prospective segment and rates selected features on a
five-level ordinal scale. Each level maps to a z-score target (the standard
normal quantiles of the 10th/30th/50th/70th/90th percentiles), a label's
cost against a cluster is the L1 distance between those targets and the
cluster centroid, and labels are matched to clusters by an exact
minimum-cost assignment. Human corrections land in an append-only override
layer; the clustering itself is never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError

#: Ordinal levels and their z-score targets.
LEVEL_TARGETS = {
    "very_low": -1.28,
    "low": -0.52,
    "moderate": 0.0,
    "high": 0.52,
    "very_high": 1.28,
}

LEVELS = tuple(LEVEL_TARGETS)

#: Reserved label carried by DBSCAN noise points.
UNSEGMENTED = "Unsegmented"


@dataclass(frozen=True)
class LabelSpec:
    """A human-authored label name plus per-feature ordinal levels.

    Levels may cover a strict subset of the model's features; unmentioned
    features simply carry no cost weight.
    """

    label_name: str
    levels: Mapping[str, str]

    def __post_init__(self):
        if not self.label_name:
            raise ValidationError("label_name must be non-empty", field="label_name")
        bad = [lv for lv in self.levels.values() if lv not in LEVEL_TARGETS]
        if bad:
            raise ValidationError(
                f"unknown level(s) {bad}; expected one of {list(LEVELS)}", field="levels"
            )
        object.__setattr__(self, "levels", dict(self.levels))

    def to_doc(self) -> dict:
        return {"label_name": self.label_name, "levels": dict(self.levels)}

    @staticmethod
    def from_doc(doc: Mapping) -> "LabelSpec":
        return LabelSpec(label_name=doc["label_name"], levels=dict(doc["levels"]))


@dataclass
class LabelAssignment:
    """Minimum-cost bijection between cluster indices and label names."""

    mapping: dict[int, str]
    cost_matrix: list[list[float]]
    total_cost: float
    per_cluster_cost: dict[int, float]

    def to_doc(self) -> dict:
        return {
            "mapping": {str(c): name for c, name in sorted(self.mapping.items())},
            "cost_matrix": self.cost_matrix,
            "total_cost": self.total_cost,
            "per_cluster_cost": {str(c): v for c, v in sorted(self.per_cluster_cost.items())},
        }

    @staticmethod
    def from_doc(doc: Mapping) -> "LabelAssignment":
        return LabelAssignment(
            mapping={int(c): name for c, name in doc["mapping"].items()},
            cost_matrix=[list(row) for row in doc["cost_matrix"]],
            total_cost=float(doc["total_cost"]),
            per_cluster_cost={int(c): float(v) for c, v in doc["per_cluster_cost"].items()},
        )


@dataclass(frozen=True)
class OverrideScope:
    """instance(customer_id) | cluster(index) | group(set of customer_ids)."""

    kind: str
    customer_id: str | None = None
    cluster: int | None = None
    customer_ids: frozenset[str] | None = None

    @staticmethod
    def instance(customer_id: str) -> "OverrideScope":
        return OverrideScope(kind="instance", customer_id=customer_id)

    @staticmethod
    def for_cluster(cluster: int) -> "OverrideScope":
        return OverrideScope(kind="cluster", cluster=int(cluster))

    @staticmethod
    def group(customer_ids: Iterable[str]) -> "OverrideScope":
        return OverrideScope(kind="group", customer_ids=frozenset(customer_ids))

    def covers(self, customer_id: str, assigned_cluster: int) -> bool:
        if self.kind == "instance":
            return customer_id == self.customer_id
        if self.kind == "cluster":
            return assigned_cluster == self.cluster
        return customer_id in self.customer_ids

    def to_doc(self) -> dict:
        if self.kind == "instance":
            return {"type": "instance", "customer_id": self.customer_id}
        if self.kind == "cluster":
            return {"type": "cluster", "cluster": self.cluster}
        return {"type": "group", "customer_ids": sorted(self.customer_ids)}

    @staticmethod
    def from_doc(doc: Mapping) -> "OverrideScope":
        kind = doc["type"]
        if kind == "instance":
            return OverrideScope.instance(doc["customer_id"])
        if kind == "cluster":
            return OverrideScope.for_cluster(doc["cluster"])
        if kind == "group":
            return OverrideScope.group(doc["customer_ids"])
        raise ValidationError(f"unknown override scope type: {kind!r}")


@dataclass(frozen=True)
class OverrideRecord:
    scope: OverrideScope
    target_label: str
    timestamp: datetime  # UTC
    author: str

    def to_doc(self) -> dict:
        return {
            "scope": self.scope.to_doc(),
            "target_label": self.target_label,
            "timestamp": rfc3339(self.timestamp),
            "author": self.author,
        }

    @staticmethod
    def from_doc(doc: Mapping) -> "OverrideRecord":
        return OverrideRecord(
            scope=OverrideScope.from_doc(doc["scope"]),
            target_label=doc["target_label"],
            timestamp=parse_rfc3339(doc["timestamp"]),
            author=doc["author"],
        )


def rfc3339(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def parse_rfc3339(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%S.%fZ").replace(tzinfo=timezone.utc)


def label_cost(
    centroid_z: Mapping[str, float] | Sequence[float],
    spec: LabelSpec,
    feature_ids: Sequence[str] | None = None,
) -> float:
    """L1 distance between the spec's level targets and the centroid z-values.

    Only features mentioned in the spec contribute; an empty spec costs 0
    against every centroid.
    """
    if isinstance(centroid_z, Mapping):
        lookup = dict(centroid_z)
    else:
        if feature_ids is None:
            raise ValidationError("feature_ids required when centroid_z is a plain vector")
        lookup = {f: float(v) for f, v in zip(feature_ids, centroid_z)}
    cost = 0.0
    for feature, level in spec.levels.items():
        if feature not in lookup:
            raise ValidationError(
                f"label '{spec.label_name}' references feature '{feature}' "
                "absent from the model",
                field="levels",
            )
        cost += abs(LEVEL_TARGETS[level] - lookup[feature])
    return cost


def solve_assignment(cost) -> tuple[list[int], float]:
    """Exact minimum-cost square assignment via shortest augmenting paths.

    Classic potentials formulation, O(n^3). Returns (column per row, total).
    """
    cost = np.asarray(cost, dtype=np.float64)
    n = cost.shape[0]
    if cost.ndim != 2 or cost.shape != (n, n):
        raise ValidationError("cost matrix must be square")
    if n == 0:
        return [], 0.0
    INF = float("inf")
    # 1-indexed arrays; index 0 is the virtual column used to stage each row.
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    col_row = [0] * (n + 1)  # col_row[j] = row currently matched to column j
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        col_row[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = col_row[j0]
            delta = INF
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[col_row[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if col_row[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            col_row[j0] = col_row[j1]
            j0 = j1
    cols = [0] * n
    for j in range(1, n + 1):
        cols[col_row[j] - 1] = j - 1
    total = float(sum(cost[i, cols[i]] for i in range(n)))
    return cols, total


def _lexicographic_refine(cost: np.ndarray, names: list[str], optimum: float) -> list[int]:
    """Among minimum-cost bijections pick the lexicographically smallest
    label-name vector (cluster 0 first). Fix clusters one by one, verifying
    with a sub-assignment solve that the optimum stays reachable."""
    n = cost.shape[0]
    tol = 1e-9 * max(1.0, abs(optimum))
    fixed: list[int] = []
    fixed_cost = 0.0
    remaining_rows = list(range(n))
    remaining_cols = list(range(n))
    for row in range(n):
        remaining_rows.remove(row)
        for col in sorted(remaining_cols, key=lambda j: names[j]):
            rest_cols = [j for j in remaining_cols if j != col]
            if remaining_rows:
                sub = cost[np.ix_(remaining_rows, rest_cols)]
                _, rest_cost = solve_assignment(sub)
            else:
                rest_cost = 0.0
            if fixed_cost + cost[row, col] + rest_cost <= optimum + tol:
                fixed.append(col)
                fixed_cost += float(cost[row, col])
                remaining_cols.remove(col)
                break
        else:  # pragma: no cover - unreachable if the solver is correct
            raise AssertionError("no label completes a minimum-cost assignment")
    return fixed


def assign_labels(
    centroids: Sequence[Sequence[float]] | np.ndarray,
    specs: Sequence[LabelSpec],
    feature_ids: Sequence[str] | None = None,
    cost_matrix: Sequence[Sequence[float]] | None = None,
) -> LabelAssignment:
    """Match label specs to cluster centroids at minimum total cost.

    One spec per non-noise cluster is required (the bijection rule); ties
    between equally cheap bijections resolve to the lexicographically
    smallest label-name vector. A precomputed ``cost_matrix`` may be passed
    instead of deriving one from centroids and specs.
    """
    specs = list(specs)
    names = [s.label_name for s in specs]
    if len(set(names)) != len(names):
        raise ValidationError("label names must be distinct", field="label_specs")
    if cost_matrix is not None:
        cost = np.asarray(cost_matrix, dtype=np.float64)
        if cost.shape != (len(specs), len(specs)):
            raise ValidationError("cost matrix shape must be |clusters| x |labels|")
    else:
        centroids = np.asarray(centroids, dtype=np.float64)
        if len(specs) != centroids.shape[0]:
            raise ValidationError(
                f"{centroids.shape[0]} cluster(s) but {len(specs)} label spec(s); "
                "add or remove labels so every cluster gets exactly one",
                field="label_specs",
            )
        cost = np.array(
            [[label_cost(c, s, feature_ids=feature_ids) for s in specs] for c in centroids]
        )
    _, optimum = solve_assignment(cost)
    cols = _lexicographic_refine(cost, names, optimum)
    mapping = {row: names[col] for row, col in enumerate(cols)}
    per_cluster = {row: float(cost[row, col]) for row, col in enumerate(cols)}
    return LabelAssignment(
        mapping=mapping,
        cost_matrix=[[float(v) for v in row] for row in cost],
        total_cost=float(sum(per_cluster.values())),
        per_cluster_cost=per_cluster,
    )


def cluster_level_labels(
    assignment: LabelAssignment | None,
    n_clusters: int,
    overrides: Sequence[OverrideRecord] = (),
) -> dict[int, str]:
    """Current label per cluster: optimal assignment plus cluster-scope
    overrides (last writer wins). Unlabeled models get placeholder names."""
    if assignment is not None:
        labels = dict(assignment.mapping)
    else:
        labels = {c: f"Cluster {c}" for c in range(n_clusters)}
    for record in overrides:
        if record.scope.kind == "cluster" and record.scope.cluster in labels:
            labels[record.scope.cluster] = record.target_label
    return labels


def known_label_names(
    assignment: LabelAssignment | None,
    n_clusters: int,
    overrides: Sequence[OverrideRecord] = (),
    has_noise: bool = False,
) -> set[str]:
    names = set(cluster_level_labels(assignment, n_clusters, overrides).values())
    if has_noise:
        names.add(UNSEGMENTED)
    return names


def relabel_cluster(
    overrides: Sequence[OverrideRecord],
    assignment: LabelAssignment | None,
    n_clusters: int,
    cluster: int,
    new_name: str,
    author: str = "operator",
    timestamp: datetime | None = None,
) -> OverrideRecord:
    """Rename one cluster via a cluster-scope override record.

    The original optimal assignment stays in history; the new name must be
    non-empty and not collide with any other cluster's current label.
    """
    if not (0 <= cluster < n_clusters):
        raise ValidationError(f"cluster {cluster} does not exist", field="cluster")
    if not new_name:
        raise ValidationError("new label name must be non-empty", field="new_name")
    current = cluster_level_labels(assignment, n_clusters, overrides)
    others = {name for c, name in current.items() if c != cluster}
    if new_name in others or new_name == UNSEGMENTED:
        raise ValidationError(f"label name {new_name!r} is already in use", field="new_name")
    return OverrideRecord(
        scope=OverrideScope.for_cluster(cluster),
        target_label=new_name,
        timestamp=timestamp or datetime.now(timezone.utc),
        author=author,
    )


def make_override(
    scope: OverrideScope,
    target_label: str,
    known_customers: Iterable[str],
    known_labels: Iterable[str],
    n_clusters: int,
    author: str = "operator",
    timestamp: datetime | None = None,
) -> OverrideRecord:
    """Correct labels for an instance, a cluster or an ad-hoc group.

    The target must be an existing label name and the scope must resolve to
    at least one known customer.
    """
    known_customers = set(known_customers)
    if target_label not in set(known_labels):
        raise ValidationError(f"unknown target label {target_label!r}", field="target_label")
    if scope.kind == "instance":
        if scope.customer_id not in known_customers:
            raise ValidationError(f"unknown customer {scope.customer_id!r}", field="scope")
    elif scope.kind == "group":
        unknown = scope.customer_ids - known_customers
        if unknown:
            raise ValidationError(f"unknown customer(s): {sorted(unknown)}", field="scope")
        if not scope.customer_ids:
            raise ValidationError("group scope must name at least one customer", field="scope")
    elif scope.kind == "cluster":
        if not (0 <= scope.cluster < n_clusters):
            raise ValidationError(f"cluster {scope.cluster} does not exist", field="scope")
    return OverrideRecord(
        scope=scope,
        target_label=target_label,
        timestamp=timestamp or datetime.now(timezone.utc),
        author=author,
    )


def resolve_effective_labels(
    assignment_map: Mapping[str, int],
    label_assignment: LabelAssignment | None,
    overrides: Sequence[OverrideRecord],
    n_clusters: int,
) -> dict[str, str]:
    """Effective label per customer: last covering override wins, otherwise
    the customer's cluster label; noise customers carry the reserved name.

    Pure function of (assignment, override list): replaying the records in
    order reproduces it.
    """
    base = cluster_level_labels(label_assignment, n_clusters, overrides=())
    effective = {}
    for customer, cluster in assignment_map.items():
        label = UNSEGMENTED if cluster < 0 else base[cluster]
        for record in overrides:  # later records win by overwriting
            if record.scope.covers(customer, cluster):
                label = record.target_label
        effective[customer] = label
    return effective
