"""Pydantic wire schemas for the /api/v1 surface.

These models document and validate every request and response body; the
contract tests build them straight from live responses.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict


class FilterDoc(BaseModel):
    date_start: str
    date_end: str
    regions: list[str] | None = None
    product_groups: list[str] | None = None
    excluded_customers: list[str] | None = None


class LabelSpecDoc(BaseModel):
    label_name: str
    levels: dict[str, str]


class BuildRequestBody(BaseModel):
    """Semantic validation happens in the pipeline so that bad values yield
    a failed job with field-level messages rather than a 422."""

    model_config = ConfigDict(extra="forbid")

    dataset_id: str
    filter: FilterDoc
    features: list[str]
    algorithm: str
    params: dict
    label_specs: list[LabelSpecDoc] | None = None


class JobError(BaseModel):
    message: str
    fields: list[dict] = []


class JobDoc(BaseModel):
    job_id: str
    state: Literal["queued", "running", "ready", "failed"]
    progress: str
    version_id: int | None = None
    error: JobError | None = None
    created_at: str


class RejectDoc(BaseModel):
    row_number: int
    reason: str


class DateRange(BaseModel):
    start: str | None
    end: str | None


class DatasetSummaryDoc(BaseModel):
    dataset_id: str
    name: str
    transactions: int
    customers: int
    date_range: DateRange
    regions: list[str]
    product_groups: list[str]
    rows_rejected: int


class DatasetUploadDoc(BaseModel):
    dataset_id: str
    name: str
    sha256: str
    rows_accepted: int
    rows_rejected: int
    rejects: list[RejectDoc]
    rejects_truncated: bool
    summary: DatasetSummaryDoc


class ConfigDoc(BaseModel):
    dataset_id: str
    filter: FilterDoc
    features: list[str]
    algorithm: str
    params: dict
    label_specs: list[LabelSpecDoc] | None


class ModelDoc(BaseModel):
    algorithm: str
    params: dict
    assignment: dict[str, int]
    centroids: list[list[float]]
    feature_ids: list[str]
    iterations_run: int
    converged: bool
    wcss: float


class LabelAssignmentDoc(BaseModel):
    mapping: dict[str, str]  # cluster index (as string) -> label name
    cost_matrix: list[list[float]]
    total_cost: float
    per_cluster_cost: dict[str, float]


class OverrideDoc(BaseModel):
    scope: dict
    target_label: str
    timestamp: str
    author: str


class FeatureStatsDoc(BaseModel):
    mean: float
    median: float
    min: float
    max: float


class ClusterEntryDoc(BaseModel):
    cluster: int
    size: int
    feature_stats: dict[str, FeatureStatsDoc]
    centroid_z: dict[str, float]
    profit_share: float | None
    volume_share: float | None


class StatsDoc(BaseModel):
    clusters: list[ClusterEntryDoc]
    noise_size: int
    global_means: dict[str, float]


class MetricsDoc(BaseModel):
    wcss: float
    silhouette: float | None


class VersionDoc(BaseModel):
    version_id: int
    created_at: str
    config: ConfigDoc
    model: ModelDoc
    labels: LabelAssignmentDoc | None
    overrides: list[OverrideDoc]
    stats: StatsDoc
    metrics: MetricsDoc
    source_hash: str


class VersionDetailDoc(VersionDoc):
    effective_labels: dict[str, str]


class RuleDoc(BaseModel):
    feature: str
    direction: Literal["high", "low"]
    centroid_z: float
    cluster_mean: float
    global_mean: float


class ClusterViewDoc(ClusterEntryDoc):
    label: str
    rules: list[RuleDoc]


class ClustersDoc(BaseModel):
    version_id: int
    rule_threshold: float
    clusters: list[ClusterViewDoc]
    noise_size: int
    noise_label: str


class ScatterPointDoc(BaseModel):
    customer_id: str
    values: list[float]
    cluster: int
    label: str


class ScatterDoc(BaseModel):
    version_id: int
    axes: list[str]
    space: Literal["raw", "standardized"]
    points: list[ScatterPointDoc]


class LabelsUpdateBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label_specs: list[LabelSpecDoc] | None = None
    relabel: dict | None = None  # {"cluster": int, "new_name": str}
    author: str = "operator"


class OverrideBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scope: dict
    target_label: str
    author: str = "operator"


class ExplanationDoc(BaseModel):
    customer_id: str
    cluster: int
    coefficients: dict[str, float]
    intercept: float
    fidelity: float
    sample_count: int
    kernel_width: float
    seed: int
    top: list[dict]


class TransactionDoc(BaseModel):
    customer_id: str
    order_date: str
    revenue: float
    cost: float
    volume_tons: float
    product_group: str
    region: str


class MonthlyRollupDoc(BaseModel):
    month: str
    revenue: float
    profit: float
    volume_tons: float


class HistoryDoc(BaseModel):
    customer_id: str
    dataset_id: str
    transactions: list[TransactionDoc]
    monthly: list[MonthlyRollupDoc]


class CompareDoc(BaseModel):
    version_a: int
    version_b: int
    shared_customers: int
    ari: float
    transitions: dict[str, dict[str, int]]
    moved: list[dict]
