/** Wire types of the /api/v1 surface. The UI renders these verbatim and
 * never recomputes a number the server already provides. */

export const FEATURE_IDS = [
  'recency_days',
  'frequency',
  'monetary_revenue',
  'profit',
  'volume_tons',
  'interpurchase_interval_days',
  'avg_profit_per_ton',
] as const;

export type FeatureId = (typeof FEATURE_IDS)[number];

export const LEVELS = ['very_low', 'low', 'moderate', 'high', 'very_high'] as const;

export type Level = (typeof LEVELS)[number];

export const UNSEGMENTED = 'Unsegmented';

export interface LabelSpec {
  label_name: string;
  levels: Record<string, Level>;
}

export interface FilterDoc {
  date_start: string;
  date_end: string;
  regions: string[] | null;
  product_groups: string[] | null;
  excluded_customers: string[] | null;
}

export interface BuildRequest {
  dataset_id: string;
  filter: FilterDoc;
  features: string[];
  algorithm: 'kmeans' | 'dbscan';
  params: Record<string, number>;
  label_specs: LabelSpec[] | null;
}

export interface JobDoc {
  job_id: string;
  state: 'queued' | 'running' | 'ready' | 'failed';
  progress: string;
  version_id: number | null;
  error: { message: string; fields: { field: string | null; message: string }[] } | null;
}

export interface DatasetUpload {
  dataset_id: string;
  name: string;
  rows_accepted: number;
  rows_rejected: number;
  rejects: { row_number: number; reason: string }[];
  summary: DatasetSummary;
}

export interface DatasetSummary {
  dataset_id: string;
  name: string;
  transactions: number;
  customers: number;
  date_range: { start: string | null; end: string | null };
  regions: string[];
  product_groups: string[];
}

export interface ModelDoc {
  algorithm: string;
  params: Record<string, number>;
  assignment: Record<string, number>;
  centroids: number[][];
  feature_ids: string[];
  iterations_run: number;
  converged: boolean;
  wcss: number;
}

export interface LabelAssignmentDoc {
  mapping: Record<string, string>;
  total_cost: number;
  per_cluster_cost: Record<string, number>;
}

export interface VersionDetail {
  version_id: number;
  created_at: string;
  config: { dataset_id: string; features: string[]; algorithm: string; params: Record<string, number> };
  model: ModelDoc;
  labels: LabelAssignmentDoc | null;
  overrides: unknown[];
  metrics: { wcss: number; silhouette: number | null };
  effective_labels: Record<string, string>;
}

export interface RuleDoc {
  feature: string;
  direction: 'high' | 'low';
  centroid_z: number;
  cluster_mean: number;
  global_mean: number;
}

export interface ClusterView {
  cluster: number;
  label: string;
  size: number;
  feature_stats: Record<string, { mean: number; median: number; min: number; max: number }>;
  centroid_z: Record<string, number>;
  profit_share: number | null;
  volume_share: number | null;
  rules: RuleDoc[];
}

export interface ClustersDoc {
  version_id: number;
  rule_threshold: number;
  clusters: ClusterView[];
  noise_size: number;
  noise_label: string;
}

export interface ScatterPoint {
  customer_id: string;
  values: number[];
  cluster: number;
  label: string;
}

export interface ScatterDoc {
  version_id: number;
  axes: string[];
  space: 'raw' | 'standardized';
  points: ScatterPoint[];
}

export interface ExplanationDoc {
  customer_id: string;
  cluster: number;
  coefficients: Record<string, number>;
  intercept: number;
  fidelity: number;
  sample_count: number;
  kernel_width: number;
  top: { feature: string; coefficient: number }[];
}

export interface HistoryDoc {
  customer_id: string;
  dataset_id: string;
  transactions: {
    customer_id: string;
    order_date: string;
    revenue: number;
    cost: number;
    volume_tons: number;
    product_group: string;
    region: string;
  }[];
  monthly: { month: string; revenue: number; profit: number; volume_tons: number }[];
}

export interface CompareDoc {
  version_a: number;
  version_b: number;
  shared_customers: number;
  ari: number;
  transitions: Record<string, Record<string, number>>;
  moved: { customer_id: string; from_label: string; to_label: string }[];
}

export type OverrideScope =
  | { type: 'instance'; customer_id: string }
  | { type: 'cluster'; cluster: number }
  | { type: 'group'; customer_ids: string[] };
