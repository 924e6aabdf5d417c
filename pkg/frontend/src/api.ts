/** Typed client for the segmentation service. Every UI action goes through
 * here, so the recorded call log doubles as a replayable transcript. */

import type {
  BuildRequest,
  ClustersDoc,
  CompareDoc,
  DatasetSummary,
  DatasetUpload,
  ExplanationDoc,
  HistoryDoc,
  JobDoc,
  LabelSpec,
  OverrideScope,
  ScatterDoc,
  VersionDetail,
} from './types.js';

export interface RecordedCall {
  method: string;
  path: string;
  body?: string;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

export class ApiClient {
  readonly calls: RecordedCall[] = [];

  constructor(private readonly base: string = '/api/v1') {}

  private async request<T>(method: string, path: string, body?: unknown, raw?: string): Promise<T> {
    const payload = raw ?? (body !== undefined ? JSON.stringify(body) : undefined);
    this.calls.push({ method, path, ...(payload !== undefined ? { body: payload } : {}) });
    const response = await fetch(`${this.base}${path}`, {
      method,
      headers:
        raw !== undefined
          ? { 'Content-Type': 'text/csv' }
          : body !== undefined
            ? { 'Content-Type': 'application/json' }
            : {},
      ...(payload !== undefined ? { body: payload } : {}),
    });
    if (!response.ok) {
      const detail = await response
        .json()
        .then((doc: { detail?: string }) => doc.detail ?? response.statusText)
        .catch(() => response.statusText);
      throw new ApiError(detail, response.status);
    }
    return response.json() as Promise<T>;
  }

  uploadDataset(csv: string, name: string): Promise<DatasetUpload> {
    return this.request('POST', `/datasets?name=${encodeURIComponent(name)}`, undefined, csv);
  }

  datasetSummary(datasetId: string): Promise<DatasetSummary> {
    return this.request('GET', `/datasets/${encodeURIComponent(datasetId)}/summary`);
  }

  submitBuild(request: BuildRequest): Promise<JobDoc> {
    return this.request('POST', '/models', request);
  }

  job(jobId: string): Promise<JobDoc> {
    return this.request('GET', `/jobs/${encodeURIComponent(jobId)}`);
  }

  model(versionId: number): Promise<VersionDetail> {
    return this.request('GET', `/models/${versionId}`);
  }

  clusters(versionId: number): Promise<ClustersDoc> {
    return this.request('GET', `/models/${versionId}/clusters`);
  }

  scatter(versionId: number, axes: string[], space: 'raw' | 'standardized'): Promise<ScatterDoc> {
    const named: string[] = ['x', 'y', 'z'].slice(0, axes.length);
    const query = named.map((name, i) => `${name}=${encodeURIComponent(axes[i])}`).join('&');
    return this.request('GET', `/models/${versionId}/scatter?${query}&space=${space}`);
  }

  submitLabelSpecs(versionId: number, specs: LabelSpec[]): Promise<VersionDetail> {
    return this.request('POST', `/models/${versionId}/labels`, { label_specs: specs });
  }

  relabelCluster(versionId: number, cluster: number, newName: string): Promise<VersionDetail> {
    return this.request('POST', `/models/${versionId}/labels`, {
      relabel: { cluster, new_name: newName },
    });
  }

  override(versionId: number, scope: OverrideScope, targetLabel: string): Promise<VersionDetail> {
    return this.request('POST', `/models/${versionId}/overrides`, {
      scope,
      target_label: targetLabel,
    });
  }

  explanation(versionId: number, customerId: string): Promise<ExplanationDoc> {
    return this.request('GET', `/models/${versionId}/explain/${encodeURIComponent(customerId)}`);
  }

  history(customerId: string, datasetId: string): Promise<HistoryDoc> {
    return this.request(
      'GET',
      `/customers/${encodeURIComponent(customerId)}/history?dataset=${encodeURIComponent(datasetId)}`,
    );
  }

  compare(a: number, b: number): Promise<CompareDoc> {
    return this.request('GET', `/compare?a=${a}&b=${b}`);
  }
}
