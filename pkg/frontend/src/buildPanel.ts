/** Model-building panel: dataset upload, filter window, feature selection,
 * algorithm parameters. K-Means builds continue to the label-mapping step
 * before submission; DBSCAN builds submit immediately and collect labels
 * after discovery. */

import type { ApiClient } from './api.js';
import { option } from './dom.js';
import { LabelMappingForm } from './labelForm.js';
import type { ViewState } from './state.js';
import {
  FEATURE_IDS,
  type BuildRequest,
  type DatasetUpload,
  type JobDoc,
  type LabelSpec,
} from './types.js';

const DBSCAN_DEFAULT_EPS = 0.5;
const DBSCAN_DEFAULT_MIN_PTS = 5;

export interface BuildDraft {
  algorithm: 'kmeans' | 'dbscan';
  features: string[];
  dateStart: string;
  dateEnd: string;
  regions: string[];
  productGroups: string[];
  excludedCustomers: string[];
  k: number;
  seed: number;
  eps: number;
  minPts: number;
}

export function draftToRequest(
  datasetId: string,
  draft: BuildDraft,
  labelSpecs: LabelSpec[] | null,
): BuildRequest {
  return {
    dataset_id: datasetId,
    filter: {
      date_start: draft.dateStart,
      date_end: draft.dateEnd,
      regions: draft.regions.length ? draft.regions : null,
      product_groups: draft.productGroups.length ? draft.productGroups : null,
      excluded_customers: draft.excludedCustomers.length ? draft.excludedCustomers : null,
    },
    features: draft.features,
    algorithm: draft.algorithm,
    params:
      draft.algorithm === 'kmeans'
        ? { k: draft.k, seed: draft.seed }
        : { eps: draft.eps, min_pts: draft.minPts },
    label_specs: labelSpecs,
  };
}

export class BuildPanel {
  readonly element: HTMLElement;
  dataset: DatasetUpload | null = null;
  draft: BuildDraft = {
    algorithm: 'kmeans',
    features: ['profit', 'volume_tons', 'frequency'],
    dateStart: '',
    dateEnd: '',
    regions: [],
    productGroups: [],
    excludedCustomers: [],
    k: 3,
    seed: 7,
    eps: DBSCAN_DEFAULT_EPS,
    minPts: DBSCAN_DEFAULT_MIN_PTS,
  };
  onReady: ((versionId: number) => void) | null = null;
  pollInterval = 250;
  private readonly doc: Document;
  private readonly statusBox: HTMLElement;
  private readonly mappingBox: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    private readonly state: ViewState,
    doc: Document = document,
  ) {
    this.doc = doc;
    this.element = doc.createElement('section');
    this.element.className = 'build-panel';
    this.statusBox = doc.createElement('p');
    this.statusBox.className = 'build-status';
    this.mappingBox = doc.createElement('div');
    this.mappingBox.className = 'mapping-box';
    this.renderForm();
    this.element.append(this.statusBox, this.mappingBox);
  }

  async uploadCsv(name: string, text: string): Promise<DatasetUpload> {
    this.dataset = await this.api.uploadDataset(text, name);
    this.state.datasetId = this.dataset.dataset_id;
    this.draft.dateStart = this.dataset.summary.date_range.start ?? '';
    this.draft.dateEnd = this.dataset.summary.date_range.end ?? '';
    this.status(
      `dataset ${this.dataset.dataset_id}: ${this.dataset.summary.customers} customers, ` +
        `${this.dataset.summary.transactions} transactions, ${this.dataset.rows_rejected} rejected rows`,
    );
    return this.dataset;
  }

  /** K-Means path: open the label-mapping form for k clusters. */
  openLabelMapping(): LabelMappingForm {
    const form = new LabelMappingForm(
      this.draft.k,
      this.draft.features,
      (specs) => void this.submit(specs),
      this.doc,
    );
    this.mappingBox.replaceChildren(form.element);
    this.state.panel = 'map-labels';
    return form;
  }

  async submit(labelSpecs: LabelSpec[] | null): Promise<JobDoc> {
    if (!this.state.datasetId) throw new Error('upload a dataset first');
    const request = draftToRequest(this.state.datasetId, this.draft, labelSpecs);
    let job = await this.api.submitBuild(request);
    this.status(`job ${job.job_id}: ${job.state}`);
    job = await this.pollUntilSettled(job);
    if (job.state === 'failed') {
      const fields = job.error?.fields?.map((f) => `${f.field}: ${f.message}`).join('; ');
      this.status(`build failed — ${fields || job.error?.message || 'unknown error'}`);
      return job;
    }
    const versionId = job.version_id!;
    if (this.draft.algorithm === 'dbscan') {
      await this.collectDiscoveredLabels(versionId);
    }
    this.status(`version ${versionId} ready`);
    this.state.versionId = versionId;
    if (this.onReady) this.onReady(versionId);
    return job;
  }

  private async pollUntilSettled(job: JobDoc): Promise<JobDoc> {
    let current = job;
    while (current.state === 'queued' || current.state === 'running') {
      await new Promise((resolve) => setTimeout(resolve, this.pollInterval));
      current = await this.api.job(current.job_id);
      this.status(`job ${current.job_id}: ${current.state} (${current.progress})`);
    }
    return current;
  }

  /** DBSCAN phase two: the cluster count is only known after the build. */
  private async collectDiscoveredLabels(versionId: number): Promise<void> {
    const detail = await this.api.model(versionId);
    const discovered = detail.model.centroids.length;
    if (discovered === 0) {
      this.status('no dense clusters discovered; everything is noise');
      return;
    }
    await new Promise<void>((resolve) => {
      const form = new LabelMappingForm(
        discovered,
        this.draft.features,
        (specs) =>
          void this.api.submitLabelSpecs(versionId, specs).then(() => {
            this.mappingBox.replaceChildren();
            resolve();
          }),
        this.doc,
      );
      this.mappingBox.replaceChildren(
        Object.assign(this.doc.createElement('p'), {
          textContent: `dbscan discovered ${discovered} cluster(s); name them:`,
        }),
        form.element,
      );
    });
  }

  private status(message: string): void {
    this.statusBox.textContent = message;
  }

  private renderForm(): void {
    const form = this.doc.createElement('div');
    form.className = 'build-form';

    const features = this.doc.createElement('fieldset');
    features.appendChild(Object.assign(this.doc.createElement('legend'), { textContent: 'features' }));
    for (const feature of FEATURE_IDS) {
      const label = this.doc.createElement('label');
      const box = this.doc.createElement('input');
      box.type = 'checkbox';
      box.value = feature;
      box.checked = this.draft.features.includes(feature);
      box.addEventListener('change', () => {
        this.draft.features = box.checked
          ? [...this.draft.features, feature]
          : this.draft.features.filter((f) => f !== feature);
      });
      label.append(box, feature);
      features.appendChild(label);
    }
    form.appendChild(features);

    const numeric = (
      name: keyof BuildDraft & ('k' | 'seed' | 'eps' | 'minPts'),
      text: string,
    ) => {
      const label = this.doc.createElement('label');
      const input = this.doc.createElement('input');
      input.type = 'number';
      input.value = String(this.draft[name]);
      input.dataset.param = name;
      input.addEventListener('change', () => {
        this.draft[name] = Number(input.value);
      });
      label.append(text, input);
      return label;
    };

    const algorithm = this.doc.createElement('select');
    algorithm.dataset.role = 'algorithm';
    algorithm.append(option(this.doc, 'kmeans', 'kmeans'), option(this.doc, 'dbscan', 'dbscan'));
    algorithm.addEventListener('change', () => {
      this.draft.algorithm = algorithm.value as 'kmeans' | 'dbscan';
    });
    form.append(
      algorithm,
      numeric('k', 'clusters (k) '),
      numeric('seed', 'seed '),
      numeric('eps', 'eps '),
      numeric('minPts', 'min pts '),
    );

    const dates = this.doc.createElement('div');
    const start = this.doc.createElement('input');
    start.type = 'date';
    start.dataset.role = 'date-start';
    start.addEventListener('change', () => (this.draft.dateStart = start.value));
    const end = this.doc.createElement('input');
    end.type = 'date';
    end.dataset.role = 'date-end';
    end.addEventListener('change', () => (this.draft.dateEnd = end.value));
    dates.append('window ', start, ' to ', end);
    form.appendChild(dates);

    const next = this.doc.createElement('button');
    next.textContent = 'continue';
    next.dataset.role = 'continue';
    next.addEventListener('click', () => {
      if (this.draft.algorithm === 'kmeans') {
        this.openLabelMapping();
      } else {
        void this.submit(null);
      }
    });
    form.appendChild(next);

    this.element.appendChild(form);
  }
}
