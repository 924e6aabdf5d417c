/** Inspection panel: scatter with legend, customer drill-down card,
 * instance/group overrides and cluster renames. Every number shown here was
 * fetched from the service; after a mutation the panel re-renders from the
 * server's response and a fresh scatter read, never from local optimism. */

import type { ApiClient } from './api.js';
import { option } from './dom.js';
import { ScatterPlot, colorFor } from './scatter.js';
import type { ViewState } from './state.js';
import type {
  ClustersDoc,
  ScatterDoc,
  VersionDetail,
} from './types.js';

function el(doc: Document, tag: string, className?: string, text?: string): HTMLElement {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class InspectView {
  readonly element: HTMLElement;
  readonly plot: ScatterPlot;
  detail: VersionDetail | null = null;
  clusters: ClustersDoc | null = null;
  scatter: ScatterDoc | null = null;
  private readonly doc: Document;
  private readonly legendBox: HTMLElement;
  private readonly cardBox: HTMLElement;
  private readonly toolbarBox: HTMLElement;
  private readonly errorBox: HTMLElement;
  private readonly axisBox: HTMLElement;
  private groupSelection: string[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly state: ViewState,
    doc: Document = document,
  ) {
    this.doc = doc;
    this.element = el(doc, 'section', 'inspect-view');
    this.errorBox = el(doc, 'div', 'error-banner');
    this.errorBox.hidden = true;
    this.axisBox = el(doc, 'div', 'axis-controls');
    this.legendBox = el(doc, 'div', 'legend');
    this.toolbarBox = el(doc, 'div', 'group-toolbar');
    this.toolbarBox.hidden = true;
    this.cardBox = el(doc, 'aside', 'customer-card');
    this.plot = new ScatterPlot(doc);
    this.plot.onPick = (customerId) => void this.selectCustomer(customerId);
    this.plot.onBoxSelect = (ids) => this.showGroupToolbar(ids);

    this.element.append(
      this.errorBox,
      this.axisBox,
      this.legendBox,
      this.plot.element,
      this.toolbarBox,
      this.cardBox,
    );
  }

  labelInventory(): string[] {
    if (!this.clusters) return [];
    return this.clusters.clusters.map((c) => c.label);
  }

  async load(versionId: number): Promise<void> {
    this.detail = await this.api.model(versionId);
    this.clusters = await this.api.clusters(versionId);
    this.state.versionId = versionId;
    this.state.datasetId = this.detail.config.dataset_id;
    if (!this.state.axes.length) {
      this.state.defaultAxes(this.detail.model.feature_ids);
    }
    await this.refreshScatter();
    this.renderAxisControls();
    this.renderLegend();
    this.cardBox.replaceChildren();
    this.hideError();
  }

  async refreshScatter(): Promise<void> {
    if (this.state.versionId === null) return;
    this.scatter = await this.api.scatter(this.state.versionId, this.state.axes, this.state.space);
    this.plot.setData(this.scatter.points, this.scatter.axes, this.labelOrder());
  }

  private labelOrder(): string[] {
    const order = this.labelInventory();
    for (const point of this.scatter?.points ?? []) {
      if (!order.includes(point.label)) order.push(point.label);
    }
    return order;
  }

  async setAxes(axes: string[]): Promise<void> {
    if (!this.detail) return;
    this.state.setAxes(axes, this.detail.model.feature_ids);
    await this.refreshScatter();
    this.renderAxisControls();
  }

  // -- rendering --------------------------------------------------------

  private renderAxisControls(): void {
    if (!this.detail) return;
    this.axisBox.replaceChildren();
    const features = this.detail.model.feature_ids;
    const current = this.state.axes;
    ['x', 'y', 'z'].forEach((name, slot) => {
      const select = this.doc.createElement('select');
      select.dataset.axis = name;
      if (name === 'z') select.appendChild(option(this.doc, '(2-D)', ''));
      for (const f of features) select.appendChild(option(this.doc, f, f));
      select.value = current[slot] ?? '';
      select.addEventListener('change', () => {
        const chosen = ['x', 'y', 'z']
          .map((axis) => {
            const box = this.axisBox.querySelector(
              `select[data-axis="${axis}"]`,
            ) as HTMLSelectElement;
            return box.value;
          })
          .filter((v) => v !== '');
        this.setAxes(chosen).catch((error: Error) =>
          this.showError(error.message, () => this.setAxes(chosen)),
        );
      });
      this.axisBox.appendChild(select);
    });
    const spaceToggle = this.doc.createElement('select');
    spaceToggle.dataset.axis = 'space';
    spaceToggle.appendChild(option(this.doc, 'standardized', 'standardized'));
    spaceToggle.appendChild(option(this.doc, 'raw', 'raw'));
    spaceToggle.value = this.state.space;
    spaceToggle.addEventListener('change', () => {
      this.state.space = spaceToggle.value as 'raw' | 'standardized';
      void this.refreshScatter();
    });
    this.axisBox.appendChild(spaceToggle);
  }

  private renderLegend(): void {
    if (!this.clusters) return;
    this.legendBox.replaceChildren();
    const order = this.labelOrder();
    for (const cluster of this.clusters.clusters) {
      const row = el(this.doc, 'div', 'legend-row');
      row.dataset.cluster = String(cluster.cluster);
      const swatch = el(this.doc, 'span', 'swatch');
      swatch.style.background = colorFor(cluster.label, order);
      const text = el(
        this.doc,
        'span',
        'legend-label',
        `${cluster.label} (${cluster.size})`,
      );
      const renameButton = el(this.doc, 'button', 'rename', 'rename') as HTMLButtonElement;
      renameButton.addEventListener('click', () => {
        const input = row.querySelector('input') as HTMLInputElement | null;
        if (!input) {
          const field = this.doc.createElement('input');
          field.type = 'text';
          field.placeholder = 'new name';
          row.appendChild(field);
          return;
        }
        void this.renameCluster(cluster.cluster, input.value);
      });
      row.append(swatch, text, renameButton);
      this.legendBox.appendChild(row);
    }
    if (this.clusters.noise_size > 0) {
      this.legendBox.appendChild(
        el(
          this.doc,
          'div',
          'legend-row noise',
          `${this.clusters.noise_label} (${this.clusters.noise_size})`,
        ),
      );
    }
  }

  async selectCustomer(customerId: string): Promise<void> {
    if (!this.detail || this.state.versionId === null) return;
    this.state.selectedCustomer = customerId;
    try {
      const history = await this.api.history(customerId, this.detail.config.dataset_id);
      const explanation = await this.api.explanation(this.state.versionId, customerId);
      const cluster = this.detail.model.assignment[customerId];
      const rules =
        this.clusters?.clusters.find((c) => c.cluster === cluster)?.rules ?? [];

      this.cardBox.replaceChildren();
      this.cardBox.dataset.customer = customerId;
      this.cardBox.appendChild(el(this.doc, 'h3', '', customerId));
      this.cardBox.appendChild(
        el(
          this.doc,
          'p',
          'effective-label',
          `label: ${this.detail.effective_labels[customerId]}`,
        ),
      );

      const axisValues = this.scatter?.points.find((p) => p.customer_id === customerId);
      if (axisValues) {
        const values = el(this.doc, 'p', 'axis-values');
        values.textContent = this.state.axes
          .map((axis, i) => `${axis}: ${axisValues.values[i]}`)
          .join(' · ');
        this.cardBox.appendChild(values);
      }

      const historyBlock = el(this.doc, 'div', 'history');
      historyBlock.appendChild(el(this.doc, 'h4', '', 'history'));
      const table = this.doc.createElement('table');
      for (const t of history.transactions) {
        const tr = this.doc.createElement('tr');
        tr.className = 'history-row';
        tr.innerHTML = `<td>${t.order_date}</td><td>${t.revenue}</td><td>${t.volume_tons}</td>`;
        table.appendChild(tr);
      }
      historyBlock.appendChild(table);
      const rollups = el(this.doc, 'p', 'monthly');
      rollups.textContent = history.monthly
        .map((m) => `${m.month}: rev ${m.revenue}, profit ${m.profit}, tons ${m.volume_tons}`)
        .join(' | ');
      historyBlock.appendChild(rollups);
      this.cardBox.appendChild(historyBlock);

      const explBlock = el(this.doc, 'div', 'explanation');
      explBlock.appendChild(el(this.doc, 'h4', '', 'why this segment'));
      for (const item of explanation.top) {
        explBlock.appendChild(
          el(
            this.doc,
            'p',
            'coefficient',
            `${item.feature}: ${item.coefficient > 0 ? '+' : ''}${item.coefficient.toFixed(3)}`,
          ),
        );
      }
      explBlock.appendChild(
        el(this.doc, 'p', 'fidelity', `surrogate fidelity: ${explanation.fidelity.toFixed(3)}`),
      );
      this.cardBox.appendChild(explBlock);

      const rulesBlock = el(this.doc, 'div', 'rules');
      rulesBlock.appendChild(el(this.doc, 'h4', '', 'cluster rules'));
      for (const rule of rules) {
        rulesBlock.appendChild(
          el(this.doc, 'p', 'rule', `${rule.feature} is ${rule.direction} (z=${rule.centroid_z.toFixed(2)})`),
        );
      }
      this.cardBox.appendChild(rulesBlock);

      const overrideRow = el(this.doc, 'div', 'override-row');
      const select = this.doc.createElement('select');
      select.dataset.role = 'override-target';
      for (const label of this.labelInventory()) {
        select.appendChild(option(this.doc, label, label));
      }
      const apply = el(this.doc, 'button', 'apply-override', 'move to label') as HTMLButtonElement;
      apply.addEventListener('click', () => {
        void this.applyInstanceOverride(customerId, select.value);
      });
      overrideRow.append(select, apply);
      this.cardBox.appendChild(overrideRow);
      this.hideError();
    } catch (error) {
      this.showError((error as Error).message, () => this.selectCustomer(customerId));
    }
  }

  private showGroupToolbar(ids: string[]): void {
    this.groupSelection = ids;
    this.toolbarBox.hidden = false;
    this.toolbarBox.replaceChildren();
    this.toolbarBox.appendChild(
      el(this.doc, 'span', 'selection-count', `${ids.length} customers selected`),
    );
    const select = this.doc.createElement('select');
    select.dataset.role = 'group-target';
    for (const label of this.labelInventory()) {
      select.appendChild(option(this.doc, label, label));
    }
    const apply = el(this.doc, 'button', 'apply-group', 'move group') as HTMLButtonElement;
    apply.addEventListener('click', () => {
      void this.applyGroupOverride(this.groupSelection, select.value);
    });
    this.toolbarBox.append(select, apply);
  }

  // -- mutations (server truth only) --------------------------------------

  async applyInstanceOverride(customerId: string, targetLabel: string): Promise<void> {
    if (this.state.versionId === null) return;
    try {
      this.detail = await this.api.override(
        this.state.versionId,
        { type: 'instance', customer_id: customerId },
        targetLabel,
      );
      await this.afterMutation();
      await this.selectCustomer(customerId);
    } catch (error) {
      this.showError((error as Error).message, () =>
        this.applyInstanceOverride(customerId, targetLabel),
      );
    }
  }

  async applyGroupOverride(customerIds: string[], targetLabel: string): Promise<void> {
    if (this.state.versionId === null) return;
    try {
      this.detail = await this.api.override(
        this.state.versionId,
        { type: 'group', customer_ids: customerIds },
        targetLabel,
      );
      this.toolbarBox.hidden = true;
      await this.afterMutation();
    } catch (error) {
      this.showError((error as Error).message, () =>
        this.applyGroupOverride(customerIds, targetLabel),
      );
    }
  }

  async renameCluster(cluster: number, newName: string): Promise<void> {
    if (this.state.versionId === null) return;
    try {
      this.detail = await this.api.relabelCluster(this.state.versionId, cluster, newName);
      await this.afterMutation();
    } catch (error) {
      this.showError((error as Error).message, () => this.renameCluster(cluster, newName));
    }
  }

  /** Refetch read models after any write; the POST response already carries
   * the updated version, the cluster/scatter reads come fresh. */
  private async afterMutation(): Promise<void> {
    if (this.state.versionId === null) return;
    this.clusters = await this.api.clusters(this.state.versionId);
    await this.refreshScatter();
    this.renderLegend();
    this.hideError();
  }

  // -- errors -------------------------------------------------------------

  private showError(message: string, retry: () => Promise<void> | void): void {
    this.errorBox.hidden = false;
    this.errorBox.replaceChildren();
    this.errorBox.appendChild(el(this.doc, 'span', 'error-text', message));
    const button = el(this.doc, 'button', 'retry', 'retry') as HTMLButtonElement;
    button.addEventListener('click', () => void retry());
    this.errorBox.appendChild(button);
  }

  private hideError(): void {
    this.errorBox.hidden = true;
    this.errorBox.replaceChildren();
  }
}
