/** Side-by-side comparison of two stored versions: agreement score, label
 * transition matrix and the customers that moved. */

import type { ApiClient } from './api.js';
import type { CompareDoc } from './types.js';

export class ComparePanel {
  readonly element: HTMLElement;
  report: CompareDoc | null = null;
  private readonly resultBox: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    doc: Document = document,
  ) {
    this.element = doc.createElement('section');
    this.element.className = 'compare-panel';
    const controls = doc.createElement('div');
    const a = doc.createElement('input');
    a.type = 'number';
    a.dataset.role = 'version-a';
    const b = doc.createElement('input');
    b.type = 'number';
    b.dataset.role = 'version-b';
    const go = doc.createElement('button');
    go.textContent = 'compare';
    go.addEventListener('click', () => void this.compare(Number(a.value), Number(b.value)));
    controls.append('version ', a, ' vs ', b, go);
    this.resultBox = doc.createElement('div');
    this.resultBox.className = 'compare-result';
    this.element.append(controls, this.resultBox);
  }

  async compare(a: number, b: number): Promise<CompareDoc> {
    this.report = await this.api.compare(a, b);
    const doc = this.element.ownerDocument;
    this.resultBox.replaceChildren();

    const headline = doc.createElement('p');
    headline.className = 'ari';
    headline.textContent =
      `adjusted Rand index ${this.report.ari} over ${this.report.shared_customers} shared customers`;
    this.resultBox.appendChild(headline);

    const labelsB = [...new Set(Object.values(this.report.transitions).flatMap(Object.keys))].sort();
    const table = doc.createElement('table');
    table.className = 'transition-matrix';
    const head = doc.createElement('tr');
    head.innerHTML = `<th>A \\ B</th>${labelsB.map((l) => `<th>${l}</th>`).join('')}`;
    table.appendChild(head);
    for (const [labelA, row] of Object.entries(this.report.transitions).sort()) {
      const tr = doc.createElement('tr');
      tr.innerHTML =
        `<th>${labelA}</th>` + labelsB.map((l) => `<td>${row[l] ?? 0}</td>`).join('');
      table.appendChild(tr);
    }
    this.resultBox.appendChild(table);

    const moved = doc.createElement('ul');
    moved.className = 'moved';
    for (const m of this.report.moved) {
      const li = doc.createElement('li');
      li.textContent = `${m.customer_id}: ${m.from_label} -> ${m.to_label}`;
      moved.appendChild(li);
    }
    this.resultBox.appendChild(moved);
    return this.report;
  }
}
