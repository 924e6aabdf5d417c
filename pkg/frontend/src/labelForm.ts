/** Semantic label mapping: one row per prospective cluster, a name plus an
 * ordinal rating per selected feature. Payloads leave here exactly in the
 * service's LabelSpec serialization. */

import { option } from './dom.js';
import { LEVELS, type LabelSpec, type Level } from './types.js';

export interface LabelRow {
  name: string;
  levels: Record<string, Level | ''>;
}

export function emptyRows(k: number, features: string[]): LabelRow[] {
  return Array.from({ length: k }, () => ({
    name: '',
    levels: Object.fromEntries(features.map((f) => [f, ''])) as Record<string, Level | ''>,
  }));
}

export interface RowValidation {
  ok: boolean;
  message: string | null;
}

export function validateRows(rows: LabelRow[], k: number): RowValidation {
  const names = rows.map((r) => r.name.trim());
  const filled = names.filter((n) => n.length > 0);
  if (filled.length < k) {
    return { ok: false, message: `${filled.length} of ${k} labels named; one label per cluster` };
  }
  if (new Set(filled).size !== filled.length) {
    return { ok: false, message: 'label names must be distinct' };
  }
  return { ok: true, message: null };
}

/** Build the wire payload: features keep selection order, unrated features
 * are omitted (they carry no cost weight server-side). */
export function buildLabelSpecs(rows: LabelRow[], features: string[]): LabelSpec[] {
  return rows.map((row) => {
    const levels: Record<string, Level> = {};
    for (const feature of features) {
      const level = row.levels[feature];
      if (level) levels[feature] = level;
    }
    return { label_name: row.name.trim(), levels };
  });
}

export function serializeLabelSpecs(specs: LabelSpec[]): string {
  return JSON.stringify(specs);
}

export class LabelMappingForm {
  readonly element: HTMLElement;
  private rows: LabelRow[];
  private readonly submitButton: HTMLButtonElement;
  private readonly messageBox: HTMLElement;

  constructor(
    private readonly k: number,
    private readonly features: string[],
    private readonly onSubmit: (specs: LabelSpec[]) => void,
    doc: Document = document,
  ) {
    this.rows = emptyRows(k, features);
    this.element = doc.createElement('div');
    this.element.className = 'label-form';

    const table = doc.createElement('table');
    const head = doc.createElement('tr');
    head.innerHTML =
      '<th>cluster</th><th>label name</th>' +
      features.map((f) => `<th>${f}</th>`).join('');
    table.appendChild(head);

    for (let c = 0; c < k; c++) {
      const row = doc.createElement('tr');
      row.dataset.cluster = String(c);

      const index = doc.createElement('td');
      index.textContent = String(c);
      row.appendChild(index);

      const nameCell = doc.createElement('td');
      const nameInput = doc.createElement('input');
      nameInput.type = 'text';
      nameInput.placeholder = `label for cluster ${c}`;
      nameInput.dataset.role = 'label-name';
      nameInput.addEventListener('input', () => {
        this.rows[c].name = nameInput.value;
        this.refresh();
      });
      nameCell.appendChild(nameInput);
      row.appendChild(nameCell);

      for (const feature of features) {
        const cell = doc.createElement('td');
        const select = doc.createElement('select');
        select.dataset.role = 'level';
        select.dataset.feature = feature;
        select.appendChild(option(doc, '(unrated)', ''));
        for (const level of LEVELS) {
          select.appendChild(option(doc, level.replace('_', ' '), level));
        }
        select.addEventListener('change', () => {
          this.rows[c].levels[feature] = select.value as Level | '';
          this.refresh();
        });
        cell.appendChild(select);
        row.appendChild(cell);
      }
      table.appendChild(row);
    }
    this.element.appendChild(table);

    this.messageBox = doc.createElement('p');
    this.messageBox.className = 'validation-message';
    this.element.appendChild(this.messageBox);

    this.submitButton = doc.createElement('button');
    this.submitButton.textContent = 'Apply labels';
    this.submitButton.addEventListener('click', () => {
      const check = validateRows(this.rows, this.k);
      if (!check.ok) return; // belt and braces; button is disabled anyway
      this.onSubmit(buildLabelSpecs(this.rows, this.features));
    });
    this.element.appendChild(this.submitButton);
    this.refresh();
  }

  setRow(cluster: number, name: string, levels: Record<string, Level | ''>): void {
    this.rows[cluster] = { name, levels: { ...this.rows[cluster].levels, ...levels } };
    const tr = this.element.querySelector(`tr[data-cluster="${cluster}"]`)!;
    (tr.querySelector('input[data-role="label-name"]') as HTMLInputElement).value = name;
    for (const [feature, level] of Object.entries(levels)) {
      const select = tr.querySelector(
        `select[data-feature="${feature}"]`,
      ) as HTMLSelectElement;
      select.value = level;
    }
    this.refresh();
  }

  currentSpecs(): LabelSpec[] {
    return buildLabelSpecs(this.rows, this.features);
  }

  get submitDisabled(): boolean {
    return this.submitButton.disabled;
  }

  get validationMessage(): string {
    return this.messageBox.textContent ?? '';
  }

  private refresh(): void {
    const check = validateRows(this.rows, this.k);
    this.submitButton.disabled = !check.ok;
    this.messageBox.textContent = check.message ?? '';
  }
}
