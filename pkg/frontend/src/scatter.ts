/** Canvas scatter plot: 2-D directly, 3-D through an orthographic
 * projection with drag-to-rotate. Picking and box selection run on the
 * projected coordinates, so they work headlessly too. */

import type { ScatterPoint } from './types.js';

export interface Projected {
  x: number;
  y: number;
  index: number;
}

const PALETTE = [
  '#4e79a7',
  '#f28e2b',
  '#59a14f',
  '#e15759',
  '#b07aa1',
  '#76b7b2',
  '#edc948',
  '#9c755f',
];

export function colorFor(label: string, order: string[]): string {
  const index = order.indexOf(label);
  return index >= 0 ? PALETTE[index % PALETTE.length] : '#777777';
}

/** Orthographic rotation: yaw about the vertical axis, then pitch. */
export function rotate(values: number[], yaw: number, pitch: number): [number, number] {
  const [x, y, z = 0] = values;
  const cy = Math.cos(yaw);
  const sy = Math.sin(yaw);
  const cp = Math.cos(pitch);
  const sp = Math.sin(pitch);
  const rx = cy * x + sy * z;
  const rz = -sy * x + cy * z;
  const ry = cp * y - sp * rz;
  return [rx, ry];
}

export function projectAll(
  points: ScatterPoint[],
  width: number,
  height: number,
  yaw: number,
  pitch: number,
  margin = 24,
): Projected[] {
  if (!points.length) return [];
  const flat = points.map((p) => rotate(p.values, yaw, pitch));
  const xs = flat.map((v) => v[0]);
  const ys = flat.map((v) => v[1]);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  return flat.map(([x, y], index) => ({
    index,
    x: margin + ((x - minX) / spanX) * (width - 2 * margin),
    y: height - margin - ((y - minY) / spanY) * (height - 2 * margin),
  }));
}

export function nearestWithin(
  projected: Projected[],
  x: number,
  y: number,
  radius: number,
): number | null {
  let best: number | null = null;
  let bestSq = radius * radius;
  for (const p of projected) {
    const d = (p.x - x) ** 2 + (p.y - y) ** 2;
    if (d <= bestSq) {
      bestSq = d;
      best = p.index;
    }
  }
  return best;
}

export function insideBox(
  projected: Projected[],
  x0: number,
  y0: number,
  x1: number,
  y1: number,
): number[] {
  const [left, right] = x0 <= x1 ? [x0, x1] : [x1, x0];
  const [top, bottom] = y0 <= y1 ? [y0, y1] : [y1, y0];
  return projected
    .filter((p) => p.x >= left && p.x <= right && p.y >= top && p.y <= bottom)
    .map((p) => p.index);
}

export class ScatterPlot {
  readonly element: HTMLCanvasElement;
  points: ScatterPoint[] = [];
  labelOrder: string[] = [];
  yaw = 0.6;
  pitch = 0.4;
  onPick: ((customerId: string) => void) | null = null;
  onBoxSelect: ((customerIds: string[]) => void) | null = null;
  private is3D = false;
  private drag: { x: number; y: number; box: boolean; moved: boolean } | null = null;

  constructor(doc: Document = document, width = 640, height = 420) {
    this.element = doc.createElement('canvas');
    this.element.width = width;
    this.element.height = height;
    this.element.className = 'scatter';
    this.element.addEventListener('mousedown', (e) => {
      this.drag = { x: e.offsetX, y: e.offsetY, box: e.shiftKey, moved: false };
    });
    this.element.addEventListener('mousemove', (e) => {
      if (!this.drag) return;
      const dx = e.offsetX - this.drag.x;
      const dy = e.offsetY - this.drag.y;
      if (Math.abs(dx) + Math.abs(dy) > 2) this.drag.moved = true;
      if (!this.drag.box && this.is3D && this.drag.moved) {
        this.yaw += dx * 0.01;
        this.pitch += dy * 0.01;
        this.drag.x = e.offsetX;
        this.drag.y = e.offsetY;
        this.draw();
      }
    });
    this.element.addEventListener('mouseup', (e) => {
      if (!this.drag) return;
      const start = this.drag;
      this.drag = null;
      if (start.box && start.moved) {
        this.selectBox(start.x, start.y, e.offsetX, e.offsetY);
      } else if (!start.moved) {
        this.pickAt(e.offsetX, e.offsetY);
      }
    });
  }

  setData(points: ScatterPoint[], axes: string[], labelOrder: string[]): void {
    this.points = points;
    this.is3D = axes.length === 3;
    this.labelOrder = labelOrder;
    this.draw();
  }

  projected(): Projected[] {
    const [yaw, pitch] = this.is3D ? [this.yaw, this.pitch] : [0, 0];
    return projectAll(this.points, this.element.width, this.element.height, yaw, pitch);
  }

  pickAt(x: number, y: number): void {
    const hit = nearestWithin(this.projected(), x, y, 8);
    if (hit !== null && this.onPick) this.onPick(this.points[hit].customer_id);
  }

  selectBox(x0: number, y0: number, x1: number, y1: number): void {
    const ids = insideBox(this.projected(), x0, y0, x1, y1).map(
      (i) => this.points[i].customer_id,
    );
    if (ids.length && this.onBoxSelect) this.onBoxSelect(ids);
  }

  draw(): void {
    const ctx = this.element.getContext('2d');
    if (!ctx) return; // headless test environment
    ctx.clearRect(0, 0, this.element.width, this.element.height);
    const projected = this.projected();
    for (const p of projected) {
      const point = this.points[p.index];
      ctx.beginPath();
      ctx.fillStyle = colorFor(point.label, this.labelOrder);
      ctx.arc(p.x, p.y, 5, 0, Math.PI * 2);
      ctx.fill();
    }
  }
}
