/** View state shared across panels. Scatter axes are constrained to the
 * model's feature selection; the 3-D view is exactly the 3-axis case. */

export type Panel = 'build' | 'map-labels' | 'inspect' | 'compare';

export class ViewState {
  datasetId: string | null = null;
  versionId: number | null = null;
  panel: Panel = 'build';
  space: 'raw' | 'standardized' = 'standardized';
  selectedCustomer: string | null = null;
  private axisList: string[] = [];

  get axes(): string[] {
    return [...this.axisList];
  }

  get is3D(): boolean {
    return this.axisList.length === 3;
  }

  setAxes(axes: string[], modelFeatures: string[]): void {
    if (axes.length < 2 || axes.length > 3) {
      throw new Error('choose 2 or 3 scatter axes');
    }
    if (new Set(axes).size !== axes.length) {
      throw new Error('scatter axes must be distinct');
    }
    const stray = axes.filter((a) => !modelFeatures.includes(a));
    if (stray.length) {
      throw new Error(`axes outside the model's features: ${stray.join(', ')}`);
    }
    this.axisList = [...axes];
  }

  defaultAxes(modelFeatures: string[]): string[] {
    this.axisList = modelFeatures.slice(0, Math.min(2, modelFeatures.length));
    return this.axes;
  }
}
