/** Application shell: tabbed panels sharing one view state and one API
 * client. The segmentation service is the single source of truth; panels
 * only render what it returns. */

import { ApiClient } from './api.js';
import { BuildPanel } from './buildPanel.js';
import { ComparePanel } from './comparePanel.js';
import { InspectView } from './inspect.js';
import { ViewState, type Panel } from './state.js';

export class App {
  readonly state = new ViewState();
  readonly build: BuildPanel;
  readonly inspect: InspectView;
  readonly compare: ComparePanel;
  private readonly panels: Record<'build' | 'inspect' | 'compare', HTMLElement>;

  constructor(
    root: HTMLElement,
    readonly api: ApiClient = new ApiClient(),
    doc: Document = document,
  ) {
    this.build = new BuildPanel(api, this.state, doc);
    this.inspect = new InspectView(api, this.state, doc);
    this.compare = new ComparePanel(api, doc);
    this.panels = {
      build: this.build.element,
      inspect: this.inspect.element,
      compare: this.compare.element,
    };

    const nav = doc.createElement('nav');
    for (const name of ['build', 'inspect', 'compare'] as const) {
      const button = doc.createElement('button');
      button.textContent = name;
      button.dataset.panel = name;
      button.addEventListener('click', () => this.showPanel(name));
      nav.appendChild(button);
    }
    root.append(nav, this.build.element, this.inspect.element, this.compare.element);

    this.build.onReady = (versionId) => {
      void this.inspect.load(versionId).then(() => this.showPanel('inspect'));
    };
    this.showPanel('build');
  }

  showPanel(panel: Panel): void {
    const target = panel === 'map-labels' ? 'build' : panel;
    this.state.panel = panel;
    for (const [name, element] of Object.entries(this.panels)) {
      element.hidden = name !== target;
    }
  }
}

export function bootstrap(root: HTMLElement): App {
  return new App(root);
}
