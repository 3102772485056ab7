import { ApiClient, LatestWins } from "./api.js";
import { ChartsView } from "./charts.js";
import { CodeView } from "./code.js";
import { DiffView } from "./diffview.js";
import { visibleRows } from "./filters.js";
import { GraphView } from "./graph.js";
import { HeaderView } from "./header.js";
import { OptionModal } from "./modal.js";
import { Store } from "./state.js";
import { TableView } from "./table.js";
import type {
  MetricsPayload,
  OptimizationSelection,
  SummaryPayload,
  TimelinePayload,
} from "./types.js";
import { decodeUrlState, encodeUrlState, type UrlState } from "./url.js";

export const SIMULATE_DEBOUNCE_MS = 150;

/** Wires the views to one store and one API client. Simulation calls are
 * debounced and latest-wins so fast interaction never shows stale numbers. */
export class App {
  readonly store = new Store();
  private api: ApiClient;
  private urlState: UrlState;
  private modelId: string | null = null;
  private meta: SummaryPayload | null = null;
  private metrics: MetricsPayload | null = null;
  private timeline: TimelinePayload | null = null;

  private header: HeaderView;
  private table: TableView;
  private graph: GraphView;
  private charts: ChartsView;
  private code: CodeView;
  private diff: DiffView;
  private modal: OptionModal;

  private simulateTimer: ReturnType<typeof setTimeout> | null = null;
  private inflight = new LatestWins();
  private layoutInflight = new LatestWins();

  constructor(private readonly root: HTMLElement) {
    this.urlState = decodeUrlState(location.pathname, location.search);
    this.api = new ApiClient({
      user: localStorage.getItem("tasklens-user") ?? "anonymous",
      token: this.urlState.token,
    });

    this.header = new HeaderView(this.pane("header"));
    this.table = new TableView(this.pane("table"), this.store, (task, name) => {
      void this.openModal(task, name);
    });
    this.graph = new GraphView(this.pane("graph"), this.store);
    this.charts = new ChartsView(this.pane("charts"), this.store);
    this.code = new CodeView(this.pane("code"), this.store, this.api, () => this.modelId);
    this.diff = new DiffView(this.pane("diff"));
    this.modal = new OptionModal(root, this.store, (task, option) => {
      this.store.targetTask({ task, ...option.config });
    });

    this.store.subscribe((state) => {
      this.showTab(state.tab);
      this.scheduleSimulate(state.optimization);
      void this.refreshLayout([...state.collapsed]);
      if (state.tab === "code" && state.selected.size === 1) {
        void this.code.showTask([...state.selected][0]!);
      }
    });
    this.store.setTab(this.urlState.tab);
  }

  private pane(name: string): HTMLElement {
    let el = this.root.querySelector<HTMLElement>(`#pane-${name}`);
    if (!el) {
      el = document.createElement("div");
      el.id = `pane-${name}`;
      el.className = `pane pane-${name}`;
      this.root.appendChild(el);
    }
    return el;
  }

  private showTab(tab: string): void {
    for (const pane of this.root.querySelectorAll<HTMLElement>(".pane")) {
      const name = pane.id.replace("pane-", "");
      if (name === "header") continue;
      pane.classList.toggle("hidden", name !== tab);
    }
  }

  async boot(): Promise<void> {
    if (!this.urlState.model) return;
    this.modelId = this.urlState.model;
    let selection: OptimizationSelection = {};
    if (this.urlState.analysis) {
      const { analyses } = await this.api.listAnalyses(this.modelId);
      const hit = analyses.find((a) => a.analysis_id === this.urlState.analysis);
      if (hit) selection = hit.selection;
    }
    this.meta = await this.api.summary(this.modelId);
    this.timeline = await this.api.timeline(this.modelId);
    this.store.setOptimization(selection); // triggers first simulate+render
  }

  /** Upload a package, then navigate to the fresh model. */
  async upload(file: File): Promise<void> {
    const record = await this.api.uploadModel(file, file.name);
    this.modelId = record.model_id;
    this.urlState = { ...this.urlState, model: record.model_id };
    history.pushState(null, "", encodeUrlState(this.urlState));
    this.meta = await this.api.summary(this.modelId);
    this.timeline = await this.api.timeline(this.modelId);
    this.store.revertOptimization();
  }

  private scheduleSimulate(selection: OptimizationSelection): void {
    if (this.simulateTimer !== null) clearTimeout(this.simulateTimer);
    this.simulateTimer = setTimeout(() => {
      this.simulateTimer = null;
      void this.runSimulate(selection);
    }, SIMULATE_DEBOUNCE_MS);
  }

  private async runSimulate(selection: OptimizationSelection): Promise<void> {
    if (!this.modelId) return;
    const metrics = await this.inflight.run((signal) =>
      this.api.metrics(this.modelId!, { selection }, signal),
    );
    if (!metrics) return; // superseded
    this.metrics = metrics;
    this.renderAll();
  }

  private async refreshLayout(collapse: string[]): Promise<void> {
    if (!this.modelId || !this.metrics) return;
    const layout = await this.layoutInflight.run((signal) =>
      this.api.layout(this.modelId!, collapse, signal),
    );
    if (!layout || !this.metrics) return;
    const visible = new Set(
      visibleRows(this.metrics.rows, this.store.get()).map((r) => r.task),
    );
    this.graph.setData(layout, this.metrics.rows, visible);
  }

  private renderAll(): void {
    if (!this.metrics || !this.meta) return;
    this.header.render(this.meta, this.metrics.summary);
    this.table.setPayload(this.metrics);
    if (this.timeline) this.charts.setData(this.metrics.rows, this.timeline);
    void this.refreshLayout([...this.store.get().collapsed]);
  }

  private async openModal(taskId: number, name: string): Promise<void> {
    if (!this.modelId) return;
    const payload = await this.api.options(this.modelId, taskId);
    this.modal.open(payload, name);
  }

  async saveAnalysis(name: string): Promise<string | null> {
    if (!this.modelId) return null;
    const analysis = await this.api.saveAnalysis(
      this.modelId,
      name,
      this.store.get().optimization,
    );
    this.urlState = { ...this.urlState, analysis: analysis.analysis_id };
    history.pushState(null, "", encodeUrlState(this.urlState));
    return analysis.analysis_id;
  }

  async shareLink(): Promise<string | null> {
    if (!this.modelId) return null;
    const record = await this.api.share(this.modelId, { link_sharing: true });
    const shared: UrlState = { ...this.urlState, token: record.share_token ?? null };
    return encodeUrlState(shared);
  }

  async showDiff(targetId: string): Promise<void> {
    if (!this.modelId) return;
    const [diff, base, target] = await Promise.all([
      this.api.diff(this.modelId, targetId),
      this.api.metrics(this.modelId, {}),
      this.api.metrics(targetId, {}),
    ]);
    this.diff.render(diff, base.rows, target.rows);
    this.store.setTab("diff");
  }
}
