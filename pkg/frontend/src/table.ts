import { deltaColor } from "./colors.js";
import { parsePredicate, sortRows, visibleRows, type SortDir } from "./filters.js";
import { fmtMetric, fmtPct } from "./format.js";
import type { SelectionState, Store } from "./state.js";
import type { MetricsPayload, MetricsRow, TaskMetrics } from "./types.js";
import { computeWindow } from "./virtual.js";

const ROW_HEIGHT = 26;

/** Virtualized metric table. Sorting, filtering, and column visibility are
 * local view state; row selection and filters live in the shared store. */
export class TableView {
  private payload: MetricsPayload | null = null;
  private sortColumn = "task";
  private sortDir: SortDir = "asc";
  private hidden = new Set<string>();
  private rows: MetricsRow[] = [];
  private scroller: HTMLElement;
  private body: HTMLElement;
  private controls: HTMLElement;

  constructor(
    private readonly host: HTMLElement,
    private readonly store: Store,
    private readonly onOptimize: (taskId: number, name: string) => void,
  ) {
    this.controls = document.createElement("div");
    this.controls.className = "table-controls";
    this.scroller = document.createElement("div");
    this.scroller.className = "table-scroller";
    this.body = document.createElement("div");
    this.scroller.appendChild(this.body);
    host.appendChild(this.controls);
    host.appendChild(this.scroller);
    this.scroller.addEventListener("scroll", () => this.renderBody());
    store.subscribe(() => this.refresh());
    this.renderControls();
  }

  setPayload(payload: MetricsPayload): void {
    this.payload = payload;
    this.refresh();
  }

  /** Currently visible task ids, post filter/sort (used by tests and to
   * keep the charts in sync with what the table shows). */
  visibleTaskIds(): number[] {
    return this.rows.map((r) => r.task);
  }

  setSort(column: string, dir: SortDir): void {
    this.sortColumn = column;
    this.sortDir = dir;
    this.refresh();
  }

  toggleColumn(id: string): void {
    if (!this.hidden.delete(id)) this.hidden.add(id);
    this.refresh();
  }

  private refresh(): void {
    if (!this.payload) return;
    const state = this.store.get();
    this.rows = sortRows(
      visibleRows(this.payload.rows, state),
      this.sortColumn,
      this.sortDir,
    );
    this.renderBody();
  }

  private columns(): { id: string; label: string; description: string }[] {
    if (!this.payload) return [];
    return this.payload.columns.filter((c) => !this.hidden.has(c.id));
  }

  private renderControls(): void {
    this.controls.innerHTML = "";
    const search = document.createElement("input");
    search.placeholder = "search name or id";
    search.className = "search-box";
    search.addEventListener("input", () => this.store.setSearch(search.value));
    this.controls.appendChild(search);

    const filter = document.createElement("input");
    filter.placeholder = "filter, e.g. total_time > 1";
    filter.className = "filter-box";
    filter.addEventListener("keydown", (ev) => {
      if (ev.key !== "Enter") return;
      const p = parsePredicate(filter.value);
      if (p) {
        this.store.addPredicate(p);
        filter.value = "";
        filter.classList.remove("invalid");
      } else {
        filter.classList.add("invalid");
      }
    });
    this.controls.appendChild(filter);

    const clear = document.createElement("button");
    clear.textContent = "Clear filters";
    clear.addEventListener("click", () => this.store.clearFilters());
    this.controls.appendChild(clear);

    const cols = document.createElement("button");
    cols.textContent = "Visible Columns";
    cols.addEventListener("click", () => this.renderColumnPicker());
    this.controls.appendChild(cols);
  }

  private renderColumnPicker(): void {
    const existing = this.controls.querySelector(".column-picker");
    if (existing) {
      existing.remove();
      return;
    }
    const picker = document.createElement("div");
    picker.className = "column-picker";
    for (const col of this.payload?.columns ?? []) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = !this.hidden.has(col.id);
      box.addEventListener("change", () => this.toggleColumn(col.id));
      label.appendChild(box);
      label.appendChild(document.createTextNode(` ${col.label}`));
      label.title = col.description;
      picker.appendChild(label);
    }
    this.controls.appendChild(picker);
  }

  private renderBody(): void {
    if (!this.payload) return;
    const state = this.store.get();
    const win = computeWindow(
      this.rows.length,
      ROW_HEIGHT,
      this.scroller.scrollTop,
      this.scroller.clientHeight || 600,
    );
    this.body.innerHTML = "";

    const table = document.createElement("table");
    table.className = "metric-table";
    const head = table.createTHead().insertRow();
    for (const meta of [{ id: "task", label: "task", description: "task id" },
                        { id: "name", label: "name", description: "task name" }]) {
      head.appendChild(this.headerCell(meta.id, meta.label, meta.description));
    }
    for (const col of this.columns()) {
      head.appendChild(this.headerCell(col.id, col.label, col.description));
    }

    const tbody = table.createTBody();
    const padTop = tbody.insertRow();
    padTop.style.height = `${win.padTop}px`;
    for (let i = win.start; i < win.end; i++) {
      const row = this.rows[i]!;
      tbody.appendChild(this.renderRow(row, state));
    }
    const padBottom = tbody.insertRow();
    padBottom.style.height = `${win.padBottom}px`;
    this.body.appendChild(table);
  }

  private headerCell(id: string, label: string, description: string): HTMLElement {
    const th = document.createElement("th");
    th.textContent = label + (this.sortColumn === id ? (this.sortDir === "asc" ? " ↑" : " ↓") : "");
    th.title = description;
    th.addEventListener("click", () => {
      const dir = this.sortColumn === id && this.sortDir === "desc" ? "asc" : "desc";
      this.setSort(id, dir);
    });
    return th;
  }

  private renderRow(row: MetricsRow, state: SelectionState): HTMLTableRowElement {
    const tr = document.createElement("tr");
    tr.style.height = `${ROW_HEIGHT}px`;
    tr.dataset.task = String(row.task);
    if (state.selected.has(row.task)) tr.classList.add("selected");
    if (row.changed) tr.classList.add("changed");
    tr.addEventListener("click", (ev) => {
      if (ev.shiftKey) this.store.toggleTask(row.task);
      else this.store.selectOnly(row.task);
    });
    tr.addEventListener("dblclick", () => this.onOptimize(row.task, row.name));

    tr.insertCell().textContent = String(row.task);
    tr.insertCell().textContent = row.name;
    const metrics = row.optimized ?? row.metrics ?? row.base;
    for (const col of this.columns()) {
      const cell = tr.insertCell();
      const value = metrics?.[col.id as keyof TaskMetrics];
      if (typeof value !== "number") {
        cell.textContent = "-";
        continue;
      }
      cell.textContent = fmtMetric(col.id, value);
      const delta = row.delta?.[col.id as keyof TaskMetrics];
      if (delta !== undefined) {
        const span = document.createElement("span");
        span.className = "delta";
        span.textContent = ` ${fmtPct(delta)}`;
        span.style.color = deltaColor(delta);
        cell.appendChild(span);
      }
    }
    return tr;
  }
}
