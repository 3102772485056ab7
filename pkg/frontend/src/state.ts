import type { MetricId, OptimizationSelection, SelectionEntry } from "./types.js";

/** One numeric column filter, e.g. total_time > 1. */
export interface Predicate {
  column: string;
  op: ">" | ">=" | "<" | "<=" | "==" | "!=";
  value: number;
}

export type ViewTab = "table" | "graph" | "charts" | "code" | "diff";

/** The single source of truth every view renders from.
 *
 * Views never keep their own copy of the selection or filters; they
 * subscribe here and re-derive on each change, which is what keeps the
 * table, graph, and charts from ever disagreeing.
 */
export interface SelectionState {
  selected: ReadonlySet<number>;
  search: string;
  predicates: readonly Predicate[];
  optimization: OptimizationSelection;
  colorBy: MetricId;
  collapsed: ReadonlySet<string>;
  tab: ViewTab;
}

export const initialState: SelectionState = {
  selected: new Set(),
  search: "",
  predicates: [],
  optimization: {},
  colorBy: "total_time",
  collapsed: new Set(),
  tab: "table",
};

type Listener = (state: SelectionState) => void;

export class Store {
  private state: SelectionState;
  private listeners = new Set<Listener>();

  constructor(state: SelectionState = initialState) {
    this.state = state;
  }

  get(): SelectionState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    fn(this.state);
    return () => this.listeners.delete(fn);
  }

  private commit(next: SelectionState): void {
    this.state = next;
    for (const fn of this.listeners) fn(next);
  }

  selectOnly(taskId: number): void {
    this.commit({ ...this.state, selected: new Set([taskId]) });
  }

  toggleTask(taskId: number): void {
    const selected = new Set(this.state.selected);
    if (!selected.delete(taskId)) selected.add(taskId);
    this.commit({ ...this.state, selected });
  }

  setSelected(ids: Iterable<number>): void {
    this.commit({ ...this.state, selected: new Set(ids) });
  }

  clearSelected(): void {
    if (this.state.selected.size) this.commit({ ...this.state, selected: new Set() });
  }

  setSearch(search: string): void {
    this.commit({ ...this.state, search });
  }

  addPredicate(p: Predicate): void {
    this.commit({ ...this.state, predicates: [...this.state.predicates, p] });
  }

  /** Replace the predicate on `column` (brushes re-issue continuously). */
  setColumnRange(column: string, low: number, high: number): void {
    const kept = this.state.predicates.filter((p) => p.column !== column);
    kept.push({ column, op: ">=", value: low });
    kept.push({ column, op: "<=", value: high });
    this.commit({ ...this.state, predicates: kept });
  }

  clearColumn(column: string): void {
    this.commit({
      ...this.state,
      predicates: this.state.predicates.filter((p) => p.column !== column),
    });
  }

  clearFilters(): void {
    this.commit({ ...this.state, search: "", predicates: [] });
  }

  setColorBy(colorBy: MetricId): void {
    this.commit({ ...this.state, colorBy });
  }

  setTab(tab: ViewTab): void {
    this.commit({ ...this.state, tab });
  }

  collapseGroup(path: string): void {
    const collapsed = new Set(this.state.collapsed);
    collapsed.add(path);
    this.commit({ ...this.state, collapsed });
  }

  expandGroup(path: string): void {
    const collapsed = new Set(this.state.collapsed);
    collapsed.delete(path);
    this.commit({ ...this.state, collapsed });
  }

  setOptimization(optimization: OptimizationSelection): void {
    this.commit({ ...this.state, optimization });
  }

  setPreset(preset: string | null): void {
    const optimization = { ...this.state.optimization };
    if (preset === null) delete optimization.preset;
    else optimization.preset = preset;
    this.commit({ ...this.state, optimization });
  }

  /** Add or replace the targeted entry for one task. */
  targetTask(entry: SelectionEntry): void {
    const targeted = (this.state.optimization.targeted ?? []).filter(
      (e) => e.task !== entry.task,
    );
    targeted.push(entry);
    this.commit({
      ...this.state,
      optimization: { ...this.state.optimization, targeted },
    });
  }

  untargetTask(taskId: number): void {
    const targeted = (this.state.optimization.targeted ?? []).filter(
      (e) => e.task !== taskId,
    );
    this.commit({
      ...this.state,
      optimization: { ...this.state.optimization, targeted },
    });
  }

  revertOptimization(): void {
    this.commit({ ...this.state, optimization: {} });
  }
}
