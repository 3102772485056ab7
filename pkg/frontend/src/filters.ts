import type { Predicate, SelectionState } from "./state.js";
import type { MetricsRow, TaskMetrics } from "./types.js";

const PREDICATE_RE = /^\s*([a-z_]+)\s*(>=|<=|==|!=|>|<)\s*(-?\d+(?:\.\d+)?(?:e-?\d+)?)\s*$/i;

/** Parse "total_time > 1" into a Predicate; null when malformed. */
export function parsePredicate(text: string): Predicate | null {
  const m = PREDICATE_RE.exec(text);
  if (!m) return null;
  return {
    column: m[1]!.toLowerCase(),
    op: m[2] as Predicate["op"],
    value: Number(m[3]),
  };
}

export function evalPredicate(p: Predicate, value: number): boolean {
  switch (p.op) {
    case ">":
      return value > p.value;
    case ">=":
      return value >= p.value;
    case "<":
      return value < p.value;
    case "<=":
      return value <= p.value;
    case "==":
      return value === p.value;
    case "!=":
      return value !== p.value;
  }
}

/** The metrics a filter reads: optimized values when present, else base. */
export function rowMetrics(row: MetricsRow): TaskMetrics | undefined {
  return row.optimized ?? row.metrics ?? row.base;
}

export function matchesSearch(row: MetricsRow, search: string): boolean {
  if (!search) return true;
  const needle = search.toLowerCase();
  return (
    row.name.toLowerCase().includes(needle) ||
    String(row.task) === search.trim() ||
    row.kind.toLowerCase().includes(needle)
  );
}

export function matchesPredicates(row: MetricsRow, predicates: readonly Predicate[]): boolean {
  if (!predicates.length) return true;
  const metrics = rowMetrics(row);
  if (!metrics) return false;
  for (const p of predicates) {
    const value = metrics[p.column as keyof TaskMetrics];
    if (typeof value !== "number" || !evalPredicate(p, value)) return false;
  }
  return true;
}

/** Rows surviving the shared search + predicate filters, in table order. */
export function visibleRows(
  rows: readonly MetricsRow[],
  state: Pick<SelectionState, "search" | "predicates">,
): MetricsRow[] {
  return rows.filter(
    (row) => matchesSearch(row, state.search) && matchesPredicates(row, state.predicates),
  );
}

export type SortDir = "asc" | "desc";

export function sortRows(
  rows: MetricsRow[],
  column: string,
  dir: SortDir,
): MetricsRow[] {
  const sign = dir === "asc" ? 1 : -1;
  const sorted = [...rows];
  sorted.sort((a, b) => {
    if (column === "name") return sign * a.name.localeCompare(b.name);
    if (column === "kind") return sign * a.kind.localeCompare(b.kind);
    if (column === "task") return sign * (a.task - b.task);
    const am = rowMetrics(a)?.[column as keyof TaskMetrics] ?? 0;
    const bm = rowMetrics(b)?.[column as keyof TaskMetrics] ?? 0;
    if (am === bm) return a.task - b.task; // stable under ties
    return sign * (am < bm ? -1 : 1);
  });
  return sorted;
}
