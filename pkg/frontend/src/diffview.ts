import { DIFF_ADDED, DIFF_REMOVED } from "./colors.js";
import { fmtMs, fmtMw, fmtPct } from "./format.js";
import type { DiffPayload, MetricsRow } from "./types.js";

/** Structural diff between two stored models: summary strip, matched-task
 * table with per-metric deltas, and added/removed chips (green/red). */
export class DiffView {
  constructor(private readonly host: HTMLElement) {}

  render(
    diff: DiffPayload,
    baseRows: readonly MetricsRow[],
    targetRows: readonly MetricsRow[],
  ): void {
    this.host.innerHTML = "";
    const baseName = new Map(baseRows.map((r) => [r.task, r.name]));
    const targetName = new Map(targetRows.map((r) => [r.task, r.name]));

    const strip = document.createElement("div");
    strip.className = "diff-summary";
    strip.textContent =
      `base ${fmtMs(diff.summary_base.total_latency)} / ${fmtMw(diff.summary_base.memory_power)}` +
      `  vs  target ${fmtMs(diff.summary_target.total_latency)} / ${fmtMw(diff.summary_target.memory_power)}` +
      `  (${diff.matched.length} matched, ${diff.added.length} added, ${diff.removed.length} removed)`;
    this.host.appendChild(strip);

    if (diff.added.length) {
      this.host.appendChild(
        this.chipRow("added", diff.added, targetName, DIFF_ADDED),
      );
    }
    if (diff.removed.length) {
      this.host.appendChild(
        this.chipRow("removed", diff.removed, baseName, DIFF_REMOVED),
      );
    }

    const table = document.createElement("table");
    table.className = "diff-table";
    const head = table.insertRow();
    for (const label of ["base", "target", "name", "Δ latency", "Δ power", "Δ bytes"]) {
      const th = document.createElement("th");
      th.textContent = label;
      head.appendChild(th);
    }
    const changed = diff.matched.filter((m) => m.changed);
    const shown = changed.length ? changed : diff.matched;
    for (const m of shown) {
      const tr = table.insertRow();
      if (m.changed) tr.classList.add("changed");
      tr.insertCell().textContent = String(m.base_task);
      tr.insertCell().textContent = String(m.target_task);
      tr.insertCell().textContent = baseName.get(m.base_task) ?? "";
      for (const key of ["latency", "memory_power", "bytes_moved"]) {
        const cell = tr.insertCell();
        cell.textContent = fmtPct(m.metric_deltas[key]);
      }
    }
    this.host.appendChild(table);
  }

  private chipRow(
    label: string,
    ids: readonly number[],
    names: Map<number, string>,
    color: string,
  ): HTMLElement {
    const row = document.createElement("div");
    row.className = "diff-chips";
    const lab = document.createElement("span");
    lab.textContent = `${label}: `;
    row.appendChild(lab);
    for (const id of ids) {
      const chip = document.createElement("span");
      chip.className = "chip";
      chip.style.background = color;
      chip.textContent = names.get(id) ?? `#${id}`;
      row.appendChild(chip);
    }
    return row;
  }
}
