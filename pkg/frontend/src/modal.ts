import { deltaColor } from "./colors.js";
import { fmtMetric, fmtPct } from "./format.js";
import type { Store } from "./state.js";
import type { OptionRow, OptionsPayload } from "./types.js";

/** Client-side facets over the option table. Empty string = any. */
export interface OptionFilter {
  input: string;
  output: string;
  kernel: string;
  sparsity: number | null;
}

export const ANY_OPTION: OptionFilter = { input: "", output: "", kernel: "", sparsity: null };

export function filterOptions(options: readonly OptionRow[], f: OptionFilter): OptionRow[] {
  return options.filter(
    (o) =>
      (!f.input || o.config.input === f.input) &&
      (!f.output || o.config.output === f.output) &&
      (!f.kernel || o.config.kernel === f.kernel) &&
      (f.sparsity === null || o.config.sparsity === f.sparsity),
  );
}

/** Distinct values per facet, for populating the dropdowns. */
export function facetValues(options: readonly OptionRow[]): {
  input: string[];
  output: string[];
  kernel: string[];
  sparsity: number[];
} {
  const uniq = <T>(xs: T[]) => [...new Set(xs)];
  return {
    input: uniq(options.map((o) => o.config.input)).sort(),
    output: uniq(options.map((o) => o.config.output)).sort(),
    kernel: uniq(options.map((o) => o.config.kernel)).sort(),
    sparsity: uniq(options.map((o) => o.config.sparsity)).sort((a, b) => a - b),
  };
}

/** The per-task optimization modal: option table, facet filters, apply. */
export class OptionModal {
  private filter: OptionFilter = { ...ANY_OPTION };
  private payload: OptionsPayload | null = null;
  private root: HTMLElement;

  constructor(
    private readonly host: HTMLElement,
    private readonly store: Store,
    private readonly onApply: (taskId: number, option: OptionRow) => void,
  ) {
    this.root = document.createElement("div");
    this.root.className = "modal-backdrop hidden";
    this.root.addEventListener("click", (ev) => {
      if (ev.target === this.root) this.close();
    });
    host.appendChild(this.root);
  }

  open(payload: OptionsPayload, taskName: string): void {
    this.payload = payload;
    this.filter = { ...ANY_OPTION };
    this.root.classList.remove("hidden");
    this.render(taskName);
  }

  close(): void {
    this.root.classList.add("hidden");
    this.payload = null;
  }

  private render(taskName: string): void {
    if (!this.payload) return;
    const rows = filterOptions(this.payload.options, this.filter);
    const facets = facetValues(this.payload.options);
    this.root.innerHTML = "";

    const panel = document.createElement("div");
    panel.className = "modal";
    const title = document.createElement("h2");
    title.textContent = `Optimize ${taskName} (${rows.length} of ${this.payload.count} options)`;
    panel.appendChild(title);

    const bar = document.createElement("div");
    bar.className = "modal-filters";
    bar.appendChild(this.facetSelect("input", facets.input));
    bar.appendChild(this.facetSelect("output", facets.output));
    bar.appendChild(this.facetSelect("kernel", facets.kernel));
    panel.appendChild(bar);

    const table = document.createElement("table");
    table.className = "option-table";
    const head = table.insertRow();
    for (const label of ["in", "out", "kernel", "sparsity", "latency", "Δ latency", "Δ power", ""]) {
      const th = document.createElement("th");
      th.textContent = label;
      head.appendChild(th);
    }
    for (const option of rows) {
      const tr = table.insertRow();
      tr.insertCell().textContent = option.config.input;
      tr.insertCell().textContent = option.config.output;
      tr.insertCell().textContent = option.config.kernel;
      tr.insertCell().textContent = String(option.config.sparsity);
      tr.insertCell().textContent = fmtMetric("total_time", option.metrics.total_time);
      const dl = tr.insertCell();
      dl.textContent = fmtPct(option.delta_latency_pct);
      dl.style.color = deltaColor(option.delta_latency_pct);
      const dp = tr.insertCell();
      dp.textContent = fmtPct(option.delta_power_pct);
      dp.style.color = deltaColor(option.delta_power_pct);
      const cell = tr.insertCell();
      const btn = document.createElement("button");
      btn.textContent = "Apply";
      btn.addEventListener("click", () => {
        if (this.payload) this.onApply(this.payload.task, option);
        this.close();
      });
      cell.appendChild(btn);
    }
    panel.appendChild(table);
    this.root.appendChild(panel);

    const rerender = () => this.render(taskName);
    this.root.querySelectorAll("select").forEach((sel) => {
      sel.addEventListener("change", () => {
        const key = sel.dataset.facet as "input" | "output" | "kernel";
        this.filter = { ...this.filter, [key]: sel.value };
        rerender();
      });
    });
  }

  private facetSelect(facet: string, values: string[]): HTMLElement {
    const wrap = document.createElement("label");
    wrap.textContent = `${facet} `;
    const sel = document.createElement("select");
    sel.dataset.facet = facet;
    const any = document.createElement("option");
    any.value = "";
    any.textContent = "any";
    sel.appendChild(any);
    for (const v of values) {
      const opt = document.createElement("option");
      opt.value = v;
      opt.textContent = v;
      if ((this.filter as unknown as Record<string, string>)[facet] === v) opt.selected = true;
      sel.appendChild(opt);
    }
    wrap.appendChild(sel);
    return wrap;
  }
}
