import { bin, extent } from "d3-array";
import { scaleLinear } from "d3-scale";

import { SELECTED_STROKE } from "./colors.js";
import { rowMetrics } from "./filters.js";
import type { Store } from "./state.js";
import type { MetricId, MetricsRow, TimelinePayload, TimelineRow } from "./types.js";

export interface HistBin {
  x0: number;
  x1: number;
  tasks: number[];
}

/** Bin one metric over the given rows; values come straight off the payload. */
export function histogram(
  rows: readonly MetricsRow[],
  metric: MetricId,
  binCount = 16,
): HistBin[] {
  const pairs: [number, number][] = [];
  for (const row of rows) {
    const v = rowMetrics(row)?.[metric];
    if (typeof v === "number") pairs.push([v, row.task]);
  }
  const [lo, hi] = extent(pairs, (d) => d[0]);
  if (lo === undefined || hi === undefined) return [];
  const binner = bin<[number, number], number>()
    .value((d) => d[0])
    .domain([lo, hi])
    .thresholds(binCount);
  return binner(pairs).map((b) => ({
    x0: b.x0 ?? lo,
    x1: b.x1 ?? hi,
    tasks: b.map((d) => d[1]),
  }));
}

export interface Bar {
  task: number;
  engine: number;
  x: number;
  width: number;
  y: number;
  height: number;
}

export const LANE_HEIGHT = 22;
export const LANE_GAP = 6;

/** Schedule rows to bar geometry, verbatim: x/width are linear in the
 * payload's start/finish, one lane per engine. */
export function timelineBars(payload: TimelinePayload, width: number): Bar[] {
  const k = payload.makespan > 0 ? width / payload.makespan : 0;
  return payload.rows.map((r: TimelineRow) => ({
    task: r.task,
    engine: r.engine,
    x: r.start * k,
    width: Math.max(0.5, (r.finish - r.start) * k),
    y: r.engine * (LANE_HEIGHT + LANE_GAP),
    height: LANE_HEIGHT,
  }));
}

const CHART_METRICS: MetricId[] = [
  "total_time",
  "compute_time",
  "memory_time",
  "bytes_moved",
  "energy",
  "memory_power",
];

/** Histogram grid + scatter + timeline. All three render from the shared
 * store; brushes write range predicates back into it. */
export class ChartsView {
  private rows: readonly MetricsRow[] = [];
  private timeline: TimelinePayload | null = null;
  private xMetric: MetricId = "total_time";
  private yMetric: MetricId = "memory_power";

  constructor(
    private readonly host: HTMLElement,
    private readonly store: Store,
  ) {
    store.subscribe(() => this.render());
  }

  setData(rows: readonly MetricsRow[], timeline: TimelinePayload): void {
    this.rows = rows;
    this.timeline = timeline;
    this.render();
  }

  private render(): void {
    if (!this.rows.length) return;
    this.host.innerHTML = "";
    const grid = document.createElement("div");
    grid.className = "hist-grid";
    for (const metric of CHART_METRICS) {
      grid.appendChild(this.renderHistogram(metric));
    }
    this.host.appendChild(grid);
    this.host.appendChild(this.renderScatter());
    if (this.timeline) this.host.appendChild(this.renderTimeline(this.timeline));
  }

  private renderHistogram(metric: MetricId): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "hist";
    const title = document.createElement("div");
    title.className = "chart-title";
    title.textContent = metric;
    wrap.appendChild(title);

    const bins = histogram(this.rows, metric);
    const width = 180;
    const height = 60;
    const maxCount = Math.max(1, ...bins.map((b) => b.tasks.length));
    const bw = bins.length ? width / bins.length : width;
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("width", String(width));
    svg.setAttribute("height", String(height));
    const selected = this.store.get().selected;
    bins.forEach((b, i) => {
      const rect = document.createElementNS("http://www.w3.org/2000/svg", "rect");
      const h = (b.tasks.length / maxCount) * (height - 4);
      rect.setAttribute("x", String(i * bw + 1));
      rect.setAttribute("y", String(height - h));
      rect.setAttribute("width", String(Math.max(1, bw - 2)));
      rect.setAttribute("height", String(h));
      const hot = b.tasks.some((t) => selected.has(t));
      rect.setAttribute("fill", hot ? SELECTED_STROKE : "#539bf5");
      svg.appendChild(rect);
    });

    // drag a range to filter; click without dragging clears the column
    let anchor: number | null = null;
    svg.addEventListener("mousedown", (ev) => (anchor = ev.offsetX));
    svg.addEventListener("mouseup", (ev) => {
      if (anchor === null || !bins.length) return;
      const [lo, hi] = anchor <= ev.offsetX ? [anchor, ev.offsetX] : [ev.offsetX, anchor];
      if (hi - lo < 3) {
        this.store.clearColumn(metric);
      } else {
        const domainLo = bins[0]!.x0;
        const domainHi = bins[bins.length - 1]!.x1;
        const px = scaleLinear().domain([0, width]).range([domainLo, domainHi]);
        this.store.setColumnRange(metric, px(lo), px(hi));
      }
      anchor = null;
    });
    wrap.appendChild(svg);
    return wrap;
  }

  private renderScatter(): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "scatter";
    const controls = document.createElement("div");
    controls.appendChild(this.axisSelect("x", this.xMetric, (m) => (this.xMetric = m)));
    controls.appendChild(this.axisSelect("y", this.yMetric, (m) => (this.yMetric = m)));
    wrap.appendChild(controls);

    const width = 360;
    const height = 240;
    const pad = 8;
    const xs: number[] = [];
    const ys: number[] = [];
    const ids: number[] = [];
    for (const row of this.rows) {
      const m = rowMetrics(row);
      const x = m?.[this.xMetric];
      const y = m?.[this.yMetric];
      if (typeof x === "number" && typeof y === "number") {
        xs.push(x);
        ys.push(y);
        ids.push(row.task);
      }
    }
    const x = scaleLinear()
      .domain([Math.min(0, ...xs), Math.max(1e-12, ...xs)])
      .range([pad, width - pad]);
    const y = scaleLinear()
      .domain([Math.min(0, ...ys), Math.max(1e-12, ...ys)])
      .range([height - pad, pad]);

    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("width", String(width));
    svg.setAttribute("height", String(height));
    const selected = this.store.get().selected;
    ids.forEach((task, i) => {
      const c = document.createElementNS("http://www.w3.org/2000/svg", "circle");
      c.setAttribute("cx", String(x(xs[i]!)));
      c.setAttribute("cy", String(y(ys[i]!)));
      c.setAttribute("r", selected.has(task) ? "5" : "3");
      c.setAttribute("fill", selected.has(task) ? SELECTED_STROKE : "#539bf5");
      c.addEventListener("click", () => this.store.selectOnly(task));
      svg.appendChild(c);
    });
    wrap.appendChild(svg);
    return wrap;
  }

  private axisSelect(
    label: string,
    current: MetricId,
    set: (m: MetricId) => void,
  ): HTMLElement {
    const wrap = document.createElement("label");
    wrap.textContent = `${label}: `;
    const sel = document.createElement("select");
    for (const m of CHART_METRICS) {
      const opt = document.createElement("option");
      opt.value = m;
      opt.textContent = m;
      if (m === current) opt.selected = true;
      sel.appendChild(opt);
    }
    sel.addEventListener("change", () => {
      set(sel.value as MetricId);
      this.render();
    });
    wrap.appendChild(sel);
    return wrap;
  }

  private renderTimeline(payload: TimelinePayload): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "timeline";
    const title = document.createElement("div");
    title.className = "chart-title";
    title.textContent = `schedule (${payload.engines} engine${payload.engines === 1 ? "" : "s"})`;
    wrap.appendChild(title);

    const width = 760;
    const bars = timelineBars(payload, width);
    const height = payload.engines * (LANE_HEIGHT + LANE_GAP);
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("width", String(width));
    svg.setAttribute("height", String(height));
    const selected = this.store.get().selected;
    for (const bar of bars) {
      const rect = document.createElementNS("http://www.w3.org/2000/svg", "rect");
      rect.setAttribute("x", String(bar.x));
      rect.setAttribute("y", String(bar.y));
      rect.setAttribute("width", String(bar.width));
      rect.setAttribute("height", String(bar.height));
      rect.setAttribute("fill", selected.has(bar.task) ? SELECTED_STROKE : "#539bf5");
      rect.setAttribute("stroke", "#fff");
      rect.addEventListener("click", () => this.store.selectOnly(bar.task));
      svg.appendChild(rect);
    }
    wrap.appendChild(svg);
    return wrap;
  }
}
