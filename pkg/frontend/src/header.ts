import { deltaColor } from "./colors.js";
import { fmtFps, fmtMs, fmtMw, fmtPct } from "./format.js";
import type { ModelSummary, SummaryPayload } from "./types.js";

export interface HeaderTotals {
  base: ModelSummary;
  optimized?: ModelSummary;
  delta_latency_pct?: number;
  delta_power_pct?: number;
}

/** Header strip: model name, latency/power totals with deltas, fps target
 * (only when the model declares one). */
export class HeaderView {
  constructor(private readonly host: HTMLElement) {}

  render(meta: SummaryPayload, totals: HeaderTotals): void {
    this.host.innerHTML = "";
    const name = document.createElement("span");
    name.className = "model-name";
    name.textContent = meta.name;
    this.host.appendChild(name);

    const latency = totals.optimized?.total_latency ?? totals.base.total_latency;
    const power = totals.optimized?.memory_power ?? totals.base.memory_power;
    this.host.appendChild(this.stat("latency", fmtMs(latency), totals.delta_latency_pct));
    this.host.appendChild(this.stat("memory power", fmtMw(power), totals.delta_power_pct));

    const fps = totals.optimized?.achieved_fps ?? totals.base.achieved_fps;
    if (meta.fps_target !== null) {
      const el = this.stat("fps", `${fmtFps(fps)} / target ${fmtFps(meta.fps_target)}`);
      if (fps < meta.fps_target) el.classList.add("fps-miss");
      this.host.appendChild(el);
    }
  }

  private stat(label: string, value: string, delta?: number): HTMLElement {
    const wrap = document.createElement("span");
    wrap.className = "header-stat";
    const lab = document.createElement("span");
    lab.className = "stat-label";
    lab.textContent = label;
    const val = document.createElement("span");
    val.className = "stat-value";
    val.textContent = value;
    wrap.appendChild(lab);
    wrap.appendChild(val);
    if (delta !== undefined) {
      const d = document.createElement("span");
      d.className = "stat-delta";
      d.textContent = ` saves ${fmtPct(delta)}`;
      d.style.color = deltaColor(delta);
      wrap.appendChild(d);
    }
    return wrap;
  }
}
