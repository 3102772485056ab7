import { select } from "d3-selection";
import { zoom, zoomIdentity, type ZoomTransform } from "d3-zoom";

import { blueRamp, SELECTED_STROKE } from "./colors.js";
import type { Store } from "./state.js";
import type { LayoutNode, LayoutPayload, MetricsRow, TaskMetrics } from "./types.js";

export const CELL_W = 120;
export const CELL_H = 70;
export const NODE_W = 96;
export const NODE_H = 34;

export interface PlacedNode {
  key: number | string;
  taskId: number | null; // null for collapsed supernodes
  label: string;
  x: number; // top-left px in world space
  y: number;
  fill: string;
}

/** Grid coordinates to world pixels; the server already chose layer/order. */
export function placeNodes(
  layout: LayoutPayload,
  labels: Map<number, string>,
  fillFor: (node: LayoutNode) => string,
): PlacedNode[] {
  return layout.nodes.map((n) => ({
    key: n.task ?? n.group!,
    taskId: n.task ?? null,
    label: n.task !== undefined ? labels.get(n.task) ?? `#${n.task}` : n.group!,
    x: n.x * CELL_W,
    y: n.y * CELL_H,
    fill: fillFor(n),
  }));
}

/** min/max of the color-by metric over the visible tasks only, so the
 * scale endpoints track filtering (darkest = most expensive on screen). */
export function colorDomain(
  rows: readonly MetricsRow[],
  visible: ReadonlySet<number>,
  metric: keyof TaskMetrics,
): [number, number] {
  let min = Infinity;
  let max = -Infinity;
  for (const row of rows) {
    if (!visible.has(row.task)) continue;
    const m = row.optimized ?? row.metrics ?? row.base;
    const v = m?.[metric];
    if (typeof v !== "number") continue;
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min === Infinity) return [0, 0];
  return [min, max];
}

/** Tasks whose node rectangle intersects the lasso rectangle (world px). */
export function lassoHits(
  nodes: readonly PlacedNode[],
  x0: number,
  y0: number,
  x1: number,
  y1: number,
): number[] {
  const [lx, hx] = x0 < x1 ? [x0, x1] : [x1, x0];
  const [ly, hy] = y0 < y1 ? [y0, y1] : [y1, y0];
  const hits: number[] = [];
  for (const n of nodes) {
    if (n.taskId === null) continue;
    if (n.x + NODE_W < lx || n.x > hx || n.y + NODE_H < ly || n.y > hy) continue;
    hits.push(n.taskId);
  }
  return hits;
}

/** Canvas graph view: zoom/pan, hover, click/lasso selection, SVG minimap,
 * collapse via the store's group paths (layout is re-fetched upstream). */
export class GraphView {
  private canvas: HTMLCanvasElement;
  private minimap: SVGSVGElement;
  private transform: ZoomTransform = zoomIdentity;
  private placed: PlacedNode[] = [];
  private edges: { x0: number; y0: number; x1: number; y1: number }[] = [];
  private lasso: { x0: number; y0: number; x1: number; y1: number } | null = null;
  private worldW = 1;
  private worldH = 1;

  constructor(
    private readonly host: HTMLElement,
    private readonly store: Store,
  ) {
    this.canvas = document.createElement("canvas");
    this.canvas.className = "graph-canvas";
    this.canvas.width = host.clientWidth || 900;
    this.canvas.height = host.clientHeight || 600;
    host.appendChild(this.canvas);

    this.minimap = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    this.minimap.setAttribute("class", "minimap");
    this.minimap.setAttribute("width", "160");
    this.minimap.setAttribute("height", "110");
    host.appendChild(this.minimap);

    const behavior = zoom<HTMLCanvasElement, unknown>()
      .scaleExtent([0.05, 8])
      .filter((ev: { shiftKey?: boolean; type?: string }) => !ev.shiftKey)
      .on("zoom", (ev: { transform: ZoomTransform }) => {
        this.transform = ev.transform;
        this.draw();
      });
    select(this.canvas).call(behavior);

    this.canvas.addEventListener("mousedown", (ev) => {
      if (!ev.shiftKey) return;
      const [wx, wy] = this.toWorld(ev.offsetX, ev.offsetY);
      this.lasso = { x0: wx, y0: wy, x1: wx, y1: wy };
    });
    this.canvas.addEventListener("mousemove", (ev) => {
      if (!this.lasso) return;
      const [wx, wy] = this.toWorld(ev.offsetX, ev.offsetY);
      this.lasso.x1 = wx;
      this.lasso.y1 = wy;
      this.draw();
    });
    window.addEventListener("mouseup", () => {
      if (!this.lasso) return;
      const { x0, y0, x1, y1 } = this.lasso;
      this.lasso = null;
      const hits = lassoHits(this.placed, x0, y0, x1, y1);
      if (hits.length) this.store.setSelected(hits);
      this.draw();
    });
    this.canvas.addEventListener("click", (ev) => {
      if (ev.shiftKey) return;
      const hit = this.hitTest(ev.offsetX, ev.offsetY);
      if (hit === null) this.store.clearSelected();
      else if (hit.taskId !== null) this.store.selectOnly(hit.taskId);
      else this.store.expandGroup(String(hit.key));
    });
    this.canvas.addEventListener("dblclick", (ev) => {
      const hit = this.hitTest(ev.offsetX, ev.offsetY);
      if (hit && hit.taskId === null) this.store.expandGroup(String(hit.key));
    });

    store.subscribe(() => this.draw());
  }

  setData(
    layout: LayoutPayload,
    rows: readonly MetricsRow[],
    visible: ReadonlySet<number>,
  ): void {
    const state = this.store.get();
    const [min, max] = colorDomain(rows, visible, state.colorBy);
    const metricOf = new Map<number, number>();
    for (const row of rows) {
      const m = row.optimized ?? row.metrics ?? row.base;
      const v = m?.[state.colorBy];
      if (typeof v === "number") metricOf.set(row.task, v);
    }
    const labels = new Map(rows.map((r) => [r.task, r.name]));
    this.placed = placeNodes(layout, labels, (node) => {
      if (node.task === undefined) return "#d8dee4"; // supernode
      const v = metricOf.get(node.task);
      if (v === undefined || max === min) return blueRamp(0.5);
      return blueRamp((v - min) / (max - min));
    });
    const at = new Map(this.placed.map((p) => [p.key, p]));
    this.edges = [];
    for (const e of layout.edges) {
      const a = at.get(e.from);
      const b = at.get(e.to);
      if (!a || !b) continue;
      this.edges.push({
        x0: a.x + NODE_W / 2,
        y0: a.y + NODE_H,
        x1: b.x + NODE_W / 2,
        y1: b.y,
      });
    }
    this.worldW = Math.max(1, ...this.placed.map((p) => p.x + NODE_W));
    this.worldH = Math.max(1, ...this.placed.map((p) => p.y + NODE_H));
    this.draw();
  }

  private toWorld(px: number, py: number): [number, number] {
    return [
      (px - this.transform.x) / this.transform.k,
      (py - this.transform.y) / this.transform.k,
    ];
  }

  private hitTest(px: number, py: number): PlacedNode | null {
    const [wx, wy] = this.toWorld(px, py);
    for (const n of this.placed) {
      if (wx >= n.x && wx <= n.x + NODE_W && wy >= n.y && wy <= n.y + NODE_H) return n;
    }
    return null;
  }

  private draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const state = this.store.get();
    ctx.save();
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.translate(this.transform.x, this.transform.y);
    ctx.scale(this.transform.k, this.transform.k);

    ctx.strokeStyle = "#8c959f";
    ctx.lineWidth = 1 / this.transform.k;
    for (const e of this.edges) {
      ctx.beginPath();
      ctx.moveTo(e.x0, e.y0);
      ctx.lineTo(e.x1, e.y1);
      ctx.stroke();
    }

    for (const n of this.placed) {
      ctx.fillStyle = n.fill;
      ctx.fillRect(n.x, n.y, NODE_W, NODE_H);
      const isSelected = n.taskId !== null && state.selected.has(n.taskId);
      ctx.strokeStyle = isSelected ? SELECTED_STROKE : "#57606a";
      ctx.lineWidth = (isSelected ? 3 : 1) / this.transform.k;
      ctx.strokeRect(n.x, n.y, NODE_W, NODE_H);
      ctx.fillStyle = "#1f2328";
      ctx.font = `${11 / this.transform.k}px sans-serif`;
      ctx.fillText(n.label.slice(0, 16), n.x + 4, n.y + NODE_H / 2 + 4, NODE_W - 8);
    }

    if (this.lasso) {
      ctx.strokeStyle = SELECTED_STROKE;
      ctx.setLineDash([4 / this.transform.k]);
      ctx.strokeRect(
        Math.min(this.lasso.x0, this.lasso.x1),
        Math.min(this.lasso.y0, this.lasso.y1),
        Math.abs(this.lasso.x1 - this.lasso.x0),
        Math.abs(this.lasso.y1 - this.lasso.y0),
      );
      ctx.setLineDash([]);
    }
    ctx.restore();
    this.drawMinimap();
  }

  private drawMinimap(): void {
    const w = 160;
    const h = 110;
    const sx = w / this.worldW;
    const sy = h / this.worldH;
    const s = Math.min(sx, sy);
    const frag: string[] = [`<rect width="${w}" height="${h}" fill="#f6f8fa"/>`];
    for (const n of this.placed) {
      frag.push(
        `<rect x="${(n.x * s).toFixed(1)}" y="${(n.y * s).toFixed(1)}" ` +
          `width="${Math.max(1, NODE_W * s).toFixed(1)}" height="${Math.max(1, NODE_H * s).toFixed(1)}" ` +
          `fill="${n.fill}"/>`,
      );
    }
    // viewport rectangle: the visible world region, draggable to pan
    const vx = -this.transform.x / this.transform.k;
    const vy = -this.transform.y / this.transform.k;
    const vw = this.canvas.width / this.transform.k;
    const vh = this.canvas.height / this.transform.k;
    frag.push(
      `<rect class="viewport" x="${(vx * s).toFixed(1)}" y="${(vy * s).toFixed(1)}" ` +
        `width="${(vw * s).toFixed(1)}" height="${(vh * s).toFixed(1)}" ` +
        `fill="none" stroke="${SELECTED_STROKE}"/>`,
    );
    this.minimap.innerHTML = frag.join("");
    this.minimap.onmousedown = (ev: MouseEvent) => {
      const move = (mv: MouseEvent) => {
        const rect = this.minimap.getBoundingClientRect();
        const wx = (mv.clientX - rect.left) / s;
        const wy = (mv.clientY - rect.top) / s;
        this.transform = zoomIdentity
          .scale(this.transform.k)
          .translate(-wx + vw / 2, -wy + vh / 2);
        this.draw();
      };
      move(ev);
      const up = () => {
        window.removeEventListener("mousemove", move);
        window.removeEventListener("mouseup", up);
      };
      window.addEventListener("mousemove", move);
      window.addEventListener("mouseup", up);
    };
  }
}
