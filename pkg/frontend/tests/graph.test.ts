import { describe, expect, it } from "vitest";

import { blueRamp, deltaColor, DELTA_IMPROVED, DELTA_REGRESSED } from "../src/colors.js";
import { CELL_H, CELL_W, colorDomain, lassoHits, NODE_H, NODE_W, placeNodes } from "../src/graph.js";
import type { LayoutPayload, MetricsPayload } from "../src/types.js";
import layoutDoc from "./fixtures/layout.json";
import metricsDoc from "./fixtures/metrics.json";

const layout = layoutDoc as unknown as LayoutPayload;
const metrics = metricsDoc as unknown as MetricsPayload;

describe("node placement", () => {
  it("maps grid coordinates to world pixels", () => {
    const labels = new Map(metrics.rows.map((r) => [r.task, r.name]));
    const placed = placeNodes(layout, labels, () => "#fff");
    expect(placed).toHaveLength(layout.nodes.length);
    for (let i = 0; i < placed.length; i++) {
      expect(placed[i]!.x).toBe(layout.nodes[i]!.x * CELL_W);
      expect(placed[i]!.y).toBe(layout.nodes[i]!.y * CELL_H);
    }
    const named = placed.find((p) => p.taskId === 0);
    expect(named?.label).toBe(labels.get(0));
  });

  it("edges always point to a strictly lower node (larger y)", () => {
    const pos = new Map(layout.nodes.map((n) => [n.task ?? n.group!, n]));
    for (const e of layout.edges) {
      const a = pos.get(e.from)!;
      const b = pos.get(e.to)!;
      expect(b.layer).toBeGreaterThan(a.layer);
    }
  });
});

describe("color scale", () => {
  it("domain endpoints are the min/max over visible tasks only", () => {
    const all = new Set(metrics.rows.map((r) => r.task));
    const [min, max] = colorDomain(metrics.rows, all, "total_time");
    const values = metrics.rows.map((r) => r.metrics!.total_time);
    expect(min).toBe(Math.min(...values));
    expect(max).toBe(Math.max(...values));

    const half = new Set(metrics.rows.slice(0, 10).map((r) => r.task));
    const [hmin, hmax] = colorDomain(metrics.rows, half, "total_time");
    const hvalues = metrics.rows.slice(0, 10).map((r) => r.metrics!.total_time);
    expect(hmin).toBe(Math.min(...hvalues));
    expect(hmax).toBe(Math.max(...hvalues));
  });

  it("the most expensive task is darkest", () => {
    // darker = lower channel values in the blue ramp
    const channel = (c: string) => Number(/rgb\((\d+)/.exec(c)![1]);
    expect(channel(blueRamp(1))).toBeLessThan(channel(blueRamp(0.5)));
    expect(channel(blueRamp(0.5))).toBeLessThan(channel(blueRamp(0)));
  });

  it("deltas color green when improved, red when regressed", () => {
    expect(deltaColor(12.5)).toBe(DELTA_IMPROVED);
    expect(deltaColor(-0.1)).toBe(DELTA_REGRESSED);
    expect(deltaColor(0)).not.toBe(DELTA_IMPROVED);
    expect(deltaColor(null)).not.toBe(DELTA_REGRESSED);
  });
});

describe("lasso", () => {
  const labels = new Map(metrics.rows.map((r) => [r.task, r.name]));
  const placed = placeNodes(layout, labels, () => "#fff");

  it("a rectangle around one node selects exactly that task", () => {
    const target = placed.find((p) => p.taskId !== null)!;
    const hits = lassoHits(
      placed,
      target.x - 1,
      target.y - 1,
      target.x + NODE_W + 1,
      target.y + NODE_H + 1,
    );
    expect(hits).toContain(target.taskId);
    for (const id of hits) {
      const node = placed.find((p) => p.taskId === id)!;
      expect(node.x).toBeLessThanOrEqual(target.x + NODE_W + 1);
    }
  });

  it("corner order does not matter", () => {
    const a = lassoHits(placed, 0, 0, 10_000, 10_000);
    const b = lassoHits(placed, 10_000, 10_000, 0, 0);
    expect(a).toEqual(b);
    expect(a).toHaveLength(placed.filter((p) => p.taskId !== null).length);
  });

  it("an empty region selects nothing", () => {
    expect(lassoHits(placed, -500, -500, -400, -400)).toEqual([]);
  });
});
