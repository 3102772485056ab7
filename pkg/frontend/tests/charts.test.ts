import { describe, expect, it } from "vitest";

import { histogram, LANE_GAP, LANE_HEIGHT, timelineBars } from "../src/charts.js";
import type { MetricsPayload, TimelinePayload } from "../src/types.js";
import metricsDoc from "./fixtures/metrics.json";
import timelineDoc from "./fixtures/timeline.json";

const metrics = metricsDoc as unknown as MetricsPayload;
const timeline = timelineDoc as unknown as TimelinePayload;

describe("histogram", () => {
  it("every task lands in exactly one bin", () => {
    const bins = histogram(metrics.rows, "total_time");
    const seen = bins.flatMap((b) => b.tasks).sort((a, b) => a - b);
    expect(seen).toEqual(metrics.rows.map((r) => r.task).sort((a, b) => a - b));
  });

  it("bin ranges partition the payload's value extent", () => {
    const bins = histogram(metrics.rows, "energy");
    expect(bins.length).toBeGreaterThan(1);
    const values = metrics.rows.map((r) => r.metrics!.energy);
    expect(bins[0]!.x0).toBeLessThanOrEqual(Math.min(...values));
    expect(bins[bins.length - 1]!.x1).toBeGreaterThanOrEqual(Math.max(...values));
    for (let i = 1; i < bins.length; i++) {
      expect(bins[i]!.x0).toBe(bins[i - 1]!.x1);
    }
  });

  it("brushing the top decile leaves the matching tasks", () => {
    const values = metrics.rows
      .map((r) => r.metrics!.total_time)
      .sort((a, b) => a - b);
    const cut = values[Math.floor(values.length * 0.9)]!;
    const expected = metrics.rows.filter((r) => r.metrics!.total_time >= cut);
    const bins = histogram(metrics.rows, "total_time");
    const brushed = bins
      .filter((b) => b.x1 > cut)
      .flatMap((b) => b.tasks)
      .filter((t) => {
        const row = metrics.rows.find((r) => r.task === t)!;
        return row.metrics!.total_time >= cut;
      });
    expect(new Set(brushed)).toEqual(new Set(expected.map((r) => r.task)));
  });
});

describe("timeline", () => {
  it("renders one bar per schedule row, verbatim geometry", () => {
    const width = 800;
    const bars = timelineBars(timeline, width);
    expect(bars).toHaveLength(timeline.rows.length);
    const k = width / timeline.makespan;
    timeline.rows.forEach((row, i) => {
      const bar = bars[i]!;
      expect(bar.task).toBe(row.task);
      expect(bar.x).toBeCloseTo(row.start * k, 9);
      expect(bar.x + bar.width).toBeCloseTo(row.finish * k, 6);
      expect(bar.y).toBe(row.engine * (LANE_HEIGHT + LANE_GAP));
    });
  });

  it("no bar extends past the makespan edge", () => {
    const bars = timelineBars(timeline, 640);
    for (const bar of bars) {
      expect(bar.x + bar.width).toBeLessThanOrEqual(640 + 1);
      expect(bar.x).toBeGreaterThanOrEqual(0);
    }
  });

  it("a zero-makespan schedule renders zero-width bars at the origin", () => {
    const empty: TimelinePayload = { engines: 1, makespan: 0, rows: [] };
    expect(timelineBars(empty, 500)).toEqual([]);
  });
});
