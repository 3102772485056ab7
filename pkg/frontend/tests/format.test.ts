import { describe, expect, it } from "vitest";

import { fmtBytes, fmtCount, fmtMetric, fmtMs, fmtMw, fmtPct } from "../src/format.js";
import type { SimulationPayload } from "../src/types.js";
import simulationDoc from "./fixtures/simulation.json";

const simulation = simulationDoc as unknown as SimulationPayload;

describe("display formatting is rounding only", () => {
  it("header strings are the payload numbers at fixed precision", () => {
    const s = simulation.summary;
    expect(fmtMs(s.optimized.total_latency)).toBe(
      `${s.optimized.total_latency.toFixed(2)} ms`,
    );
    expect(fmtMw(s.optimized.memory_power)).toBe(
      `${s.optimized.memory_power.toFixed(2)} mW`,
    );
    expect(fmtPct(s.delta_latency_pct)).toBe(`+${s.delta_latency_pct.toFixed(2)}%`);
  });

  it("negative deltas keep their sign, zero and null render neutrally", () => {
    expect(fmtPct(-3.456)).toBe("-3.46%");
    expect(fmtPct(0)).toBe("0.00%");
    expect(fmtPct(null)).toBe("-");
    expect(fmtPct(undefined)).toBe("-");
  });

  it("byte and count units scale without changing the quantity", () => {
    expect(fmtBytes(512)).toBe("512 B");
    expect(fmtBytes(2048)).toBe("2.00 KiB");
    expect(fmtBytes(3 * 1024 * 1024)).toBe("3.00 MiB");
    expect(fmtCount(950)).toBe("950");
    expect(fmtCount(56623104)).toBe("56.62M");
    expect(fmtCount(2.5e9)).toBe("2.50G");
  });

  it("fmtMetric picks the unit from the column id", () => {
    const m = simulation.tasks[0]!.base;
    expect(fmtMetric("total_time", m.total_time)).toBe(m.total_time.toFixed(4));
    expect(fmtMetric("memory_power", m.memory_power)).toBe(m.memory_power.toFixed(2));
    expect(fmtMetric("bytes_moved", m.bytes_moved)).toBe(fmtBytes(m.bytes_moved));
    expect(fmtMetric("macs_effective", m.macs_effective)).toBe(fmtCount(m.macs_effective));
  });
});
