/** Display rounding only. Every number shown in the UI is an API payload
 * value passed through one of these; no metric arithmetic happens here. */

export function fmtMs(value: number): string {
  return `${value.toFixed(2)} ms`;
}

export function fmtMw(value: number): string {
  return `${value.toFixed(2)} mW`;
}

export function fmtFps(value: number): string {
  return `${value.toFixed(1)} fps`;
}

/** Positive deltas are improvements and render with an explicit +. */
export function fmtPct(value: number | null | undefined): string {
  if (value === null || value === undefined) return "-";
  const sign = value > 0 ? "+" : "";
  return `${sign}${value.toFixed(2)}%`;
}

export function fmtBytes(value: number): string {
  if (value >= 1 << 30) return `${(value / (1 << 30)).toFixed(2)} GiB`;
  if (value >= 1 << 20) return `${(value / (1 << 20)).toFixed(2)} MiB`;
  if (value >= 1 << 10) return `${(value / (1 << 10)).toFixed(2)} KiB`;
  return `${value} B`;
}

export function fmtCount(value: number): string {
  if (value >= 1e9) return `${(value / 1e9).toFixed(2)}G`;
  if (value >= 1e6) return `${(value / 1e6).toFixed(2)}M`;
  if (value >= 1e3) return `${(value / 1e3).toFixed(2)}k`;
  return String(value);
}

/** Generic metric cell: milliseconds keep 4 places (sub-ms tasks matter). */
export function fmtMetric(id: string, value: number): string {
  if (id === "bytes_moved" || id === "weight_bytes") return fmtBytes(value);
  if (id === "macs_effective") return fmtCount(value);
  if (id === "memory_power") return value.toFixed(2);
  return value.toFixed(4);
}
