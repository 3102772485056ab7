import { scaleSequential } from "d3-scale";

/** Sequential blues for metric encoding: darker = more expensive. */
export function metricColor(min: number, max: number): (value: number) => string {
  if (min === max) return () => blueRamp(0.5);
  const scale = scaleSequential(blueRamp).domain([min, max]);
  return (value) => scale(value);
}

/** Light-to-dark blue ramp on [0, 1]. */
export function blueRamp(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  // endpoints chosen so rank order is visible on white
  const r = Math.round(239 + (8 - 239) * clamped);
  const g = Math.round(243 + (48 - 243) * clamped);
  const b = Math.round(255 + (107 - 255) * clamped);
  return `rgb(${r},${g},${b})`;
}

export const DELTA_IMPROVED = "#1a7f37"; // green
export const DELTA_REGRESSED = "#cf222e"; // red
export const DELTA_NEUTRAL = "#57606a";

/** Diverging green/red is reserved for delta cells. Positive = improved. */
export function deltaColor(delta: number | null | undefined): string {
  if (delta === null || delta === undefined || delta === 0) return DELTA_NEUTRAL;
  return delta > 0 ? DELTA_IMPROVED : DELTA_REGRESSED;
}

export const DIFF_ADDED = "#2da44e";
export const DIFF_REMOVED = "#cf222e";
export const SELECTED_STROKE = "#bf3989";
