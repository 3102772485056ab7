/** Virtualization window math for the table: render only the rows that
 * intersect the viewport, plus a small overscan so fast scrolls never
 * show blank strips. Pure so it can be property-tested. */

export interface Window {
  start: number; // first rendered row index
  end: number; // one past the last rendered row
  padTop: number; // px spacer above
  padBottom: number; // px spacer below
}

export function computeWindow(
  total: number,
  rowHeight: number,
  scrollTop: number,
  viewportHeight: number,
  overscan = 8,
): Window {
  if (total <= 0) return { start: 0, end: 0, padTop: 0, padBottom: 0 };
  const first = Math.floor(scrollTop / rowHeight);
  const visible = Math.ceil(viewportHeight / rowHeight) + 1;
  const start = Math.max(0, first - overscan);
  const end = Math.min(total, first + visible + overscan);
  return {
    start,
    end,
    padTop: start * rowHeight,
    padBottom: (total - end) * rowHeight,
  };
}
