/** Pure layout for the metric trade-off scatter plot.
 *
 * Returns pixel positions for an SVG viewport; rendering is elsewhere so
 * the mapping stays unit-testable without a DOM.
 */

import type { MetricName, TrialView } from "./types.js";

export interface ScatterPoint {
  id: number;
  /** pixel coordinates inside the viewport */
  x: number;
  y: number;
  /** raw metric values backing the point */
  xValue: number;
  yValue: number;
  selected: boolean;
}

export interface ScatterLayout {
  points: ScatterPoint[];
  xMetric: MetricName;
  yMetric: MetricName;
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
  width: number;
  height: number;
  padding: number;
}

function scale(value: number, lo: number, hi: number, pixLo: number, pixHi: number): number {
  if (hi === lo) return (pixLo + pixHi) / 2; // degenerate extent: center
  return pixLo + ((value - lo) / (hi - lo)) * (pixHi - pixLo);
}

export function scatterLayout(
  trials: readonly TrialView[],
  xMetric: MetricName,
  yMetric: MetricName,
  selectedId: number | null,
  width = 520,
  height = 360,
  padding = 40,
): ScatterLayout {
  const scored = trials.filter(
    (t): t is TrialView & { metrics: Record<MetricName, number> } =>
      t.ok && t.metrics !== null,
  );
  const xs = scored.map((t) => t.metrics[xMetric]);
  const ys = scored.map((t) => t.metrics[yMetric]);
  const xMin = xs.length > 0 ? Math.min(...xs) : 0;
  const xMax = xs.length > 0 ? Math.max(...xs) : 1;
  const yMin = ys.length > 0 ? Math.min(...ys) : 0;
  const yMax = ys.length > 0 ? Math.max(...ys) : 1;

  const points = scored.map((t) => ({
    id: t.id,
    x: scale(t.metrics[xMetric], xMin, xMax, padding, width - padding),
    // SVG y grows downward; larger metric values render higher up
    y: scale(t.metrics[yMetric], yMin, yMax, height - padding, padding),
    xValue: t.metrics[xMetric],
    yValue: t.metrics[yMetric],
    selected: t.id === selectedId,
  }));
  return {
    points,
    xMetric,
    yMetric,
    xMin,
    xMax,
    yMin,
    yMax,
    width,
    height,
    padding,
  };
}
