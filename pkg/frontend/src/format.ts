/** Pure display helpers: direction markers, number formatting, size badges. */

import type { MetricName } from "./types.js";
import { METRIC_DIRECTIONS } from "./types.js";

/** Preferred cluster-size band; sizes outside it get a warning badge. */
export const MIN_CLUSTER_SIZE = 5;
export const MAX_CLUSTER_SIZE = 20;

export type SizeBadge = "below-min" | "above-max";

export function sizeBadge(size: number): SizeBadge | null {
  if (size < MIN_CLUSTER_SIZE) return "below-min";
  if (size > MAX_CLUSTER_SIZE) return "above-max";
  return null;
}

export function sizeBadgeText(badge: SizeBadge): string {
  return badge === "below-min"
    ? `< ${MIN_CLUSTER_SIZE} classes`
    : `> ${MAX_CLUSTER_SIZE} classes`;
}

/** "↓" marks lower-is-better metrics, "↑" higher-is-better. */
export function directionMarker(metric: MetricName): "↓" | "↑" {
  return METRIC_DIRECTIONS[metric] === "-" ? "↓" : "↑";
}

export function metricLabel(metric: MetricName): string {
  return `${metric} ${directionMarker(metric)}`;
}

export function formatNumber(value: number, digits = 4): string {
  if (!Number.isFinite(value)) return "—";
  return value.toFixed(digits);
}
