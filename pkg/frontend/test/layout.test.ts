/** Unit tests for the pure display helpers: scatter layout, direction
 * markers, cluster-size badges, and cluster cards.
 */

import { describe, expect, it } from "vitest";

import { clusterCards } from "../src/clusters.js";
import {
  directionMarker,
  formatNumber,
  metricLabel,
  sizeBadge,
  sizeBadgeText,
} from "../src/format.js";
import { scatterLayout } from "../src/scatter.js";
import type { MetricName } from "../src/types.js";
import { fixtureFrontier, fixtureGraph } from "./fakes.js";

describe("scatterLayout", () => {
  const trials = fixtureFrontier().trials;

  it("keeps every point inside the padded viewport", () => {
    const layout = scatterLayout(trials, "icp", "bcs", 3, 520, 360, 40);
    expect(layout.points.length).toBeGreaterThan(0);
    for (const p of layout.points) {
      expect(p.x).toBeGreaterThanOrEqual(40);
      expect(p.x).toBeLessThanOrEqual(480);
      expect(p.y).toBeGreaterThanOrEqual(40);
      expect(p.y).toBeLessThanOrEqual(320);
    }
  });

  it("marks exactly the selected trial", () => {
    const layout = scatterLayout(trials, "icp", "bcs", 3);
    expect(layout.points.filter((p) => p.selected).map((p) => p.id)).toEqual([3]);
  });

  it("excludes failed trials", () => {
    const layout = scatterLayout(trials, "icp", "bcs", null);
    expect(layout.points.map((p) => p.id)).not.toContain(2);
  });

  it("centers a degenerate axis instead of dividing by zero", () => {
    const layout = scatterLayout(trials, "mq", "icp", null, 520, 360, 40);
    // mq is 1.0, 1.0, 2.0 across ok trials -> fine; force true degeneracy:
    const flat = trials.filter((t) => t.metrics && t.metrics.mq === 1.0);
    const degenerate = scatterLayout(flat, "mq", "icp", null, 520, 360, 40);
    for (const p of degenerate.points) {
      expect(Number.isFinite(p.x)).toBe(true);
      expect(p.x).toBe(260); // centered
    }
    expect(layout.points.every((p) => Number.isFinite(p.y))).toBe(true);
  });

  it("inverts the y axis so larger values render higher", () => {
    const layout = scatterLayout(trials, "icp", "bcs", null, 520, 360, 40);
    const byId = new Map(layout.points.map((p) => [p.id, p]));
    // trial 1 has the largest bcs -> smallest pixel y (closest to the top)
    expect(byId.get(1)!.y).toBeLessThan(byId.get(3)!.y);
  });
});

describe("direction markers", () => {
  it("labels lower-is-better metrics with a down arrow", () => {
    const expected: Record<MetricName, string> = {
      bcs: "↓",
      icp: "↓",
      sm: "↑",
      mq: "↑",
      ifn: "↓",
      ned: "↓",
    };
    for (const [metric, marker] of Object.entries(expected)) {
      expect(directionMarker(metric as MetricName)).toBe(marker);
      expect(metricLabel(metric as MetricName)).toBe(`${metric} ${marker}`);
    }
  });
});

describe("cluster size badges", () => {
  it("flags clusters below the minimum", () => {
    expect(sizeBadge(1)).toBe("below-min");
    expect(sizeBadge(4)).toBe("below-min");
    expect(sizeBadgeText("below-min")).toContain("5");
  });

  it("flags clusters above the maximum", () => {
    expect(sizeBadge(21)).toBe("above-max");
    expect(sizeBadge(100)).toBe("above-max");
    expect(sizeBadgeText("above-max")).toContain("20");
  });

  it("leaves the preferred band unbadged", () => {
    for (const size of [5, 12, 20]) expect(sizeBadge(size)).toBeNull();
  });
});

describe("clusterCards", () => {
  it("groups classes, counts sizes, and tallies crossing edges", () => {
    const summary = clusterCards(
      { assignment: { A: 0, B: 0, C: 1, D: 1 }, k: 2 },
      fixtureGraph(), // edges A->B (intra 0), B->C (cross), C->D (intra 1)
    );
    expect(summary.cards).toHaveLength(2);
    expect(summary.cards[0]).toMatchObject({
      cluster: 0,
      classes: ["A", "B"],
      size: 2,
      crossEdges: 1,
    });
    expect(summary.cards[1]).toMatchObject({
      cluster: 1,
      classes: ["C", "D"],
      size: 2,
      crossEdges: 1,
    });
    expect(summary.totalEdges).toBe(3);
    expect(summary.crossingEdges).toBe(1);
  });

  it("keeps empty clusters visible", () => {
    const summary = clusterCards(
      { assignment: { A: 0, B: 0, C: 0, D: 0 }, k: 2 },
      fixtureGraph(),
    );
    expect(summary.cards).toHaveLength(2);
    expect(summary.cards[1]).toMatchObject({ cluster: 1, size: 0, crossEdges: 0 });
    expect(summary.crossingEdges).toBe(0);
  });
});

describe("formatNumber", () => {
  it("renders finite numbers at fixed precision and dashes otherwise", () => {
    expect(formatNumber(1.23456)).toBe("1.2346");
    expect(formatNumber(2, 2)).toBe("2.00");
    expect(formatNumber(Number.NaN)).toBe("—");
    expect(formatNumber(Number.POSITIVE_INFINITY)).toBe("—");
  });
});
