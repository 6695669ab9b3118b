/** Selection-mirror acceptance suite against a real served artifact.
 *
 * A result service is spawned on the committed 20-trial fixture and the
 * store is driven exactly as the sliders drive it.  The highlighted
 * trial must always be the service's reselect answer: max-w_icp picks
 * the minimum-ICP trial, reset restores the artifact's stored
 * selection, and positive proportional scaling never moves the
 * highlight.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { FrontierStore } from "../src/store.js";
import type { FrontierPayload, WeightVector } from "../src/types.js";
import { WEIGHT_FIELDS } from "../src/types.js";
import { type RunningService, startService } from "./service_harness.js";

let service: RunningService;
let client: ServiceClient;
let store: FrontierStore;
let served: FrontierPayload;

beforeAll(async () => {
  service = await startService();
  client = new ServiceClient(service.baseUrl);
  store = new FrontierStore(client);
  await store.load();
  served = store.state.frontier!;
});

afterAll(async () => {
  await service?.stop();
});

function setAll(weights: WeightVector): void {
  for (const field of WEIGHT_FIELDS) store.setWeight(field, weights[field]);
}

describe("served fixture", () => {
  it("has twenty trials and a stored selection", () => {
    expect(served.trials).toHaveLength(20);
    expect(served.selected_id).not.toBeNull();
    expect(store.state.selectedId).toBe(served.selected_id);
    // loss column is populated for every successful trial
    expect(store.state.losses.size).toBe(served.trials.filter((t) => t.ok).length);
  });
});

describe("selection mirror", () => {
  it("w_icp at slider max, others zero, highlights the minimum-ICP trial", async () => {
    setAll({ w_sm: 0, w_icp: 3, w_ned: 0, w_bcs: 0 });
    await store.settle();

    const direct = await client.reselect({ w_sm: 0, w_icp: 3, w_ned: 0, w_bcs: 0 });
    expect(store.state.selectedId).toBe(direct.selected_id);

    const okTrials = served.trials.filter((t) => t.ok && t.metrics !== null);
    const minIcp = Math.min(...okTrials.map((t) => t.metrics!.icp));
    const highlighted = okTrials.find((t) => t.id === store.state.selectedId);
    expect(highlighted).toBeDefined();
    expect(highlighted!.metrics!.icp).toBe(minIcp);
  });

  it("reset to calibrated restores the artifact's stored selection", async () => {
    setAll({ w_sm: 1, w_icp: 0.1, w_ned: 2, w_bcs: 0.7 }); // wander off
    await store.settle();
    store.resetToCalibrated();
    await store.settle();
    expect(store.state.weights).toEqual(store.state.calibrated!.weights);
    expect(store.state.selectedId).toBe(served.selected_id);
  });

  it("proportional scaling of all sliders keeps the highlight unchanged", async () => {
    store.resetToCalibrated();
    await store.settle();
    const base = store.state.selectedId;
    const calibrated = { ...store.state.calibrated!.weights };
    for (const factor of [0.5, 1.02]) {
      setAll({
        w_sm: calibrated.w_sm * factor,
        w_icp: calibrated.w_icp * factor,
        w_ned: calibrated.w_ned * factor,
        w_bcs: calibrated.w_bcs * factor,
      });
      await store.settle();
      expect(store.state.selectedId).toBe(base);
    }
  });

  it("mirrors the service on arbitrary slider settings", async () => {
    // deterministic pseudo-random slider positions across the full span
    let state = 12345;
    const next = () => {
      state = (state * 48271) % 2147483647;
      return (state / 2147483647) * 6 - 3; // [-3, 3]
    };
    for (let round = 0; round < 12; round += 1) {
      const weights: WeightVector = {
        w_sm: next(),
        w_icp: next(),
        w_ned: next(),
        w_bcs: next(),
      };
      setAll(weights);
      await store.settle();
      const direct = await client.reselect(weights);
      expect(store.state.selectedId).toBe(direct.selected_id);
      const storeLosses = [...store.state.losses.entries()].sort(
        (a, b) => a[0] - b[0],
      );
      const directLosses = direct.losses
        .map(([id, loss]): [number, number] => [id, loss])
        .sort((a, b) => a[0] - b[0]);
      expect(storeLosses).toEqual(directLosses);
    }
  });
});

describe("partition inspection", () => {
  it("shows k clusters for the stored selection, flagging undersized ones", async () => {
    store.resetToCalibrated();
    await store.settle();
    await store.inspect(store.state.selectedId!);
    const partition = store.state.partition!;
    expect(partition).toBeDefined();
    const clusterIds = new Set(Object.values(partition.assignment));
    expect(clusterIds.size).toBe(partition.k);
    const sizes = new Map<number, number>();
    for (const cluster of Object.values(partition.assignment)) {
      sizes.set(cluster, (sizes.get(cluster) ?? 0) + 1);
    }
    const total = [...sizes.values()].reduce((a, b) => a + b, 0);
    expect(total).toBe(store.state.graph!.nodes.length);
    // the fixture's stored selection has ned > 0: some cluster is undersized
    expect([...sizes.values()].some((size) => size < 5)).toBe(true);
  });

  it("reports unknown trial ids as not found", async () => {
    await store.inspect(999);
    expect(store.state.partitionError).toMatch(/no trial 999/);
  });
});
