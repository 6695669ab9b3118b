/** UI state for the frontier explorer.
 *
 * The store never decides the selection itself: every weight change is
 * pushed through the service's POST /reselect (debounced, at most one
 * request in flight, stale responses discarded), and the highlighted
 * trial is always the id the service answered with.
 */

import { ApiError, type FrontierClient } from "./api.js";
import type {
  FrontierPayload,
  GraphPayload,
  PartitionPayload,
  WeightField,
  WeightVector,
  WeightsPayload,
} from "./types.js";
import { WEIGHT_FIELDS } from "./types.js";

export type Status = "loading" | "ready" | "error";

export interface StoreState {
  status: Status;
  /** load failure shown in the banner; undefined when healthy */
  error?: string;
  frontier?: FrontierPayload;
  calibrated?: WeightsPayload;
  graph?: GraphPayload;
  /** current slider values */
  weights: WeightVector;
  /** the service's answer for the current weights */
  selectedId: number | null;
  /** per-trial weighted loss from the last reselect response */
  losses: Map<number, number>;
  /** reselect failure shown inline; selection keeps its last value */
  reselectError?: string;
  /** per-field validation message; a field with an error sends nothing */
  fieldErrors: Partial<Record<WeightField, string>>;
  /** trial whose partition the panel shows */
  inspectedId: number | null;
  partition?: PartitionPayload;
  partitionError?: string;
}

export const DEFAULT_DEBOUNCE_MS = 150;

const ZERO_WEIGHTS: WeightVector = { w_sm: 0, w_icp: 0, w_ned: 0, w_bcs: 0 };

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  if (err instanceof Error) return err.message;
  return String(err);
}

export class FrontierStore {
  private readonly client: FrontierClient;
  private readonly debounceMs: number;
  private readonly listeners = new Set<() => void>();

  private timer: ReturnType<typeof setTimeout> | undefined;
  private inflight: Promise<void> | undefined;
  private pending = false;
  /** bumped on every accepted weight change; responses for older values are stale */
  private commitSeq = 0;

  readonly state: StoreState = {
    status: "loading",
    weights: { ...ZERO_WEIGHTS },
    selectedId: null,
    losses: new Map(),
    fieldErrors: {},
    inspectedId: null,
  };

  constructor(client: FrontierClient, options?: { debounceMs?: number }) {
    this.client = client;
    this.debounceMs = options?.debounceMs ?? DEFAULT_DEBOUNCE_MS;
  }

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Fetch the three views, then sync losses/selection through reselect. */
  async load(): Promise<void> {
    this.state.status = "loading";
    this.state.error = undefined;
    this.notify();
    try {
      const [frontier, calibrated, graph] = await Promise.all([
        this.client.frontier(),
        this.client.weights(),
        this.client.graph(),
      ]);
      this.state.frontier = frontier;
      this.state.calibrated = calibrated;
      this.state.graph = graph;
      this.state.weights = { ...frontier.weights };
      this.state.selectedId = frontier.selected_id;
      this.state.losses = new Map();
      this.state.reselectError = undefined;
      this.state.fieldErrors = {};
      this.state.status = "ready";
      this.notify();
      this.send();
      await this.inflight;
      if (this.state.selectedId !== null) {
        await this.inspect(this.state.selectedId);
      }
    } catch (err) {
      this.state.status = "error";
      this.state.error = describe(err);
      this.notify();
    }
  }

  /** Validate one slider/input value; schedule a debounced reselect. */
  setWeight(field: WeightField, value: number): void {
    if (!WEIGHT_FIELDS.includes(field)) {
      throw new Error(`unknown weight field ${String(field)}`);
    }
    if (typeof value !== "number" || !Number.isFinite(value)) {
      this.state.fieldErrors = {
        ...this.state.fieldErrors,
        [field]: "must be a finite number",
      };
      this.notify();
      return;
    }
    const { [field]: _cleared, ...rest } = this.state.fieldErrors;
    this.state.fieldErrors = rest;
    this.state.weights = { ...this.state.weights, [field]: value };
    this.commitSeq += 1;
    this.notify();
    this.schedule();
  }

  /** Snap all four sliders back to the calibrated values. */
  resetToCalibrated(): void {
    const calibrated = this.state.calibrated;
    if (!calibrated) return;
    this.state.fieldErrors = {};
    this.state.weights = { ...calibrated.weights };
    this.commitSeq += 1;
    this.notify();
    this.schedule();
  }

  /** Fetch and show one trial's partition; 404s become a panel message. */
  async inspect(trialId: number): Promise<void> {
    this.state.inspectedId = trialId;
    this.state.partition = undefined;
    this.state.partitionError = undefined;
    this.notify();
    try {
      const partition = await this.client.partition(trialId);
      if (this.state.inspectedId === trialId) {
        this.state.partition = partition;
        this.notify();
      }
    } catch (err) {
      if (this.state.inspectedId === trialId) {
        this.state.partitionError = describe(err);
        this.notify();
      }
    }
  }

  /** Flush the debounce timer and wait until no request is in flight. */
  async settle(): Promise<void> {
    for (;;) {
      if (this.timer !== undefined) {
        clearTimeout(this.timer);
        this.timer = undefined;
        this.flush();
      }
      if (this.inflight === undefined) return;
      await this.inflight;
    }
  }

  private schedule(): void {
    if (this.timer !== undefined) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = undefined;
      this.flush();
    }, this.debounceMs);
  }

  private flush(): void {
    if (this.inflight !== undefined) {
      this.pending = true;
      return;
    }
    this.send();
  }

  private send(): void {
    this.inflight = this.reselectOnce().finally(() => {
      this.inflight = undefined;
      if (this.pending) {
        this.pending = false;
        this.send();
      }
    });
  }

  private async reselectOnce(): Promise<void> {
    const sentSeq = this.commitSeq;
    const snapshot = { ...this.state.weights };
    try {
      const response = await this.client.reselect(snapshot);
      if (sentSeq !== this.commitSeq) return; // stale: weights moved on
      this.state.selectedId = response.selected_id;
      this.state.losses = new Map(response.losses);
      this.state.reselectError = undefined;
      this.notify();
    } catch (err) {
      if (sentSeq !== this.commitSeq) return;
      this.state.reselectError = describe(err);
      this.notify();
    }
  }
}
