/** Typed HTTP client for the frontier result service. */

import type {
  FrontierPayload,
  GraphPayload,
  PartitionPayload,
  ReselectResponse,
  WeightVector,
  WeightsPayload,
} from "./types.js";

export class ApiError extends Error {
  /** HTTP status; 0 when the service could not be reached at all. */
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

/** The five service endpoints; the UI does all I/O through this surface. */
export interface FrontierClient {
  frontier(): Promise<FrontierPayload>;
  weights(): Promise<WeightsPayload>;
  graph(): Promise<GraphPayload>;
  partition(trialId: number): Promise<PartitionPayload>;
  reselect(overrides: Partial<WeightVector>): Promise<ReselectResponse>;
}

export class ServiceClient implements FrontierClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(
        0,
        `service unreachable at ${this.baseUrl}: ${err instanceof Error ? err.message : String(err)}`,
      );
    }
    const body: unknown = await response.json().catch(() => null);
    if (!response.ok) {
      const detail =
        body !== null && typeof body === "object" && "error" in body
          ? String((body as { error: unknown }).error)
          : `${response.status} ${response.statusText}`;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  frontier(): Promise<FrontierPayload> {
    return this.request<FrontierPayload>("/frontier");
  }

  weights(): Promise<WeightsPayload> {
    return this.request<WeightsPayload>("/weights");
  }

  graph(): Promise<GraphPayload> {
    return this.request<GraphPayload>("/graph");
  }

  partition(trialId: number): Promise<PartitionPayload> {
    return this.request<PartitionPayload>(`/trial/${trialId}/partition`);
  }

  reselect(overrides: Partial<WeightVector>): Promise<ReselectResponse> {
    return this.request<ReselectResponse>("/reselect", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(overrides),
    });
  }
}
