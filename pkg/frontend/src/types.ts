/** Payload shapes served by the frontier result service. */

export type MetricName = "bcs" | "icp" | "sm" | "mq" | "ifn" | "ned";

export interface WeightVector {
  w_sm: number;
  w_icp: number;
  w_ned: number;
  w_bcs: number;
}

export type WeightField = keyof WeightVector;

export const WEIGHT_FIELDS: readonly WeightField[] = [
  "w_sm",
  "w_icp",
  "w_ned",
  "w_bcs",
];

/** Optimization direction per metric; "-" means lower is better. */
export const METRIC_DIRECTIONS: Record<MetricName, "-" | "+"> = {
  bcs: "-",
  icp: "-",
  sm: "+",
  mq: "+",
  ifn: "-",
  ned: "-",
};

export interface PartitionPayload {
  /** class name -> cluster id (0..k-1) */
  assignment: Record<string, number>;
  k: number;
}

export interface TrialView {
  id: number;
  hyper_params: Record<string, number>;
  seed: number;
  ok: boolean;
  selected: boolean;
  error: string | null;
  metrics: Record<MetricName, number> | null;
  partition: PartitionPayload | null;
}

export interface FrontierPayload {
  trials: TrialView[];
  weights: WeightVector;
  selected_id: number | null;
  metric_order: MetricName[];
}

export interface WeightsPayload {
  weights: WeightVector;
  correlations: (number | null)[][] | null;
  metric_order: MetricName[];
}

export type GraphEdge = [caller: string, callee: string, count: number];

export interface GraphPayload {
  nodes: string[];
  edges: GraphEdge[];
}

export interface ReselectResponse {
  selected_id: number | null;
  weights: WeightVector;
  losses: [id: number, loss: number][];
}
