/** Payload shapes of the /v1 API. The UI renders these verbatim: every number
 * on screen comes from one of these fields, formatted but never recomputed. */

export const METRIC_IDS = [
  "individual.infra_marginal.outcome",
  "individual.infra_marginal.eoo",
  "individual.intersectional.outcome",
  "individual.intersectional.eoo",
  "group.infra_marginal.outcome",
  "group.infra_marginal.eoo",
  "group.intersectional.outcome",
  "group.intersectional.eoo",
] as const;

export type MetricId = (typeof METRIC_IDS)[number];

export interface MetricDescriptor {
  id: string;
  granularity: "individual" | "group";
  stance: "infra_marginal" | "intersectional";
  regime: "outcome" | "eoo";
  name: string;
  description: string;
}

export interface DatasetSummary {
  name: string;
  rows: number;
  dim: number;
  groups: { privileged: number; unprivileged: number };
  splits: Record<string, number>;
  class_distribution: Array<{
    group: string;
    label: number;
    count: number;
    proportion: number;
  }>;
}

export interface StakeholderPreset {
  id: string;
  name: string;
  dataset: string;
  target_metric: string;
  lambda: number;
  accuracy_tolerance_pp: number;
  description: string;
  weights: Record<string, number>;
}

export interface TrainConfigPayload {
  lambda: number;
  weights: Record<string, number>;
  epochs: number;
  learning_rate: number;
  seed: number | null;
  adam_beta1: number;
  adam_beta2: number;
  adam_epsilon: number;
}

/** One evaluated configuration on a frontier. `metric_values` holds the
 * reporting split (named by `split`), `dev_metric_values` the selection split.
 * Failed points carry `error` and null evaluation fields. */
export interface FrontierPoint {
  config: TrainConfigPayload;
  config_hash: string;
  status: "ok" | "failed";
  error: string | null;
  split: string;
  test_accuracy: number | null;
  dev_accuracy: number | null;
  metric_values: Record<string, number | null>;
  dev_metric_values: Record<string, number | null>;
  label?: string;
  aggregate?: boolean;
  seeds?: number[];
}

export type Frontier = FrontierPoint[];

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobRecord {
  id: string;
  kind: string;
  state: JobState;
  progress: number;
  result_ref: string | null;
  error: string | null;
  idempotency_key: string | null;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field?: string | null;
}

export type JobKind =
  | "train"
  | "lambda_sweep"
  | "alpha_sweep"
  | "consensus_sweep"
  | "stakeholder_search";

/** Chart axis: accuracy or any metric id, resolved against a FrontierPoint. */
export type AxisKey = "accuracy" | string;

export function axisValue(point: FrontierPoint, axis: AxisKey): number | null {
  if (axis === "accuracy") return point.test_accuracy;
  const v = point.metric_values[axis];
  return v === undefined ? null : v;
}
