import { METRIC_IDS } from "./types.js";
import type { StakeholderPreset } from "./types.js";
import type { StakeholderPanel } from "./state.js";
import { weightsById } from "./state.js";

/** Two-stakeholder trade-off schedule, dominant weight 0.9 down to 0.1. */
export const CONSENSUS_PAIRS: Array<[number, number]> = [
  [0.9, 0.1],
  [0.7, 0.3],
  [0.5, 0.5],
  [0.3, 0.7],
  [0.1, 0.9],
];

/** A panel's strongest-weighted metric names its side of a consensus sweep. */
export function dominantMetric(panel: StakeholderPanel): string {
  let best = 0;
  for (let i = 1; i < panel.weights.length; i++) {
    if (panel.weights[i] > panel.weights[best]) best = i;
  }
  return METRIC_IDS[best];
}

export function lambdaSweepPayload(dataset: string, panel: StakeholderPanel): object {
  return {
    dataset,
    lambda_grid: [panel.lambda],
    base_weights: weightsById(panel),
    seeds: [0],
  };
}

export function consensusPayload(
  dataset: string,
  panelA: StakeholderPanel,
  panelB: StakeholderPanel,
): object {
  const metricA = dominantMetric(panelA);
  const metricB = dominantMetric(panelB);
  // the shared lambda is whichever panel asks for the stronger pull
  const lambda = Math.max(panelA.lambda, panelB.lambda);
  return {
    dataset,
    metric_a: metricA,
    metric_b: metricB,
    lambda_fixed: lambda,
    weight_pairs: CONSENSUS_PAIRS.map((pair) => [...pair]),
    seeds: [0],
  };
}

export function searchPayload(preset: StakeholderPreset): object {
  return {
    dataset: preset.dataset,
    profile: {
      name: preset.id,
      target_metric: preset.target_metric,
      accuracy_tolerance_pp: preset.accuracy_tolerance_pp,
    },
    seeds: [0],
  };
}
