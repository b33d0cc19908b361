import { describe, expect, it } from "vitest";
import {
  CONSENSUS_PAIRS,
  consensusPayload,
  dominantMetric,
  lambdaSweepPayload,
  searchPayload,
} from "../src/payloads.js";
import { addPanel, applyPreset, newSession, setLambda, setWeight } from "../src/state.js";
import { BUNDLED_PRESETS } from "../src/presets.js";
import { METRIC_IDS } from "../src/types.js";

describe("consensus weight pairs", () => {
  it("walk the dominant share from 0.9 down to 0.1", () => {
    expect(CONSENSUS_PAIRS).toEqual([
      [0.9, 0.1],
      [0.7, 0.3],
      [0.5, 0.5],
      [0.3, 0.7],
      [0.1, 0.9],
    ]);
    for (const [a, b] of CONSENSUS_PAIRS) {
      expect(a + b).toBeCloseTo(1, 12);
    }
  });
});

describe("payload builders", () => {
  it("builds a single-lambda sweep from a panel", () => {
    const state = newSession();
    const panel = addPanel(state, "one");
    applyPreset(state, panel, BUNDLED_PRESETS[4]); // public-health, lambda 2.0
    const payload = lambdaSweepPayload("meps", panel) as Record<string, unknown>;
    expect(payload.dataset).toBe("meps");
    expect(payload.lambda_grid).toEqual([2.0]);
    expect(payload.seeds).toEqual([0]);
    const weights = payload.base_weights as Record<string, number>;
    expect(weights["group.intersectional.outcome"]).toBe(1.0);
    expect(Object.keys(weights).sort()).toEqual([...METRIC_IDS].sort());
  });

  it("derives consensus metrics from each panel's strongest weight", () => {
    const state = newSession();
    const a = addPanel(state, "a");
    const b = addPanel(state, "b");
    applyPreset(state, a, BUNDLED_PRESETS[0]); // individual.infra_marginal.eoo, lambda 1.0
    applyPreset(state, b, BUNDLED_PRESETS[1]); // group.intersectional.outcome, lambda 3.0
    expect(dominantMetric(a)).toBe("individual.infra_marginal.eoo");
    expect(dominantMetric(b)).toBe("group.intersectional.outcome");

    const payload = consensusPayload("compas", a, b) as Record<string, unknown>;
    expect(payload.metric_a).toBe("individual.infra_marginal.eoo");
    expect(payload.metric_b).toBe("group.intersectional.outcome");
    expect(payload.lambda_fixed).toBe(3.0); // stronger pull wins
    expect(payload.weight_pairs).toEqual(CONSENSUS_PAIRS);
  });

  it("tracks slider moves when picking the dominant metric", () => {
    const state = newSession();
    const panel = addPanel(state, "drag");
    setWeight(panel, METRIC_IDS.indexOf("group.infra_marginal.eoo"), 0.8);
    setLambda(panel, 0.5);
    expect(dominantMetric(panel)).toBe("group.infra_marginal.eoo");
  });

  it("builds a stakeholder search from a preset", () => {
    const preset = BUNDLED_PRESETS[2]; // social-work
    const payload = searchPayload(preset) as Record<string, any>;
    expect(payload.dataset).toBe("compas");
    expect(payload.profile.name).toBe("social-work");
    expect(payload.profile.target_metric).toBe("group.intersectional.eoo");
    expect(payload.profile.accuracy_tolerance_pp).toBe(5.0);
  });
});
