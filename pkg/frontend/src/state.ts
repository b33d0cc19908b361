import { METRIC_IDS } from "./types.js";
import type { AxisKey, FrontierPoint, StakeholderPreset } from "./types.js";

/** One stakeholder's control panel: a weight vector over the eight metrics
 * plus a lambda. Weights are kept normalized (sum 1) by every interaction; an
 * all-zero vector can only enter via a loaded session and blocks submission. */
export interface StakeholderPanel {
  stakeholder: string;
  weights: number[];
  lambda: number;
}

export interface ComparisonView {
  x: AxisKey;
  y: AxisKey;
}

export interface SessionState {
  dataset: string | null;
  panels: StakeholderPanel[];
  frontiers: Record<string, FrontierPoint[]>;
  pinned: string[];
  comparison: ComparisonView;
}

const N = METRIC_IDS.length;
const SESSION_VERSION = 1;

export function newSession(): SessionState {
  return {
    dataset: null,
    panels: [],
    frontiers: {},
    pinned: [],
    comparison: { x: "accuracy", y: METRIC_IDS[6] },
  };
}

/** New panels start uniform so the sum-to-one invariant holds from the start. */
export function addPanel(state: SessionState, stakeholder: string): StakeholderPanel {
  if (state.panels.some((p) => p.stakeholder === stakeholder)) {
    throw new Error(`panel for ${stakeholder} already exists`);
  }
  const panel: StakeholderPanel = {
    stakeholder,
    weights: new Array(N).fill(1 / N),
    lambda: 0,
  };
  state.panels.push(panel);
  return panel;
}

export function getPanel(state: SessionState, stakeholder: string): StakeholderPanel {
  const panel = state.panels.find((p) => p.stakeholder === stakeholder);
  if (!panel) throw new Error(`no panel for ${stakeholder}`);
  return panel;
}

/**
 * Drag slider `idx` to `value` and renormalize the remaining weights
 * proportionally so the vector still sums to 1. When the other weights are
 * all zero there is no proportion to preserve, so the leftover mass spreads
 * evenly; dragging the only positive slider therefore hands its mass to the
 * others instead of zeroing the panel.
 */
export function setWeight(panel: StakeholderPanel, idx: number, value: number): void {
  if (idx < 0 || idx >= N) throw new Error(`weight index out of range: ${idx}`);
  const v = Math.min(1, Math.max(0, value));
  const rest = 1 - v;
  let othersSum = 0;
  for (let i = 0; i < N; i++) if (i !== idx) othersSum += panel.weights[i];

  if (othersSum > 0) {
    const scale = rest / othersSum;
    for (let i = 0; i < N; i++) if (i !== idx) panel.weights[i] *= scale;
    panel.weights[idx] = v;
  } else if (v > 0) {
    // single active slider: it owns the whole budget
    panel.weights.fill(0);
    panel.weights[idx] = 1;
  } else {
    for (let i = 0; i < N; i++) panel.weights[i] = i === idx ? 0 : rest / (N - 1);
  }

  // squash float drift from repeated proportional scaling
  const total = panel.weights.reduce((a, b) => a + b, 0);
  if (total > 0 && Math.abs(total - 1) > 1e-12) {
    for (let i = 0; i < N; i++) panel.weights[i] /= total;
  }
}

export function setLambda(panel: StakeholderPanel, value: number): void {
  if (!Number.isFinite(value) || value < 0) {
    throw new Error(`lambda must be a nonnegative number, got ${value}`);
  }
  panel.lambda = value;
}

/** Load a preset exactly: weight 1 on its target metric, its lambda, its dataset. */
export function applyPreset(
  state: SessionState,
  panel: StakeholderPanel,
  preset: StakeholderPreset,
): void {
  panel.weights = METRIC_IDS.map((mid) => preset.weights[mid] ?? 0);
  panel.lambda = preset.lambda;
  state.dataset = preset.dataset;
}

/** A panel with every slider at zero has nothing to optimize for. */
export function canSubmit(panel: StakeholderPanel): { ok: boolean; message?: string } {
  if (panel.weights.every((w) => w === 0)) {
    return { ok: false, message: "all weights are zero; raise at least one slider" };
  }
  return { ok: true };
}

export function weightsById(panel: StakeholderPanel): Record<string, number> {
  const out: Record<string, number> = {};
  METRIC_IDS.forEach((mid, i) => {
    out[mid] = panel.weights[i];
  });
  return out;
}

export function loadFrontier(state: SessionState, name: string, points: FrontierPoint[]): void {
  state.frontiers[name] = points;
}

export function findPoint(state: SessionState, hash: string): FrontierPoint | null {
  for (const points of Object.values(state.frontiers)) {
    const hit = points.find((p) => p.config_hash === hash);
    if (hit) return hit;
  }
  return null;
}

/** Pins must reference a point in some loaded frontier; pinning twice unpins. */
export function togglePin(state: SessionState, hash: string): boolean {
  const at = state.pinned.indexOf(hash);
  if (at >= 0) {
    state.pinned.splice(at, 1);
    return false;
  }
  if (!findPoint(state, hash)) {
    throw new Error(`no frontier point with hash ${hash}`);
  }
  state.pinned.push(hash);
  return true;
}

export function pinnedPoints(state: SessionState): FrontierPoint[] {
  return state.pinned.map((hash) => {
    const point = findPoint(state, hash);
    if (!point) throw new Error(`pinned hash ${hash} has no frontier point`);
    return point;
  });
}

/** Serialize for export as a JSON file. */
export function saveSession(state: SessionState): string {
  return JSON.stringify({ version: SESSION_VERSION, session: state }, null, 2);
}

/**
 * Restore a saved session. Panels and pins come back exactly as saved;
 * a session whose pins no longer resolve against its own frontiers is
 * corrupt and rejected rather than silently repaired.
 */
export function loadSession(text: string): SessionState {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch {
    throw new Error("session file is not valid JSON");
  }
  const wrapper = parsed as { version?: number; session?: SessionState };
  if (wrapper.version !== SESSION_VERSION || !wrapper.session) {
    throw new Error("unrecognized session file format");
  }
  const state = wrapper.session;
  if (!Array.isArray(state.panels) || typeof state.frontiers !== "object") {
    throw new Error("session file is missing panels or frontiers");
  }
  for (const panel of state.panels) {
    if (!Array.isArray(panel.weights) || panel.weights.length !== N) {
      throw new Error(`panel ${panel.stakeholder} has a malformed weight vector`);
    }
  }
  for (const hash of state.pinned) {
    if (!findPoint(state, hash)) {
      throw new Error(`pinned candidate ${hash} references no loaded frontier point`);
    }
  }
  return state;
}
