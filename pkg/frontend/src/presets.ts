import { METRIC_IDS } from "./types.js";
import type { StakeholderPreset } from "./types.js";

function weightsFor(target: string): Record<string, number> {
  const out: Record<string, number> = {};
  for (const mid of METRIC_IDS) out[mid] = mid === target ? 1.0 : 0.0;
  return out;
}

function preset(
  id: string,
  name: string,
  dataset: string,
  target: string,
  lambda: number,
  description: string,
): StakeholderPreset {
  return {
    id,
    name,
    dataset,
    target_metric: target,
    lambda,
    accuracy_tolerance_pp: 5.0,
    description,
    weights: weightsFor(target),
  };
}

/**
 * Bundled copy of GET /v1/stakeholders, used when the server is unreachable
 * (read-only mode). A fidelity test pins this list against a captured
 * response, so any server-side preset change must land here too.
 */
export const BUNDLED_PRESETS: StakeholderPreset[] = [
  preset(
    "public-safety",
    "Public Safety Advocates",
    "compas",
    "individual.infra_marginal.eoo",
    1.0,
    "Consistent, merit-based treatment: among people who truly reoffend, similarly risky individuals should receive equivalent predictions regardless of group.",
  ),
  preset(
    "civil-rights",
    "Civil Rights Organizations",
    "compas",
    "group.intersectional.outcome",
    3.0,
    "Parity in outcomes across demographic groups regardless of base rates, correcting for systemic disadvantage.",
  ),
  preset(
    "social-work",
    "Social Workers",
    "compas",
    "group.intersectional.eoo",
    3.0,
    "Equitable access to rehabilitative resources: among people who truly reoffend, groups should be flagged for support at equal rates.",
  ),
  preset(
    "provider",
    "Healthcare Providers",
    "meps",
    "individual.infra_marginal.eoo",
    2.0,
    "Patients with similar health conditions who truly need frequent care should receive comparable predictions.",
  ),
  preset(
    "public-health",
    "Public Health Officials",
    "meps",
    "group.intersectional.outcome",
    2.0,
    "Disadvantaged subgroups should not be under-identified for care, even at some cost to accuracy.",
  ),
  preset(
    "patient-advocacy",
    "Patient Advocacy Groups",
    "meps",
    "group.intersectional.eoo",
    2.0,
    "Among people who truly need care, marginalized subgroups should be recognized at the same rate.",
  ),
];

export function presetById(id: string): StakeholderPreset | undefined {
  return BUNDLED_PRESETS.find((p) => p.id === id);
}
