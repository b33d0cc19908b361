import { METRIC_IDS } from "./types.js";
import type { MetricDescriptor } from "./types.js";
import type { StakeholderPanel } from "./state.js";
import { canSubmit } from "./state.js";
import { escapeHtml, formatWeight } from "./format.js";

/**
 * Control group for one stakeholder: eight weight sliders with plain-language
 * tooltips from the API's metric descriptors, plus a lambda input. Sliders
 * hold the normalized vector; readouts show two decimals. In read-only mode
 * (server unreachable, cached descriptors) all controls are disabled.
 */
export function renderWeightPanel(
  panel: StakeholderPanel,
  descriptors: MetricDescriptor[],
  readOnly = false,
): string {
  const disabled = readOnly ? " disabled" : "";
  const sliders = METRIC_IDS.map((mid, i) => {
    const d = descriptors.find((x) => x.id === mid);
    const tooltip = d ? `${d.name}: ${d.description}` : mid;
    const w = panel.weights[i];
    return `<label class="slider-row" title="${escapeHtml(tooltip)}">
      <span class="metric-name">${escapeHtml(d?.name ?? mid)}</span>
      <input type="range" min="0" max="1" step="0.01" value="${w}"
             data-stakeholder="${escapeHtml(panel.stakeholder)}" data-weight-idx="${i}"${disabled}>
      <span class="weight-readout">${formatWeight(w)}</span>
    </label>`;
  }).join("\n    ");

  const gate = canSubmit(panel);
  const blocked = !gate.ok;
  const note = readOnly
    ? '<p class="inline-error">server unreachable; showing cached descriptors read-only</p>'
    : blocked
      ? `<p class="inline-error">${escapeHtml(gate.message ?? "")}</p>`
      : "";

  return `<fieldset class="weight-panel" data-stakeholder="${escapeHtml(panel.stakeholder)}">
  <legend>${escapeHtml(panel.stakeholder)}</legend>
    ${sliders}
  <label class="lambda-row">
    <span>fairness strength (lambda)</span>
    <input type="number" min="0" step="0.1" value="${panel.lambda}"
           data-stakeholder="${escapeHtml(panel.stakeholder)}" data-lambda${disabled}>
  </label>
  ${note}
  <button type="button" data-launch="${escapeHtml(panel.stakeholder)}"${blocked || readOnly ? " disabled" : ""}>Launch sweep</button>
</fieldset>`;
}
