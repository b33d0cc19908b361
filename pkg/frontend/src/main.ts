import { ApiClient, ApiRequestError } from "./api.js";
import { renderFrontierChart } from "./chart.js";
import { renderComparisonTable } from "./table.js";
import { renderWeightPanel } from "./panel.js";
import { BUNDLED_PRESETS } from "./presets.js";
import { consensusPayload, lambdaSweepPayload } from "./payloads.js";
import { METRIC_IDS } from "./types.js";
import type { JobKind, MetricDescriptor, StakeholderPreset } from "./types.js";
import {
  addPanel,
  applyPreset,
  canSubmit,
  getPanel,
  loadFrontier,
  loadSession,
  newSession,
  pinnedPoints,
  saveSession,
  setLambda,
  setWeight,
  togglePin,
} from "./state.js";
import type { SessionState } from "./state.js";

const api = new ApiClient("");
let session: SessionState = newSession();
let descriptors: MetricDescriptor[] = [];
let presets: StakeholderPreset[] = BUNDLED_PRESETS;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(text: string, isError = false): void {
  const box = el<HTMLElement>("job-status");
  box.textContent = text;
  box.classList.toggle("error", isError);
}

function renderPanels(): void {
  el("panels").innerHTML = session.panels
    .map((p) => renderWeightPanel(p, descriptors, api.readOnly))
    .join("\n");
}

function renderChart(): void {
  const points = Object.values(session.frontiers).flat();
  el("chart").innerHTML = renderFrontierChart(points, session.comparison, session.pinned);
}

function renderComparison(): void {
  el("comparison").innerHTML = renderComparisonTable(pinnedPoints(session), descriptors);
}

function renderAll(): void {
  renderPanels();
  renderChart();
  renderComparison();
}

function fillAxisSelectors(): void {
  const options = ["accuracy", ...METRIC_IDS]
    .map((a) => `<option value="${a}">${a}</option>`)
    .join("");
  const x = el<HTMLSelectElement>("axis-x");
  const y = el<HTMLSelectElement>("axis-y");
  x.innerHTML = options;
  y.innerHTML = options;
  x.value = session.comparison.x;
  y.value = session.comparison.y;
}

function fillPresetSelector(): void {
  el<HTMLSelectElement>("preset-select").innerHTML =
    '<option value="">custom panel…</option>' +
    presets.map((p) => `<option value="${p.id}">${p.name} (${p.dataset})</option>`).join("");
}

/** Surface a server validation error next to the control it names. */
function showValidationError(err: ApiRequestError): void {
  if (err.field === "weights" || err.field === "lambda") {
    setStatus(`${err.field}: ${err.message}`, true);
  } else {
    setStatus(err.message, true);
  }
}

async function launchJob(kind: JobKind, payload: object): Promise<void> {
  const progress = el<HTMLProgressElement>("job-progress");
  try {
    const record = await api.submitJob(kind, payload);
    setStatus(`${kind} job ${record.id}: ${record.state}`);
    progress.hidden = false;
    const done = await api.pollJob(record.id, {
      onProgress: (r) => {
        progress.value = r.progress;
        setStatus(`${kind} job ${r.id}: ${r.state} (${Math.round(r.progress * 100)}%)`);
      },
    });
    const frontier = await api.getFrontier(done.id);
    loadFrontier(session, done.id, frontier);
    setStatus(`${kind} job ${done.id}: done, ${frontier.length} points loaded`);
    renderChart();
  } catch (err) {
    if (err instanceof ApiRequestError) showValidationError(err);
    else setStatus(err instanceof Error ? err.message : String(err), true);
  } finally {
    progress.hidden = true;
  }
}

function wireEvents(): void {
  el("panels").addEventListener("input", (ev) => {
    const input = ev.target as HTMLInputElement;
    const stakeholder = input.dataset.stakeholder;
    if (!stakeholder) return;
    const panel = getPanel(session, stakeholder);
    if (input.dataset.weightIdx !== undefined) {
      setWeight(panel, Number(input.dataset.weightIdx), Number(input.value));
      renderPanels();
    } else if (input.dataset.lambda !== undefined) {
      try {
        setLambda(panel, Number(input.value));
        renderPanels();
      } catch (err) {
        setStatus(err instanceof Error ? err.message : String(err), true);
      }
    }
  });

  el("panels").addEventListener("click", (ev) => {
    const button = (ev.target as HTMLElement).closest<HTMLButtonElement>("[data-launch]");
    if (!button) return;
    const panel = getPanel(session, button.dataset.launch as string);
    if (!session.dataset) {
      setStatus("pick a dataset before launching", true);
      return;
    }
    if (!canSubmit(panel).ok) return;
    void launchJob("lambda_sweep", lambdaSweepPayload(session.dataset, panel));
  });

  el("chart").addEventListener("click", (ev) => {
    const target = (ev.target as Element).closest("[data-hash]");
    if (!target) return;
    togglePin(session, target.getAttribute("data-hash") as string);
    renderChart();
    renderComparison();
  });

  el<HTMLSelectElement>("axis-x").addEventListener("change", (ev) => {
    session.comparison.x = (ev.target as HTMLSelectElement).value;
    renderChart();
  });
  el<HTMLSelectElement>("axis-y").addEventListener("change", (ev) => {
    session.comparison.y = (ev.target as HTMLSelectElement).value;
    renderChart();
  });

  el<HTMLSelectElement>("dataset-select").addEventListener("change", (ev) => {
    session.dataset = (ev.target as HTMLSelectElement).value || null;
  });

  el("add-panel").addEventListener("click", () => {
    const choice = el<HTMLSelectElement>("preset-select").value;
    const preset = presets.find((p) => p.id === choice);
    const name = preset
      ? preset.name
      : window.prompt("stakeholder name?", `panel ${session.panels.length + 1}`);
    if (!name) return;
    try {
      const panel = addPanel(session, name);
      if (preset) {
        applyPreset(session, panel, preset);
        el<HTMLSelectElement>("dataset-select").value = preset.dataset;
      }
      renderPanels();
    } catch (err) {
      setStatus(err instanceof Error ? err.message : String(err), true);
    }
  });

  el("launch-consensus").addEventListener("click", () => {
    if (session.panels.length < 2) {
      setStatus("consensus needs two stakeholder panels", true);
      return;
    }
    if (!session.dataset) {
      setStatus("pick a dataset before launching", true);
      return;
    }
    const [a, b] = session.panels;
    void launchJob("consensus_sweep", consensusPayload(session.dataset, a, b));
  });

  el("save-session").addEventListener("click", () => {
    const blob = new Blob([saveSession(session)], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "fairforge-session.json";
    a.click();
    URL.revokeObjectURL(a.href);
  });

  el<HTMLInputElement>("load-session").addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    try {
      session = loadSession(await file.text());
      fillAxisSelectors();
      renderAll();
      setStatus("session restored");
    } catch (err) {
      setStatus(err instanceof Error ? err.message : String(err), true);
    }
  });
}

async function init(): Promise<void> {
  fillAxisSelectors();
  try {
    descriptors = await api.getMetrics();
    const [datasets, serverPresets] = await Promise.all([api.getDatasets(), api.getStakeholders()]);
    presets = serverPresets;
    el<HTMLSelectElement>("dataset-select").innerHTML =
      '<option value="">choose dataset…</option>' +
      datasets.map((d) => `<option value="${d.name}">${d.name} (${d.rows} rows)</option>`).join("");
    setStatus("connected");
  } catch (err) {
    descriptors = api.cachedDescriptors ?? [];
    setStatus(
      "server unreachable; read-only mode with bundled presets" +
        (err instanceof Error ? ` (${err.message})` : ""),
      true,
    );
  }
  fillPresetSelector();
  wireEvents();
  renderAll();
}

// tests import the pure modules directly; only a real page boots the app
if (typeof document !== "undefined" && document.getElementById("panels")) {
  void init();
}
