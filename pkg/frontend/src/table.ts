import { METRIC_IDS } from "./types.js";
import type { FrontierPoint, MetricDescriptor } from "./types.js";
import {
  escapeHtml,
  formatAccuracy,
  formatLambda,
  formatMetric,
  formatSeeds,
  formatWeight,
} from "./format.js";

function weightsSummary(p: FrontierPoint): string {
  const active = Object.entries(p.config.weights).filter(([, w]) => w > 0);
  if (!active.length) return "none";
  return active.map(([mid, w]) => `${mid}=${formatWeight(w)}`).join(", ");
}

/**
 * Side-by-side comparison of pinned candidates: one row per candidate,
 * columns for lambda, weights, seeds, accuracy, and all eight metrics on the
 * reporting split. When every metric column is identical across candidates
 * but accuracies differ, the accuracy cells are highlighted, since that
 * difference is then the whole decision.
 */
export function renderComparisonTable(
  points: FrontierPoint[],
  descriptors?: MetricDescriptor[],
): string {
  if (points.length === 0) {
    return '<p class="empty-state">Pin points on the chart to compare candidates side by side.</p>';
  }

  const metricCells = points.map((p) => METRIC_IDS.map((mid) => formatMetric(p.metric_values[mid])));
  const accuracyCells = points.map((p) => formatAccuracy(p.test_accuracy));

  // as-displayed comparison: formatted strings, not raw floats
  const metricsAllEqual = METRIC_IDS.every((_, col) =>
    metricCells.every((row) => row[col] === metricCells[0][col]),
  );
  const accuraciesDiffer = accuracyCells.some((c) => c !== accuracyCells[0]);
  const highlightAccuracy = points.length > 1 && metricsAllEqual && accuraciesDiffer;

  const describe = (mid: string): string =>
    descriptors?.find((d) => d.id === mid)?.description ?? mid;

  const header =
    "<tr>" +
    "<th>candidate</th><th>lambda</th><th>weights</th><th>seeds</th>" +
    `<th${highlightAccuracy ? ' class="acc-diff"' : ""}>accuracy</th>` +
    METRIC_IDS.map((mid) => `<th title="${escapeHtml(describe(mid))}">${escapeHtml(mid)}</th>`).join(
      "",
    ) +
    "</tr>";

  const rows = points
    .map((p, i) => {
      const name = p.label ? `${p.label} (${p.config_hash})` : p.config_hash;
      const cells = [
        `<td class="candidate"><code>${escapeHtml(name)}</code>${p.aggregate ? " <span class=\"badge\">seed mean</span>" : ""}</td>`,
        `<td>${formatLambda(p.config.lambda)}</td>`,
        `<td class="weights">${escapeHtml(weightsSummary(p))}</td>`,
        `<td>${escapeHtml(formatSeeds(p)) || "-"}</td>`,
        `<td class="num${highlightAccuracy ? " acc-diff" : ""}">${accuracyCells[i]}</td>`,
        ...metricCells[i].map((c) => `<td class="num">${c}</td>`),
      ];
      return `<tr data-hash="${escapeHtml(p.config_hash)}">${cells.join("")}</tr>`;
    })
    .join("\n    ");

  return `<table class="comparison">
  <thead>${header}</thead>
  <tbody>
    ${rows}
  </tbody>
</table>`;
}
