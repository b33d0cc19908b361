import { axisValue } from "./types.js";
import type { ComparisonView } from "./state.js";
import type { AxisKey, FrontierPoint } from "./types.js";
import {
  escapeHtml,
  formatAccuracy,
  formatLambda,
  formatMetric,
  formatSeeds,
  formatWeight,
} from "./format.js";

const WIDTH = 640;
const HEIGHT = 400;
const MARGIN = { left: 64, right: 20, top: 20, bottom: 48 };

function axisFormat(axis: AxisKey, v: number | null): string {
  return axis === "accuracy" ? formatAccuracy(v) : formatMetric(v);
}

function scale(v: number, lo: number, hi: number, outLo: number, outHi: number): number {
  if (hi === lo) return (outLo + outHi) / 2;
  return outLo + ((v - lo) / (hi - lo)) * (outHi - outLo);
}

/** Hover text: the full configuration plus the two displayed values. */
function pointTitle(p: FrontierPoint, view: ComparisonView): string {
  const weights = Object.entries(p.config.weights)
    .filter(([, w]) => w > 0)
    .map(([mid, w]) => `${mid}=${formatWeight(w)}`)
    .join(", ");
  const lines = [
    `config ${p.config_hash}${p.aggregate ? " (seed mean)" : ""}`,
    `lambda ${formatLambda(p.config.lambda)}  seed ${formatSeeds(p) || "-"}`,
    `epochs ${p.config.epochs}  learning rate ${p.config.learning_rate}`,
    `weights ${weights || "none"}`,
    `${view.x}: ${axisFormat(view.x, axisValue(p, view.x))}`,
    `${view.y}: ${axisFormat(view.y, axisValue(p, view.y))}`,
  ];
  return lines.join("\n");
}

/**
 * Scatter of frontier points as an SVG string. Click targets carry
 * data-hash so the page can pin candidates; hovering a point shows its
 * full config. Returns an empty-state prompt when nothing is plottable.
 */
export function renderFrontierChart(
  points: FrontierPoint[],
  view: ComparisonView,
  pinned: string[] = [],
): string {
  const plottable = points.filter(
    (p) => p.status === "ok" && axisValue(p, view.x) != null && axisValue(p, view.y) != null,
  );
  const skipped = points.length - plottable.length;

  if (plottable.length === 0) {
    return '<div class="empty-state">No frontier points to plot yet. Launch a sweep to explore the trade-off.</div>';
  }

  const xs = plottable.map((p) => axisValue(p, view.x) as number);
  const ys = plottable.map((p) => axisValue(p, view.y) as number);
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  // pad so extremes do not sit on the frame; keep a visible span for flat data
  const xPad = (xHi - xLo || Math.abs(xHi) || 1) * 0.06;
  const yPad = (yHi - yLo || Math.abs(yHi) || 1) * 0.06;
  xLo -= xPad;
  xHi += xPad;
  yLo -= yPad;
  yHi += yPad;

  const plotLeft = MARGIN.left;
  const plotRight = WIDTH - MARGIN.right;
  const plotTop = MARGIN.top;
  const plotBottom = HEIGHT - MARGIN.bottom;

  const circles = plottable
    .map((p) => {
      const cx = scale(axisValue(p, view.x) as number, xLo, xHi, plotLeft, plotRight);
      const cy = scale(axisValue(p, view.y) as number, yLo, yHi, plotBottom, plotTop);
      const classes = ["point"];
      if (pinned.includes(p.config_hash)) classes.push("pinned");
      if (p.aggregate) classes.push("aggregate");
      return (
        `<circle class="${classes.join(" ")}" data-hash="${escapeHtml(p.config_hash)}" ` +
        `cx="${cx.toFixed(1)}" cy="${cy.toFixed(1)}" r="${p.aggregate ? 7 : 5}">` +
        `<title>${escapeHtml(pointTitle(p, view))}</title></circle>`
      );
    })
    .join("\n    ");

  // edge labels are the extreme data values themselves, shown in display form
  const xMinLabel = axisFormat(view.x, Math.min(...xs));
  const xMaxLabel = axisFormat(view.x, Math.max(...xs));
  const yMinLabel = axisFormat(view.y, Math.min(...ys));
  const yMaxLabel = axisFormat(view.y, Math.max(...ys));

  const skippedNote = skipped
    ? `<text class="note" x="${plotRight}" y="${plotTop - 6}" text-anchor="end">${skipped} point(s) not plottable</text>`
    : "";

  return `<svg class="frontier-chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="frontier scatter">
  <rect class="plot-bg" x="${plotLeft}" y="${plotTop}" width="${plotRight - plotLeft}" height="${plotBottom - plotTop}"/>
  <line class="axis" x1="${plotLeft}" y1="${plotBottom}" x2="${plotRight}" y2="${plotBottom}"/>
  <line class="axis" x1="${plotLeft}" y1="${plotTop}" x2="${plotLeft}" y2="${plotBottom}"/>
  <text class="axis-label" x="${(plotLeft + plotRight) / 2}" y="${HEIGHT - 8}" text-anchor="middle">${escapeHtml(view.x)}</text>
  <text class="axis-label" x="14" y="${(plotTop + plotBottom) / 2}" text-anchor="middle" transform="rotate(-90 14 ${(plotTop + plotBottom) / 2})">${escapeHtml(view.y)}</text>
  <text class="tick" x="${scale(Math.min(...xs), xLo, xHi, plotLeft, plotRight).toFixed(1)}" y="${plotBottom + 16}" text-anchor="middle">${xMinLabel}</text>
  <text class="tick" x="${scale(Math.max(...xs), xLo, xHi, plotLeft, plotRight).toFixed(1)}" y="${plotBottom + 16}" text-anchor="middle">${xMaxLabel}</text>
  <text class="tick" x="${plotLeft - 6}" y="${scale(Math.min(...ys), yLo, yHi, plotBottom, plotTop).toFixed(1)}" text-anchor="end">${yMinLabel}</text>
  <text class="tick" x="${plotLeft - 6}" y="${scale(Math.max(...ys), yLo, yHi, plotBottom, plotTop).toFixed(1)}" text-anchor="end">${yMaxLabel}</text>
  ${skippedNote}
    ${circles}
</svg>`;
}
