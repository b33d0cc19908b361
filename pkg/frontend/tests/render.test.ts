import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import { renderComparisonTable } from "../src/table.js";
import { renderFrontierChart } from "../src/chart.js";
import { METRIC_IDS } from "../src/types.js";
import type { Frontier, FrontierPoint } from "../src/types.js";

const frontier: Frontier = JSON.parse(
  readFileSync(new URL("./fixtures/frontier.json", import.meta.url), "utf8"),
);
const single: Frontier = JSON.parse(
  readFileSync(new URL("./fixtures/frontier_single.json", import.meta.url), "utf8"),
);

// Expected strings are built here with raw toFixed, independent of format.ts,
// so these tests verify the display contract rather than echo the formatter.
const expectAccuracy = (v: number) => (100 * v).toFixed(2) + "%";
const expectMetric = (v: number) => v.toFixed(4);

function tableRows(html: string): Array<{ hash: string; cells: string[] }> {
  const rows: Array<{ hash: string; cells: string[] }> = [];
  const rowRe = /<tr data-hash="([^"]+)">([\s\S]*?)<\/tr>/g;
  for (const m of html.matchAll(rowRe)) {
    const cells = [...m[2].matchAll(/<td[^>]*>([\s\S]*?)<\/td>/g)].map((c) => c[1]);
    rows.push({ hash: m[1], cells });
  }
  return rows;
}

function chartTitles(svg: string): Map<string, string> {
  const out = new Map<string, string>();
  const re = /<circle[^>]*data-hash="([^"]+)"[^>]*>\s*<title>([\s\S]*?)<\/title>/g;
  for (const m of svg.matchAll(re)) out.set(m[1], m[2]);
  return out;
}

describe("comparison table fidelity", () => {
  it("renders every accuracy and metric value byte-equal to the fixture", () => {
    const html = renderComparisonTable(frontier);
    const rows = tableRows(html);
    expect(rows.length).toBe(frontier.length);

    frontier.forEach((point, i) => {
      expect(rows[i].hash).toBe(point.config_hash);
      // columns: candidate, lambda, weights, seeds, accuracy, then 8 metrics
      const cells = rows[i].cells;
      expect(cells[1]).toBe(String(point.config.lambda));
      expect(cells[4]).toContain(expectAccuracy(point.test_accuracy as number));
      METRIC_IDS.forEach((mid, j) => {
        const raw = point.metric_values[mid];
        expect(raw).not.toBeNull();
        expect(cells[5 + j]).toBe(expectMetric(raw as number));
      });
    });
  });

  it("renders a one-row table for a single pinned point", () => {
    const html = renderComparisonTable(single);
    const rows = tableRows(html);
    expect(rows.length).toBe(1);
    expect(rows[0].cells[4]).toContain(expectAccuracy(single[0].test_accuracy as number));
  });

  it("shows an empty-state prompt with nothing pinned", () => {
    const html = renderComparisonTable([]);
    expect(html).toContain("empty-state");
    expect(html).toContain("Pin points");
  });

  it("highlights the accuracy difference when all metrics are equal", () => {
    const a = single[0];
    const b: FrontierPoint = JSON.parse(JSON.stringify(a));
    b.config_hash = "feedfacefeedface";
    b.test_accuracy = (a.test_accuracy as number) + 0.05;
    const html = renderComparisonTable([a, b]);
    expect(html).toContain("acc-diff");

    // metrics differing: no highlight even though accuracies differ
    const c: FrontierPoint = JSON.parse(JSON.stringify(b));
    c.config_hash = "0123456789abcdef";
    c.metric_values[METRIC_IDS[0]] = 0.5;
    expect(renderComparisonTable([a, c])).not.toContain("acc-diff");
  });

  it("keeps the comparison on formatted strings, not raw floats", () => {
    // values that differ below display precision compare as equal
    const a = single[0];
    const b: FrontierPoint = JSON.parse(JSON.stringify(a));
    b.config_hash = "feedfacefeedface";
    for (const mid of METRIC_IDS) {
      const v = b.metric_values[mid];
      if (v != null) b.metric_values[mid] = v + 1e-9;
    }
    b.test_accuracy = (a.test_accuracy as number) + 0.05;
    expect(renderComparisonTable([a, b])).toContain("acc-diff");
  });
});

describe("frontier chart fidelity", () => {
  const view = { x: "accuracy", y: "group.intersectional.outcome" };

  it("plots one click target per ok point with its values in the hover text", () => {
    const svg = renderFrontierChart(frontier, view);
    const titles = chartTitles(svg);
    expect(titles.size).toBe(frontier.length);

    for (const point of frontier) {
      const title = titles.get(point.config_hash);
      expect(title).toBeDefined();
      expect(title).toContain(`accuracy: ${expectAccuracy(point.test_accuracy as number)}`);
      const metric = point.metric_values["group.intersectional.outcome"] as number;
      expect(title).toContain(`group.intersectional.outcome: ${expectMetric(metric)}`);
      expect(title).toContain(`lambda ${point.config.lambda}`);
    }
  });

  it("labels axis extremes with formatted data values", () => {
    const svg = renderFrontierChart(frontier, view);
    const accs = frontier.map((p) => p.test_accuracy as number);
    const mets = frontier.map((p) => p.metric_values["group.intersectional.outcome"] as number);
    expect(svg).toContain(expectAccuracy(Math.min(...accs)));
    expect(svg).toContain(expectAccuracy(Math.max(...accs)));
    expect(svg).toContain(expectMetric(Math.min(...mets)));
    expect(svg).toContain(expectMetric(Math.max(...mets)));
  });

  it("supports metric-vs-metric axes", () => {
    const mm = { x: "individual.infra_marginal.eoo", y: "group.intersectional.eoo" };
    const svg = renderFrontierChart(frontier, mm);
    for (const point of frontier) {
      const v = point.metric_values["individual.infra_marginal.eoo"] as number;
      expect(svg).toContain(`individual.infra_marginal.eoo: ${expectMetric(v)}`);
      break; // spot check one payload value; per-point coverage is above
    }
    expect(svg).toContain('data-hash="');
  });

  it("marks pinned points and aggregates", () => {
    const agg = frontier.find((p) => p.aggregate) as FrontierPoint;
    const svg = renderFrontierChart(frontier, view, [agg.config_hash]);
    expect(svg).toMatch(new RegExp(`class="point pinned aggregate" data-hash="${agg.config_hash}"`));
  });

  it("renders a single-point frontier as one dot", () => {
    const svg = renderFrontierChart(single, view);
    expect(chartTitles(svg).size).toBe(1);
  });

  it("prompts to launch a sweep when the frontier is empty", () => {
    const html = renderFrontierChart([], view);
    expect(html).toContain("empty-state");
    expect(html).toContain("Launch a sweep");
  });

  it("skips failed points and says how many", () => {
    const broken: FrontierPoint = JSON.parse(JSON.stringify(single[0]));
    broken.config_hash = "deadbeefdeadbeef";
    broken.status = "failed";
    broken.test_accuracy = null;
    const svg = renderFrontierChart([...single, broken], view);
    expect(chartTitles(svg).size).toBe(1);
    expect(svg).toContain("1 point(s) not plottable");
  });
});
