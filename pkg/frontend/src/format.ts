/** Fixed-precision display formatting. These are the only transformations
 * applied to API numbers before they reach the screen, so fidelity tests can
 * compare rendered text against independently formatted payload values. */

/** Metric ratios render with four decimals: 0.9531 */
export function formatMetric(v: number | null | undefined): string {
  return v == null ? "n/a" : v.toFixed(4);
}

/** Accuracies render as percentages with two decimals: 84.89% */
export function formatAccuracy(v: number | null | undefined): string {
  return v == null ? "n/a" : (100 * v).toFixed(2) + "%";
}

/** Lambdas echo the JSON number itself; the server controls the grid. */
export function formatLambda(v: number): string {
  return String(v);
}

/** Slider readouts use two decimals; the underlying vector stays full precision. */
export function formatWeight(v: number): string {
  return v.toFixed(2);
}

export function formatSeeds(point: { seeds?: number[]; config: { seed: number | null } }): string {
  if (point.seeds && point.seeds.length) return point.seeds.join(", ");
  return point.config.seed == null ? "" : String(point.config.seed);
}

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
