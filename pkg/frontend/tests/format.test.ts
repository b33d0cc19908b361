import { describe, expect, it } from "vitest";
import {
  escapeHtml,
  formatAccuracy,
  formatLambda,
  formatMetric,
  formatSeeds,
  formatWeight,
} from "../src/format.js";

describe("fixed-precision display", () => {
  it("metrics use four decimals", () => {
    expect(formatMetric(0.95244481712)).toBe("0.9524");
    expect(formatMetric(1)).toBe("1.0000");
    expect(formatMetric(0)).toBe("0.0000");
    expect(formatMetric(null)).toBe("n/a");
    expect(formatMetric(undefined)).toBe("n/a");
  });

  it("accuracies are two-decimal percentages", () => {
    expect(formatAccuracy(0.8489)).toBe("84.89%");
    expect(formatAccuracy(0.5)).toBe("50.00%");
    expect(formatAccuracy(1)).toBe("100.00%");
    expect(formatAccuracy(null)).toBe("n/a");
  });

  it("lambdas echo the payload number", () => {
    expect(formatLambda(0)).toBe("0");
    expect(formatLambda(0.5)).toBe("0.5");
    expect(formatLambda(3)).toBe("3");
  });

  it("weights show two decimals", () => {
    expect(formatWeight(1)).toBe("1.00");
    expect(formatWeight(1 / 3)).toBe("0.33");
  });

  it("seeds join aggregates and fall back to the config seed", () => {
    expect(formatSeeds({ seeds: [0, 1], config: { seed: null } })).toBe("0, 1");
    expect(formatSeeds({ config: { seed: 3 } })).toBe("3");
    expect(formatSeeds({ config: { seed: null } })).toBe("");
  });

  it("escapes markup", () => {
    expect(escapeHtml('<a href="x">&</a>')).toBe("&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;");
  });
});
