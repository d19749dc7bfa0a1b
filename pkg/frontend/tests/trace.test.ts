import { describe, expect, it } from "vitest";

import { BINARY_BAND_COLOR, renderTrace, segmentColor } from "../src/trace.js";
import type { GraphDocument, SeriesPayload, VariableKind } from "../src/types.js";

function docOf(
  specs: { name: string; kind: VariableKind; categories?: string[]; latent?: boolean }[],
): GraphDocument {
  return {
    format_version: "1",
    variables: specs.map((s, id) => ({
      id,
      name: s.name,
      kind: s.kind,
      categories: s.categories ?? [],
      min: 0,
      max: s.kind === "categorical" ? (s.categories?.length ?? 1) - 1 : 1,
      offset: 0,
      memo: "",
      aggregation: "sum",
      latent: s.latent ?? false,
    })),
    edges: [],
    partitions: {},
    functionals: {},
    noise: {},
  };
}

function seriesOf(doc: GraphDocument, columns: Record<string, number[]>): SeriesPayload {
  const names = Object.keys(columns);
  const length = names.length > 0 ? columns[names[0]!]!.length : 0;
  return {
    meta: {
      variables: doc.variables
        .filter((v) => v.name in columns)
        .map((v) => ({ id: v.id, name: v.name, kind: v.kind, categories: v.categories })),
      length,
    },
    columns,
  };
}

describe("renderTrace", () => {
  it("draws continuous variables as a single line", () => {
    const doc = docOf([{ name: "temperature", kind: "continuous" }]);
    const svg = renderTrace(doc, seriesOf(doc, { temperature: [36.4, 36.6, 37.0, 36.8] }));
    expect(svg.match(/trace-continuous/g)).toHaveLength(1);
    expect(svg).not.toContain("trace-binary-band");
    expect(svg).not.toContain("trace-segment");
  });

  it("draws binary variables as red bands over the on-steps only", () => {
    const doc = docOf([{ name: "alarm", kind: "binary" }]);
    const svg = renderTrace(doc, seriesOf(doc, { alarm: [0, 1, 1, 0, 1, 0] }));
    // Two on-runs: steps 1-2 and step 4.
    expect(svg.match(/trace-binary-band/g)).toHaveLength(2);
    expect(svg).toContain(`fill="${BINARY_BAND_COLOR}"`);

    const quiet = renderTrace(doc, seriesOf(doc, { alarm: [0, 0, 0] }));
    expect(quiet).not.toContain("trace-binary-band");
  });

  it("draws categorical variables as one colored segment per run", () => {
    const doc = docOf([
      { name: "activities", kind: "categorical", categories: ["walking", "sitting", "sleeping"] },
    ]);
    const svg = renderTrace(doc, seriesOf(doc, { activities: [0, 0, 1, 2, 2, 0] }));
    const rects = svg.match(/trace-segment code-\d+/g) ?? [];
    expect(rects).toEqual([
      "trace-segment code-0",
      "trace-segment code-1",
      "trace-segment code-2",
      "trace-segment code-0",
    ]);
    expect(svg).toContain(`fill="${segmentColor(0)}"`);
    expect(svg).toContain(`fill="${segmentColor(1)}"`);
    expect(svg).toContain(`fill="${segmentColor(2)}"`);
    expect(new Set([segmentColor(0), segmentColor(1), segmentColor(2)]).size).toBe(3);
  });

  it("hides latent rows unless toggled on", () => {
    const doc = docOf([
      { name: "visible", kind: "continuous" },
      { name: "driver", kind: "continuous", latent: true },
    ]);
    const series = seriesOf(doc, { visible: [1, 2, 3], driver: [0.5, 0.4, 0.3] });
    const hidden = renderTrace(doc, series);
    expect(hidden).toContain("visible");
    expect(hidden).not.toContain("driver");

    const shown = renderTrace(doc, series, { showLatent: true });
    expect(shown).toContain("driver (latent)");
    expect(shown.match(/trace-continuous/g)).toHaveLength(2);
  });

  it("skips latent columns the run never recorded", () => {
    const doc = docOf([
      { name: "visible", kind: "continuous" },
      { name: "driver", kind: "continuous", latent: true },
    ]);
    const series = seriesOf(doc, { visible: [1, 2, 3] });
    const svg = renderTrace(doc, series, { showLatent: true });
    expect(svg).not.toContain("driver");
  });

  it("renders the same bytes for the same inputs", () => {
    const doc = docOf([
      { name: "temperature", kind: "continuous" },
      { name: "alarm", kind: "binary" },
      { name: "activities", kind: "categorical", categories: ["a", "b", "c"] },
    ]);
    const series = seriesOf(doc, {
      temperature: [1, 2, 1.5, 1.25],
      alarm: [0, 1, 0, 1],
      activities: [0, 1, 2, 1],
    });
    expect(renderTrace(doc, series)).toBe(renderTrace(doc, series));
  });
});
