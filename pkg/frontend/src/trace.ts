// Trace rendering for simulated series. Conventions: continuous variables
// draw as lines, binary ones as red step bands, categorical ones as
// colored segments keyed by code. Latent rows stay hidden until toggled.

import type { GraphDocument, SeriesPayload, VariableKind } from "./types.js";

export const BINARY_BAND_COLOR = "#d62728";

const SEGMENT_PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
  "#bcbd22",
  "#17becf",
];

export function segmentColor(code: number): string {
  return SEGMENT_PALETTE[((code % SEGMENT_PALETTE.length) + SEGMENT_PALETTE.length) % SEGMENT_PALETTE.length]!;
}

export interface TraceOptions {
  width?: number;
  rowHeight?: number;
  showLatent?: boolean;
}

interface TraceRow {
  name: string;
  kind: VariableKind;
  categories: string[];
  latent: boolean;
  values: number[];
}

function fixed(value: number): string {
  return Number(value.toFixed(2)).toString();
}

function rowsFor(doc: GraphDocument, series: SeriesPayload, showLatent: boolean): TraceRow[] {
  const latentByName = new Map(doc.variables.map((v) => [v.name, v.latent]));
  const rows: TraceRow[] = [];
  for (const variable of series.meta.variables) {
    const values = series.columns[variable.name];
    if (values === undefined) {
      continue;
    }
    const latent = latentByName.get(variable.name) ?? false;
    if (latent && !showLatent) {
      continue;
    }
    rows.push({
      name: variable.name,
      kind: variable.kind,
      categories: variable.categories,
      latent,
      values,
    });
  }
  return rows;
}

function continuousPath(values: number[], x0: number, plotWidth: number, y0: number, plotHeight: number): string {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const step = values.length > 1 ? plotWidth / (values.length - 1) : 0;
  const points = values
    .map((v, t) => {
      const x = x0 + t * step;
      const y = y0 + plotHeight - ((v - lo) / (hi - lo)) * plotHeight;
      return `${fixed(x)},${fixed(y)}`;
    })
    .join(" ");
  return `<polyline class="trace-continuous" fill="none" stroke="#1f77b4" stroke-width="1.2" points="${points}"/>`;
}

/** Group equal neighboring values into [start, end) runs. */
function runsOf(values: number[]): { code: number; start: number; end: number }[] {
  const runs: { code: number; start: number; end: number }[] = [];
  for (let t = 0; t < values.length; t += 1) {
    const code = values[t]!;
    const current = runs[runs.length - 1];
    if (current !== undefined && current.code === code) {
      current.end = t + 1;
    } else {
      runs.push({ code, start: t, end: t + 1 });
    }
  }
  return runs;
}

function binaryBand(values: number[], x0: number, plotWidth: number, y0: number, plotHeight: number): string {
  const step = values.length > 0 ? plotWidth / values.length : 0;
  const parts: string[] = [];
  for (const run of runsOf(values)) {
    if (run.code === 0) {
      continue;
    }
    const x = x0 + run.start * step;
    const w = (run.end - run.start) * step;
    parts.push(
      `<rect class="trace-binary-band" x="${fixed(x)}" y="${fixed(y0)}" ` +
        `width="${fixed(w)}" height="${fixed(plotHeight)}" fill="${BINARY_BAND_COLOR}" fill-opacity="0.8"/>`,
    );
  }
  return parts.join("");
}

function categoricalSegments(
  values: number[],
  x0: number,
  plotWidth: number,
  y0: number,
  plotHeight: number,
): string {
  const step = values.length > 0 ? plotWidth / values.length : 0;
  return runsOf(values)
    .map((run) => {
      const x = x0 + run.start * step;
      const w = (run.end - run.start) * step;
      return (
        `<rect class="trace-segment code-${run.code}" x="${fixed(x)}" y="${fixed(y0)}" ` +
        `width="${fixed(w)}" height="${fixed(plotHeight)}" fill="${segmentColor(run.code)}"/>`
      );
    })
    .join("");
}

/**
 * Render a stacked per-variable trace panel to SVG markup. Pure: the same
 * document, series, and options always produce the same bytes.
 */
export function renderTrace(doc: GraphDocument, series: SeriesPayload, options: TraceOptions = {}): string {
  const width = options.width ?? 800;
  const rowHeight = options.rowHeight ?? 70;
  const rows = rowsFor(doc, series, options.showLatent ?? false);
  const labelWidth = 120;
  const plotWidth = width - labelWidth - 20;
  const height = Math.max(rows.length * rowHeight, rowHeight);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="trace-view">`,
  );
  rows.forEach((row, i) => {
    const y0 = i * rowHeight + 12;
    const plotHeight = rowHeight - 24;
    const label = row.latent ? `${row.name} (latent)` : row.name;
    parts.push(
      `<text class="trace-label" x="8" y="${y0 + plotHeight / 2}" font-size="12">${label}</text>`,
    );
    parts.push(
      `<rect class="trace-frame" x="${labelWidth}" y="${y0}" width="${plotWidth}" height="${plotHeight}" ` +
        'fill="none" stroke="#ddd"/>',
    );
    if (row.kind === "continuous") {
      parts.push(continuousPath(row.values, labelWidth, plotWidth, y0, plotHeight));
    } else if (row.kind === "binary") {
      parts.push(binaryBand(row.values, labelWidth, plotWidth, y0, plotHeight));
    } else {
      parts.push(categoricalSegments(row.values, labelWidth, plotWidth, y0, plotHeight));
    }
  });
  parts.push("</svg>");
  return parts.join("");
}
