// Canvas state and rendering. Everything drawn here derives from the last
// fetched document plus local layout; the canvas holds no causal data of
// its own, so redrawing after a fresh fetch reproduces the same picture.

import { forceLayout, type Point } from "./layout.js";
import type {
  GraphDocument,
  SuggestionObj,
  SuggestionSetObj,
  VariableKind,
} from "./types.js";

/** One-letter marker next to the node label. */
const KIND_BADGES: Record<VariableKind, string> = {
  continuous: "C",
  binary: "B",
  categorical: "K",
};

const ALGORITHM_PALETTE = [
  "#1f77b4",
  "#2ca02c",
  "#9467bd",
  "#e377c2",
  "#17becf",
  "#bcbd22",
];

/** Stable per-algorithm color so overlays stay readable across refreshes. */
export function algorithmColor(name: string): string {
  let hash = 0;
  for (let i = 0; i < name.length; i += 1) {
    hash = (hash * 31 + name.charCodeAt(i)) >>> 0;
  }
  return ALGORITHM_PALETTE[hash % ALGORITHM_PALETTE.length]!;
}

export interface NodeView {
  id: number;
  name: string;
  kind: VariableKind;
  kindBadge: string;
  /** "code label" pairs, categorical only, in code order. */
  codes: string[];
  latent: boolean;
  position: Point;
}

export interface EdgeView {
  source: number;
  target: number;
  lag: number;
  lagBadge: string;
  functional: string;
  /** Accepted suggestions keep their algorithm name as a badge. */
  algorithmBadge: string | null;
}

export interface OverlayEdge {
  suggestionId: string;
  source: number;
  target: number;
  lag: number;
  lagBadge: string;
  algorithm: string;
  color: string;
  score: number | null;
}

export interface PendingDialog {
  kind: "node" | "edge";
}

/**
 * View model for the graph canvas: node positions, selection, pending
 * dialog, current version, and the dashed suggestion overlay.
 */
export class CanvasModel {
  readonly layoutSeed: number;
  version = -1;
  selection: number | null = null;
  pendingDialog: PendingDialog | null = null;
  private document: GraphDocument | null = null;
  private suggestionSets: Record<string, SuggestionSetObj> = {};
  private positionCache = new Map<number, Point>();
  private positionKey = "";

  constructor(layoutSeed = 7) {
    this.layoutSeed = layoutSeed;
  }

  /** Replace canvas state with a freshly fetched document. */
  setDocument(document: GraphDocument, version: number): void {
    this.document = document;
    this.version = version;
    if (this.selection !== null && !document.variables.some((v) => v.id === this.selection)) {
      this.selection = null;
    }
    this.refreshPositions();
  }

  setSuggestions(sets: Record<string, SuggestionSetObj>): void {
    this.suggestionSets = sets;
  }

  getDocument(): GraphDocument | null {
    return this.document;
  }

  private refreshPositions(): void {
    const doc = this.document;
    if (doc === null) {
      this.positionCache = new Map();
      this.positionKey = "";
      return;
    }
    const ids = doc.variables.map((v) => v.id);
    const links = doc.edges.map((e) => ({ source: e.source, target: e.target }));
    const key = JSON.stringify([ids, links.map((l) => [l.source, l.target])]);
    if (key !== this.positionKey) {
      this.positionCache = forceLayout(ids, links, { seed: this.layoutSeed });
      this.positionKey = key;
    }
  }

  positions(): Map<number, Point> {
    return this.positionCache;
  }

  nodes(): NodeView[] {
    const doc = this.document;
    if (doc === null) {
      return [];
    }
    return doc.variables.map((v) => ({
      id: v.id,
      name: v.name,
      kind: v.kind,
      kindBadge: KIND_BADGES[v.kind],
      codes: v.categories.map((label, code) => `${code} ${label}`),
      latent: v.latent,
      position: this.positionCache.get(v.id) ?? { x: 0, y: 0 },
    }));
  }

  edges(): EdgeView[] {
    const doc = this.document;
    if (doc === null) {
      return [];
    }
    return doc.edges.map((e) => ({
      source: e.source,
      target: e.target,
      lag: e.lag,
      lagBadge: String(e.lag),
      functional: e.functional,
      algorithmBadge: e.provenance.kind === "algorithm" ? e.provenance.name : null,
    }));
  }

  /** Pending suggestions as dashed ghost edges, colored per algorithm. */
  overlay(): OverlayEdge[] {
    const doc = this.document;
    if (doc === null) {
      return [];
    }
    const byName = new Map(doc.variables.map((v) => [v.name, v.id]));
    const out: OverlayEdge[] = [];
    for (const setId of Object.keys(this.suggestionSets).sort()) {
      const set = this.suggestionSets[setId]!;
      for (const s of set.suggestions) {
        if (s.status !== "pending") {
          continue;
        }
        const source = byName.get(s.source);
        const target = byName.get(s.target);
        if (source === undefined || target === undefined) {
          continue;
        }
        out.push({
          suggestionId: s.id,
          source,
          target,
          lag: s.lag,
          lagBadge: String(s.lag),
          algorithm: set.algorithm,
          color: algorithmColor(set.algorithm),
          score: s.score,
        });
      }
    }
    return out;
  }

  pendingSuggestions(): { setId: string; suggestion: SuggestionObj; algorithm: string }[] {
    const out: { setId: string; suggestion: SuggestionObj; algorithm: string }[] = [];
    for (const setId of Object.keys(this.suggestionSets).sort()) {
      const set = this.suggestionSets[setId]!;
      for (const s of set.suggestions) {
        out.push({ setId, suggestion: s, algorithm: set.algorithm });
      }
    }
    return out;
  }
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function edgeLine(a: Point, b: Point, cls: string, color: string, dashed: boolean, badge: string): string {
  const midX = (a.x + b.x) / 2;
  const midY = (a.y + b.y) / 2;
  const dash = dashed ? ' stroke-dasharray="6 4"' : "";
  return (
    `<line class="${cls}" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" ` +
    `stroke="${color}" stroke-width="1.5" marker-end="url(#arrow)"${dash}/>` +
    `<text class="lag-badge" x="${midX}" y="${midY - 4}" font-size="10">${escapeXml(badge)}</text>`
  );
}

/**
 * Render the model to SVG markup. Deterministic for a given document,
 * suggestion state, and layout seed; the DOM layer only swaps innerHTML.
 */
export function renderCanvasSvg(model: CanvasModel, width = 800, height = 600): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="graph-canvas">`,
  );
  parts.push(
    '<defs><marker id="arrow" viewBox="0 0 10 10" refX="22" refY="5" ' +
      'markerWidth="7" markerHeight="7" orient="auto-start-reverse">' +
      '<path d="M 0 0 L 10 5 L 0 10 z" fill="#555"/></marker></defs>',
  );
  const positions = model.positions();
  for (const edge of model.edges()) {
    const a = positions.get(edge.source);
    const b = positions.get(edge.target);
    if (!a || !b) {
      continue;
    }
    const badge =
      edge.algorithmBadge === null ? edge.lagBadge : `${edge.lagBadge} ${edge.algorithmBadge}`;
    parts.push(edgeLine(a, b, "edge", "#555", false, badge));
  }
  for (const ghost of model.overlay()) {
    const a = positions.get(ghost.source);
    const b = positions.get(ghost.target);
    if (!a || !b) {
      continue;
    }
    parts.push(
      edgeLine(a, b, "suggestion-edge", ghost.color, true, `${ghost.lagBadge} ${ghost.algorithm}?`),
    );
  }
  for (const node of model.nodes()) {
    const selected = model.selection === node.id;
    const stroke = selected ? "#d62728" : "#333";
    const fill = node.latent ? "#f0f0f0" : "#fff";
    parts.push(
      `<g class="node" data-id="${node.id}">` +
        `<circle cx="${node.position.x}" cy="${node.position.y}" r="18" fill="${fill}" stroke="${stroke}" stroke-width="2"/>` +
        `<text x="${node.position.x}" y="${node.position.y - 24}" text-anchor="middle" font-size="12">${escapeXml(node.name)}</text>` +
        `<text class="kind-badge" x="${node.position.x}" y="${node.position.y + 4}" text-anchor="middle" font-size="11">${node.kindBadge}</text>` +
        "</g>",
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
