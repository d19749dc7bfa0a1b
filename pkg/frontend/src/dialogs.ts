// Dialog form models. Each submit turns a validated form into edit events;
// nothing touches the document until the server accepts the PATCH.

import type {
  Aggregation,
  EditEventBody,
  GraphDocument,
  VariableKind,
} from "./types.js";

export interface FieldError {
  field: string;
  message: string;
}

export interface NodeForm {
  name: string;
  kind: VariableKind;
  /** Category labels, categorical only; codes are assigned by position. */
  categories: string[];
  /** Raw field text so the dialog can surface parse errors in place. */
  min: string;
  max: string;
  offset: string;
  memo: string;
  aggregation: Aggregation;
  latent: boolean;
}

export function emptyNodeForm(kind: VariableKind): NodeForm {
  return {
    name: "",
    kind,
    categories: [],
    min: "0",
    max: "1",
    offset: "0",
    memo: "",
    aggregation: "sum",
    latent: false,
  };
}

function parseNumber(text: string): number | null {
  const trimmed = text.trim();
  if (trimmed === "") {
    return null;
  }
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : null;
}

/**
 * Inline checks mirroring the server's 400 findings, so a form that passes
 * here is expected to commit. Submit stays disabled while any remain.
 */
export function validateNodeForm(form: NodeForm, doc?: GraphDocument): FieldError[] {
  const errors: FieldError[] = [];
  if (form.name.trim() === "") {
    errors.push({ field: "name", message: "name must not be empty" });
  } else if (doc && doc.variables.some((v) => v.name === form.name.trim())) {
    errors.push({ field: "name", message: `name "${form.name.trim()}" is already in use` });
  }

  if (form.kind === "categorical") {
    const labels = form.categories.map((c) => c.trim());
    if (labels.length === 0 || labels.some((c) => c === "")) {
      errors.push({ field: "categories", message: "add at least one item; items must not be blank" });
    }
    if (new Set(labels).size !== labels.length) {
      errors.push({ field: "categories", message: "items must be distinct" });
    }
  }

  if (form.kind === "continuous") {
    const min = parseNumber(form.min);
    const max = parseNumber(form.max);
    const offset = parseNumber(form.offset);
    if (min === null) {
      errors.push({ field: "min", message: "minimum must be a number" });
    }
    if (max === null) {
      errors.push({ field: "max", message: "maximum must be a number" });
    }
    if (min !== null && max !== null && min >= max) {
      errors.push({ field: "max", message: "minimum must be below maximum" });
    }
    if (offset === null) {
      errors.push({ field: "offset", message: "offset must be a number" });
    } else if (min !== null && max !== null && min < max && (offset < min || offset > max)) {
      errors.push({ field: "offset", message: "offset must lie inside the range" });
    }
    if (form.aggregation === "vote") {
      errors.push({ field: "aggregation", message: "vote aggregation needs a discrete variable" });
    }
  }

  return errors;
}

export function canSubmitNodeForm(form: NodeForm, doc?: GraphDocument): boolean {
  return validateNodeForm(form, doc).length === 0;
}

/** Build the add_variable event for a validated node form. */
export function nodeEditEvent(form: NodeForm, doc?: GraphDocument): EditEventBody {
  const errors = validateNodeForm(form, doc);
  if (errors.length > 0) {
    throw new Error(errors.map((e) => `${e.field}: ${e.message}`).join("; "));
  }
  const spec: Record<string, unknown> = {
    name: form.name.trim(),
    kind: form.kind,
    memo: form.memo,
    aggregation: form.aggregation,
    latent: form.latent,
  };
  if (form.kind === "categorical") {
    // Codes follow item order; the range defaults to 0..K-1 server-side.
    spec.categories = form.categories.map((c) => c.trim());
  }
  if (form.kind === "continuous") {
    spec.min = parseNumber(form.min);
    spec.max = parseNumber(form.max);
    spec.offset = parseNumber(form.offset);
  }
  return { action: "add_variable", payload: { spec } };
}

export type FunctionalTemplate =
  | { kind: "identity" }
  | { kind: "linear_window"; coeffs: number[]; intercept: number };

export interface EdgeForm {
  source: number;
  target: number;
  /** Lag spinner value; 0 is contemporaneous, anything else looks back. */
  lag: number;
  /** Template picker state; empty means the plain pass-through default. */
  template: FunctionalTemplate | null;
  /** Editor logins become expert provenance on the edge. */
  user: string;
}

export function validateEdgeForm(form: EdgeForm, doc: GraphDocument): FieldError[] {
  const errors: FieldError[] = [];
  const ids = new Set(doc.variables.map((v) => v.id));
  if (!ids.has(form.source)) {
    errors.push({ field: "source", message: `no variable with id ${form.source}` });
  }
  if (!ids.has(form.target)) {
    errors.push({ field: "target", message: `no variable with id ${form.target}` });
  }
  if (!Number.isInteger(form.lag) || form.lag < 0) {
    errors.push({ field: "lag", message: "lag must be a whole number of steps, 0 or more" });
  }
  if (form.lag === 0 && form.source === form.target) {
    errors.push({ field: "lag", message: "a self-loop needs lag 1 or more" });
  }
  if (form.template?.kind === "linear_window") {
    if (form.template.coeffs.length === 0 || form.template.coeffs.some((c) => !Number.isFinite(c))) {
      errors.push({ field: "coeffs", message: "give at least one finite coefficient" });
    }
    if (!Number.isFinite(form.template.intercept)) {
      errors.push({ field: "intercept", message: "intercept must be a number" });
    }
  }
  return errors;
}

export function canSubmitEdgeForm(form: EdgeForm, doc: GraphDocument): boolean {
  return validateEdgeForm(form, doc).length === 0;
}

/** Pick a functional name not yet taken by the document registry. */
function freshFunctionalId(doc: GraphDocument, source: number, target: number, lag: number): string {
  const base = `lw-${source}-${target}-${lag}`;
  if (!(base in doc.functionals)) {
    return base;
  }
  let n = 2;
  while (`${base}-${n}` in doc.functionals) {
    n += 1;
  }
  return `${base}-${n}`;
}

/**
 * Build the events for a validated edge form. An empty template collapses
 * to the pass-through default and needs a single add_edge; a parametrized
 * template first registers the functional, then draws the edge with it.
 */
export function edgeEditEvents(form: EdgeForm, doc: GraphDocument): EditEventBody[] {
  const errors = validateEdgeForm(form, doc);
  if (errors.length > 0) {
    throw new Error(errors.map((e) => `${e.field}: ${e.message}`).join("; "));
  }
  const actor = { kind: "expert", name: form.user };
  const template = form.template ?? { kind: "identity" as const };
  if (template.kind === "identity") {
    return [
      {
        action: "add_edge",
        payload: { source: form.source, target: form.target, lag: form.lag },
        actor,
      },
    ];
  }
  const fid = freshFunctionalId(doc, form.source, form.target, form.lag);
  return [
    {
      action: "set_functional",
      payload: {
        id: fid,
        spec: {
          kind: "linear_window",
          coeffs: [template.coeffs],
          intercept: template.intercept,
        },
      },
      actor,
    },
    {
      action: "add_edge",
      payload: { source: form.source, target: form.target, lag: form.lag, functional: fid },
      actor,
    },
  ];
}
