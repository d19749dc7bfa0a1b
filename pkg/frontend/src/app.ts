// Browser entry point. Wires the store, canvas, dialogs, suggestion panel,
// simulate panel, and trace view to the DOM. All causal state flows
// server -> store -> render; the DOM layer only reads the view models.

import { ApiError, ServiceClient } from "./api.js";
import { CanvasModel, renderCanvasSvg } from "./canvas.js";
import {
  canSubmitEdgeForm,
  canSubmitNodeForm,
  edgeEditEvents,
  emptyNodeForm,
  nodeEditEvent,
  validateEdgeForm,
  validateNodeForm,
  type EdgeForm,
  type NodeForm,
} from "./dialogs.js";
import { EditorStore } from "./store.js";
import { renderTrace } from "./trace.js";
import type {
  Aggregation,
  InterventionObj,
  SeriesPayload,
  SimulateRequest,
  VariableKind,
} from "./types.js";

const LAYOUT_SEED = 7;
const LOG_POLL_MS = 2000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function readNumber(input: HTMLInputElement, fallback: number): number {
  const value = Number(input.value);
  return Number.isFinite(value) ? value : fallback;
}

class App {
  private readonly client: ServiceClient;
  private readonly canvas = new CanvasModel(LAYOUT_SEED);
  private store: EditorStore | null = null;
  private lastSeries: SeriesPayload | null = null;
  private showLatent = false;
  private user = "editor";

  constructor(baseUrl: string) {
    this.client = new ServiceClient(baseUrl);
  }

  async start(): Promise<void> {
    this.user = el<HTMLInputElement>("user-name").value || "editor";
    await this.refreshGraphList();
    this.bindToolbar();
    window.setInterval(() => {
      void this.pollLog();
    }, LOG_POLL_MS);
  }

  private banner(message: string | null): void {
    const node = el<HTMLDivElement>("banner");
    node.textContent = message ?? "";
    node.style.display = message === null ? "none" : "block";
  }

  private async refreshGraphList(): Promise<void> {
    const select = el<HTMLSelectElement>("graph-select");
    const graphs = await this.client.listGraphs();
    select.innerHTML = "";
    for (const g of graphs) {
      const option = document.createElement("option");
      option.value = g.id;
      option.textContent = `${g.id} (${g.variables} vars, ${g.edges} edges, v${g.version})`;
      select.appendChild(option);
    }
    if (graphs.length > 0) {
      await this.openGraph(select.value);
    }
  }

  private async openGraph(graphId: string): Promise<void> {
    this.store = new EditorStore(this.client, graphId, {
      onConflict: async ({ currentVersion }) => {
        const retry = window.confirm(
          `Someone else edited this graph (now at version ${currentVersion}). ` +
            "The canvas has been refreshed. Submit your change on top of theirs?",
        );
        return retry ? "retry" : "abort";
      },
      onChange: () => this.render(),
    });
    await this.store.refresh();
  }

  private render(): void {
    const store = this.store;
    if (store === null || store.document === null) {
      return;
    }
    this.canvas.setDocument(store.document, store.version);
    this.canvas.setSuggestions(store.suggestionSets);
    el<HTMLDivElement>("canvas").innerHTML = renderCanvasSvg(this.canvas);
    el<HTMLSpanElement>("version-label").textContent = `version ${store.version}`;
    this.syncEdgeEndpoints();
    this.renderSuggestionPanel();
    this.renderTracePanel();
    this.banner(store.lastError);
  }

  /** Keep the edge dialog's endpoint pickers in step with the document. */
  private syncEdgeEndpoints(): void {
    const doc = this.store?.document;
    if (!doc) {
      return;
    }
    for (const id of ["edge-source", "edge-target"]) {
      const select = el<HTMLSelectElement>(id);
      const previous = select.value;
      select.innerHTML = "";
      for (const variable of doc.variables) {
        const option = document.createElement("option");
        option.value = String(variable.id);
        option.textContent = variable.name;
        select.appendChild(option);
      }
      if ([...select.options].some((o) => o.value === previous)) {
        select.value = previous;
      }
    }
  }

  private renderSuggestionPanel(): void {
    const store = this.store;
    if (store === null) {
      return;
    }
    const list = el<HTMLUListElement>("suggestion-list");
    list.innerHTML = "";
    for (const { suggestion, algorithm } of this.canvas.pendingSuggestions()) {
      const item = document.createElement("li");
      const label = document.createElement("span");
      const score = suggestion.score === null ? "" : ` (${suggestion.score.toFixed(2)})`;
      label.textContent = `${suggestion.source} -> ${suggestion.target} @ ${suggestion.lag} [${algorithm}]${score} ${suggestion.status}`;
      item.appendChild(label);
      if (suggestion.status === "pending") {
        const accept = document.createElement("button");
        accept.textContent = "accept";
        accept.addEventListener("click", () => {
          void store.acceptSuggestion(suggestion.id).catch(() => undefined);
        });
        const reject = document.createElement("button");
        reject.textContent = "reject";
        reject.addEventListener("click", () => {
          void store.rejectSuggestion(suggestion.id).catch(() => undefined);
        });
        item.appendChild(accept);
        item.appendChild(reject);
      }
      list.appendChild(item);
    }
  }

  private renderTracePanel(): void {
    const store = this.store;
    const target = el<HTMLDivElement>("trace");
    if (store === null || store.document === null || this.lastSeries === null) {
      target.innerHTML = "";
      return;
    }
    target.innerHTML = renderTrace(store.document, this.lastSeries, {
      showLatent: this.showLatent,
    });
  }

  private nodeFormFromInputs(): NodeForm {
    const kind = el<HTMLSelectElement>("node-kind").value as VariableKind;
    const form = emptyNodeForm(kind);
    form.name = el<HTMLInputElement>("node-name").value;
    form.memo = el<HTMLInputElement>("node-memo").value;
    form.aggregation = el<HTMLSelectElement>("node-aggregation").value as Aggregation;
    form.latent = el<HTMLInputElement>("node-latent").checked;
    if (kind === "categorical") {
      form.categories = el<HTMLTextAreaElement>("node-categories")
        .value.split("\n")
        .map((line) => line.trim())
        .filter((line) => line !== "");
    }
    if (kind === "continuous") {
      form.min = el<HTMLInputElement>("node-min").value;
      form.max = el<HTMLInputElement>("node-max").value;
      form.offset = el<HTMLInputElement>("node-offset").value;
    }
    return form;
  }

  private edgeFormFromInputs(): EdgeForm {
    const template = el<HTMLSelectElement>("edge-template").value;
    return {
      source: Number(el<HTMLSelectElement>("edge-source").value),
      target: Number(el<HTMLSelectElement>("edge-target").value),
      lag: readNumber(el<HTMLInputElement>("edge-lag"), 0),
      template:
        template === "linear_window"
          ? {
              kind: "linear_window",
              coeffs: el<HTMLInputElement>("edge-coeffs")
                .value.split(",")
                .map((c) => Number(c.trim())),
              intercept: readNumber(el<HTMLInputElement>("edge-intercept"), 0),
            }
          : null,
      user: this.user,
    };
  }

  private bindToolbar(): void {
    el<HTMLInputElement>("user-name").addEventListener("input", (event) => {
      this.user = (event.target as HTMLInputElement).value || "editor";
    });

    el<HTMLButtonElement>("new-graph").addEventListener("click", () => {
      void this.client.createGraph().then(async (body) => {
        await this.refreshGraphList();
        await this.openGraph(body.id);
      });
    });

    el<HTMLSelectElement>("graph-select").addEventListener("change", (event) => {
      const select = event.target as HTMLSelectElement;
      void this.openGraph(select.value);
    });

    // Node dialog: live validation gates the submit button.
    const nodeSubmit = el<HTMLButtonElement>("node-submit");
    const nodeValidate = () => {
      const form = this.nodeFormFromInputs();
      const doc = this.store?.document ?? undefined;
      const errors = validateNodeForm(form, doc);
      el<HTMLDivElement>("node-errors").textContent = errors
        .map((e) => `${e.field}: ${e.message}`)
        .join("; ");
      nodeSubmit.disabled = !canSubmitNodeForm(form, doc);
    };
    for (const id of ["node-name", "node-kind", "node-categories", "node-min", "node-max", "node-offset", "node-aggregation"]) {
      el<HTMLElement>(id).addEventListener("input", nodeValidate);
      el<HTMLElement>(id).addEventListener("change", nodeValidate);
    }
    nodeSubmit.addEventListener("click", () => {
      const store = this.store;
      if (store === null || store.document === null) {
        return;
      }
      const event = nodeEditEvent(this.nodeFormFromInputs(), store.document);
      event.actor = { kind: "expert", name: this.user };
      void store.applyEdit(event).catch(() => undefined);
    });

    // Edge dialog: server-side rejections (contemporaneous cycles) land in
    // the banner verbatim via store.lastError.
    const edgeSubmit = el<HTMLButtonElement>("edge-submit");
    const edgeValidate = () => {
      const doc = this.store?.document;
      if (!doc) {
        edgeSubmit.disabled = true;
        return;
      }
      const form = this.edgeFormFromInputs();
      const errors = validateEdgeForm(form, doc);
      el<HTMLDivElement>("edge-errors").textContent = errors
        .map((e) => `${e.field}: ${e.message}`)
        .join("; ");
      edgeSubmit.disabled = !canSubmitEdgeForm(form, doc);
    };
    for (const id of ["edge-source", "edge-target", "edge-lag", "edge-template", "edge-coeffs", "edge-intercept"]) {
      el<HTMLElement>(id).addEventListener("input", edgeValidate);
      el<HTMLElement>(id).addEventListener("change", edgeValidate);
    }
    edgeSubmit.addEventListener("click", () => {
      const store = this.store;
      if (store === null || store.document === null) {
        return;
      }
      const events = edgeEditEvents(this.edgeFormFromInputs(), store.document);
      void store.applyEdits(events).catch(() => undefined);
    });

    // Suggestion import: a pasted edge-list JSON file.
    el<HTMLButtonElement>("suggestion-import").addEventListener("click", () => {
      const store = this.store;
      if (store === null) {
        return;
      }
      const text = el<HTMLTextAreaElement>("suggestion-json").value;
      const algorithm = el<HTMLInputElement>("suggestion-algorithm").value || undefined;
      try {
        const payload = JSON.parse(text);
        void store.importSuggestions(payload, { algorithm }).catch((error: unknown) => {
          this.banner(error instanceof Error ? error.message : String(error));
        });
      } catch (error) {
        this.banner(`suggestion file is not JSON: ${String(error)}`);
      }
    });

    // Simulate panel: length, seed, record-latent, and one do-clamp row.
    el<HTMLButtonElement>("simulate-run").addEventListener("click", () => {
      const store = this.store;
      if (store === null) {
        return;
      }
      const config: SimulateRequest = {
        length: readNumber(el<HTMLInputElement>("sim-length"), 100),
        seed: readNumber(el<HTMLInputElement>("sim-seed"), 0),
        record_latent: el<HTMLInputElement>("sim-record-latent").checked,
      };
      const clampVar = el<HTMLInputElement>("clamp-variable").value.trim();
      if (clampVar !== "") {
        const clamp: InterventionObj = {
          kind: "do_clamp",
          variable: clampVar,
          value: readNumber(el<HTMLInputElement>("clamp-value"), 0),
          t_start: readNumber(el<HTMLInputElement>("clamp-start"), 0),
          t_end: readNumber(el<HTMLInputElement>("clamp-end"), 0),
        };
        config.interventions = [clamp];
      }
      this.banner(null);
      void store
        .simulate(config)
        .then((run) => {
          if (run.status === "failed") {
            this.banner(`run failed: ${run.error ?? "unknown error"}`);
            return;
          }
          this.lastSeries = run.series ?? null;
          this.renderTracePanel();
        })
        .catch((error: unknown) => {
          this.banner(error instanceof ApiError ? error.message : String(error));
        });
    });

    el<HTMLInputElement>("trace-show-latent").addEventListener("change", (event) => {
      this.showLatent = (event.target as HTMLInputElement).checked;
      this.renderTracePanel();
    });
  }

  private async pollLog(): Promise<void> {
    const store = this.store;
    if (store === null) {
      return;
    }
    try {
      await store.pollLog();
    } catch {
      // Transient polling errors resolve on the next tick.
    }
  }
}

// The API may live on another origin than the static page; ?service=
// points the client at it, defaulting to wherever the page came from.
const override = new URLSearchParams(window.location.search).get("service");
const baseUrl = override ?? `${window.location.protocol}//${window.location.host}`;
void new App(baseUrl).start();
