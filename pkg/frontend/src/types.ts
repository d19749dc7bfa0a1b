// Wire shapes for the graph service HTTP API. These mirror the JSON the
// server emits; the client never fabricates causal data in other forms.

export type VariableKind = "continuous" | "binary" | "categorical";
export type Aggregation = "sum" | "average" | "vote";

/** Who authored an edge or an edit: a human expert or a discovery algorithm. */
export interface ProvenanceObj {
  kind: string;
  name: string;
}

export interface VariableObj {
  id: number;
  name: string;
  kind: VariableKind;
  categories: string[];
  min: number;
  max: number;
  offset: number;
  memo: string;
  aggregation: Aggregation;
  latent: boolean;
}

export interface EdgeObj {
  source: number;
  target: number;
  lag: number;
  functional: string;
  provenance: ProvenanceObj;
}

/** One additive parent group: parent (id, lag) pairs plus a functional name. */
export interface PartitionGroupObj {
  parents: [number, number][];
  functional: string;
}

export interface FunctionalObj {
  kind: string;
  [key: string]: unknown;
}

export interface NoiseObj {
  kind: string;
  [key: string]: unknown;
}

export interface GraphDocument {
  format_version: string;
  variables: VariableObj[];
  edges: EdgeObj[];
  partitions: Record<string, PartitionGroupObj[]>;
  functionals: Record<string, FunctionalObj>;
  noise: Record<string, NoiseObj>;
  metadata?: Record<string, unknown>;
}

/** The mutable part of an edit sent with PATCH; the server assigns seq. */
export interface EditEventBody {
  action: string;
  payload: Record<string, unknown>;
  actor?: ProvenanceObj;
}

/** A committed edit as returned by the log endpoint. */
export interface EventObj {
  seq: number;
  actor: ProvenanceObj;
  action: string;
  payload: Record<string, unknown>;
  timestamp: string;
}

export interface GraphBody {
  id: string;
  version: number;
  document: GraphDocument;
}

export interface GraphSummary {
  id: string;
  version: number;
  title: string | null;
  variables: number;
  edges: number;
}

export interface LogBody {
  id: string;
  version: number;
  events: EventObj[];
}

export type SuggestionStatus = "pending" | "accepted" | "rejected";

/** A proposed edge; source and target are variable names, not ids. */
export interface SuggestionObj {
  id: string;
  source: string;
  target: string;
  lag: number;
  score: number | null;
  status: SuggestionStatus;
}

export interface SuggestionSetObj {
  algorithm: string;
  suggestions: SuggestionObj[];
}

export interface InterventionObj {
  kind: "do_clamp" | "shift_noise";
  variable: string;
  t_start: number;
  t_end: number;
  value?: number;
  noise?: NoiseObj;
}

export interface SimulateRequest {
  length: number;
  seed?: number;
  burn_in?: number;
  record_latent?: boolean;
  interventions?: InterventionObj[];
}

export interface RunHandle {
  run_id: string;
  cached: boolean;
}

export interface SeriesMeta {
  variables: {
    id: number;
    name: string;
    kind: VariableKind;
    categories: string[];
  }[];
  length: number;
  run?: {
    seed: number;
    graph_hash: string;
    burn_in: number;
    length: number;
    init: string;
    record_latent: boolean;
    interventions: InterventionObj[];
    rng_state: Record<string, unknown>;
  };
}

export interface SeriesPayload {
  meta: SeriesMeta;
  columns: Record<string, number[]>;
}

export interface RunBody {
  run_id: string;
  status: "running" | "done" | "failed";
  error?: string;
  series?: SeriesPayload;
}
