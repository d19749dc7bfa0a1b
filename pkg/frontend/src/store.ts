// Editor session state. The store owns the single mutation queue: every
// edit, accept, and reject runs one at a time against the version the
// previous response reported, so base_version ordering can never invert.
// Document state is only ever replaced by server responses; the client
// never mutates a document locally.

import { ServiceClient, StaleVersionError } from "./api.js";
import type {
  EditEventBody,
  GraphBody,
  GraphDocument,
  RunBody,
  SimulateRequest,
  SuggestionObj,
  SuggestionSetObj,
} from "./types.js";

/** What to do after a conflicting edit has been rebased onto fresh state. */
export type ConflictResolution = "retry" | "abort";

export interface ConflictInfo {
  event: EditEventBody;
  staleVersion: number;
  currentVersion: number;
}

export interface StoreOptions {
  /**
   * Called when a PATCH hits a version conflict, after the store has
   * re-fetched. Return "retry" to resubmit against the fresh version;
   * anything else aborts and rethrows. Defaults to abort so racing edits
   * are never silently rebased.
   */
  onConflict?: (info: ConflictInfo) => ConflictResolution | Promise<ConflictResolution>;
  /** Fired after every state change so the view layer can re-render. */
  onChange?: () => void;
}

export class EditorStore {
  readonly client: ServiceClient;
  readonly graphId: string;
  version = -1;
  document: GraphDocument | null = null;
  suggestionSets: Record<string, SuggestionSetObj> = {};
  lastError: string | null = null;
  private readonly options: StoreOptions;
  private queueTail: Promise<unknown> = Promise.resolve();

  constructor(client: ServiceClient, graphId: string, options: StoreOptions = {}) {
    this.client = client;
    this.graphId = graphId;
    this.options = options;
  }

  private notify(): void {
    this.options.onChange?.();
  }

  private adopt(body: GraphBody): void {
    this.version = body.version;
    this.document = body.document;
    this.notify();
  }

  /** Serialize mutations: each waits for the previous one to settle. */
  private enqueue<T>(task: () => Promise<T>): Promise<T> {
    const run = this.queueTail.then(task, task);
    this.queueTail = run.catch(() => undefined);
    return run;
  }

  /** Pull current document and suggestions from the server. */
  async refresh(): Promise<void> {
    const body = await this.client.getGraph(this.graphId);
    this.suggestionSets = await this.client.listSuggestions(this.graphId);
    this.adopt(body);
  }

  /**
   * Submit one edit event. On a version conflict the store re-fetches,
   * asks the conflict handler, and either retries on the merged state or
   * aborts. Either way the caller sees the server's truth afterwards.
   */
  applyEdit(event: EditEventBody): Promise<GraphBody> {
    return this.enqueue(async () => {
      try {
        const body = await this.client.patchGraph(this.graphId, this.version, event);
        this.lastError = null;
        this.adopt(body);
        return body;
      } catch (error) {
        if (error instanceof StaleVersionError) {
          const staleVersion = this.version;
          await this.refresh();
          const decision = await (this.options.onConflict?.({
            event,
            staleVersion,
            currentVersion: error.currentVersion,
          }) ?? "abort");
          if (decision === "retry") {
            const body = await this.client.patchGraph(this.graphId, this.version, event);
            this.lastError = null;
            this.adopt(body);
            return body;
          }
        }
        this.lastError = error instanceof Error ? error.message : String(error);
        this.notify();
        throw error;
      }
    });
  }

  /** Submit a dialog's events in order, stopping at the first failure. */
  async applyEdits(events: EditEventBody[]): Promise<GraphBody> {
    let last: GraphBody | null = null;
    for (const event of events) {
      last = await this.applyEdit(event);
    }
    if (last === null) {
      throw new Error("no events to apply");
    }
    return last;
  }

  async importSuggestions(
    payload: unknown,
    options: { algorithm?: string; format?: string } = {},
  ): Promise<string> {
    const body = await this.client.importSuggestions(this.graphId, payload, options);
    this.suggestionSets = await this.client.listSuggestions(this.graphId);
    this.notify();
    return body.set_id;
  }

  /** Accept mutates the graph, so it shares the edit queue. */
  acceptSuggestion(suggestionId: string): Promise<SuggestionObj> {
    return this.enqueue(async () => {
      try {
        const body = await this.client.acceptSuggestion(this.graphId, suggestionId);
        this.lastError = null;
        this.suggestionSets = await this.client.listSuggestions(this.graphId);
        this.adopt(body);
        return body.suggestion;
      } catch (error) {
        this.lastError = error instanceof Error ? error.message : String(error);
        this.notify();
        throw error;
      }
    });
  }

  rejectSuggestion(suggestionId: string): Promise<SuggestionObj> {
    return this.enqueue(async () => {
      try {
        const suggestion = await this.client.rejectSuggestion(this.graphId, suggestionId);
        this.lastError = null;
        this.suggestionSets = await this.client.listSuggestions(this.graphId);
        this.notify();
        return suggestion;
      } catch (error) {
        this.lastError = error instanceof Error ? error.message : String(error);
        this.notify();
        throw error;
      }
    });
  }

  async simulate(config: SimulateRequest): Promise<RunBody> {
    const handle = await this.client.startRun(this.graphId, config);
    return this.client.waitForRun(handle.run_id);
  }

  /**
   * Background poll: if the log moved past our version (another editor,
   * an accepted suggestion elsewhere), refresh from the server.
   */
  async pollLog(): Promise<boolean> {
    const log = await this.client.getLog(this.graphId, this.version);
    if (log.version === this.version) {
      return false;
    }
    await this.refresh();
    return true;
  }
}
