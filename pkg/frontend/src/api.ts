// Typed fetch client for the graph service. Every mutation goes through
// here; the editor holds no channel to the backend other than this API.

import type {
  EditEventBody,
  GraphBody,
  GraphDocument,
  GraphSummary,
  LogBody,
  RunBody,
  RunHandle,
  SimulateRequest,
  SuggestionObj,
  SuggestionSetObj,
} from "./types.js";

export class ApiError extends Error {
  status: number;

  constructor(message: string, status: number) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

/** A PATCH raced another writer; carries the version to rebase onto. */
export class StaleVersionError extends ApiError {
  currentVersion: number;

  constructor(message: string, currentVersion: number) {
    super(message, 409);
    this.name = "StaleVersionError";
    this.currentVersion = currentVersion;
  }
}

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

async function errorMessage(res: Response): Promise<string> {
  const body = await res.json().catch(() => ({}));
  return typeof body.error === "string" ? body.error : `request failed: ${res.status}`;
}

export class ServiceClient {
  readonly baseUrl: string;
  private readonly fetchFn: FetchFn;

  constructor(baseUrl: string, fetchFn?: FetchFn) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    // Bind so a bare global fetch keeps its expected receiver.
    this.fetchFn = fetchFn ?? ((url, init) => globalThis.fetch(url, init));
  }

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const init: RequestInit = { method, headers: { Accept: "application/json" } };
    if (body !== undefined) {
      init.headers = { ...init.headers, "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (res.status === 409) {
      const payload = await res.json().catch(() => ({}));
      throw new StaleVersionError(
        typeof payload.error === "string" ? payload.error : "version conflict",
        typeof payload.current_version === "number" ? payload.current_version : -1,
      );
    }
    if (!res.ok) {
      throw new ApiError(await errorMessage(res), res.status);
    }
    return res;
  }

  async listGraphs(): Promise<GraphSummary[]> {
    const res = await this.request("GET", "/graphs");
    const body = (await res.json()) as { graphs: GraphSummary[] };
    return body.graphs;
  }

  async createGraph(document?: GraphDocument): Promise<GraphBody> {
    const payload = document === undefined ? {} : { document };
    const res = await this.request("POST", "/graphs", payload);
    return (await res.json()) as GraphBody;
  }

  async getGraph(graphId: string): Promise<GraphBody> {
    const res = await this.request("GET", `/graphs/${graphId}`);
    return (await res.json()) as GraphBody;
  }

  /**
   * Submit one edit against a known version. A concurrent writer surfaces
   * as StaleVersionError; callers decide whether to rebase and retry.
   */
  async patchGraph(graphId: string, baseVersion: number, event: EditEventBody): Promise<GraphBody> {
    const res = await this.request("PATCH", `/graphs/${graphId}`, {
      base_version: baseVersion,
      event,
    });
    return (await res.json()) as GraphBody;
  }

  async getLog(graphId: string, since = 0): Promise<LogBody> {
    const res = await this.request("GET", `/graphs/${graphId}/log?since=${since}`);
    return (await res.json()) as LogBody;
  }

  async importSuggestions(
    graphId: string,
    payload: unknown,
    options: { algorithm?: string; format?: string } = {},
  ): Promise<{ set_id: string } & SuggestionSetObj> {
    const res = await this.request("POST", `/graphs/${graphId}/suggestions`, {
      payload,
      format: options.format ?? "edge-list",
      algorithm: options.algorithm,
    });
    return (await res.json()) as { set_id: string } & SuggestionSetObj;
  }

  async listSuggestions(graphId: string): Promise<Record<string, SuggestionSetObj>> {
    const res = await this.request("GET", `/graphs/${graphId}/suggestions`);
    const body = (await res.json()) as { sets: Record<string, SuggestionSetObj> };
    return body.sets;
  }

  async acceptSuggestion(
    graphId: string,
    suggestionId: string,
  ): Promise<{ suggestion: SuggestionObj } & GraphBody> {
    const res = await this.request(
      "POST",
      `/graphs/${graphId}/suggestions/${suggestionId}/accept`,
    );
    return (await res.json()) as { suggestion: SuggestionObj } & GraphBody;
  }

  async rejectSuggestion(graphId: string, suggestionId: string): Promise<SuggestionObj> {
    const res = await this.request(
      "POST",
      `/graphs/${graphId}/suggestions/${suggestionId}/reject`,
    );
    const body = (await res.json()) as { suggestion: SuggestionObj };
    return body.suggestion;
  }

  async startRun(graphId: string, config: SimulateRequest): Promise<RunHandle> {
    const res = await this.request("POST", `/graphs/${graphId}/simulate`, config);
    return (await res.json()) as RunHandle;
  }

  async getRun(runId: string): Promise<RunBody> {
    const res = await this.request("GET", `/runs/${runId}`);
    return (await res.json()) as RunBody;
  }

  async getRunCsv(runId: string): Promise<string> {
    const res = await this.fetchFn(`${this.baseUrl}/runs/${runId}`, {
      headers: { Accept: "text/csv" },
    });
    if (!res.ok) {
      throw new ApiError(await errorMessage(res), res.status);
    }
    return res.text();
  }

  /** Poll a run until it settles; the caller renders failures as banners. */
  async waitForRun(
    runId: string,
    options: { intervalMs?: number; timeoutMs?: number } = {},
  ): Promise<RunBody> {
    const interval = options.intervalMs ?? 100;
    const deadline = Date.now() + (options.timeoutMs ?? 30_000);
    for (;;) {
      const body = await this.getRun(runId);
      if (body.status !== "running") {
        return body;
      }
      if (Date.now() > deadline) {
        throw new ApiError(`run ${runId} still running after timeout`, 504);
      }
      await new Promise((resolve) => setTimeout(resolve, interval));
    }
  }
}
