import { describe, expect, it } from "vitest";

import { ApiError, ServiceClient, StaleVersionError } from "../src/api.js";
import type { FetchFn } from "../src/api.js";

function clientReturning(status: number, body: unknown): ServiceClient {
  const fetchFn: FetchFn = async () =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  return new ServiceClient("http://fake", fetchFn);
}

describe("ServiceClient error mapping", () => {
  it("raises StaleVersionError with the server's current version on 409", async () => {
    const client = clientReturning(409, {
      error: "base_version 3 is stale; current version is 5",
      current_version: 5,
    });
    const failure = client.patchGraph("g0", 3, { action: "add_edge", payload: {} });
    await expect(failure).rejects.toBeInstanceOf(StaleVersionError);
    await failure.catch((error: StaleVersionError) => {
      expect(error.currentVersion).toBe(5);
      expect(error.message).toContain("stale");
    });
  });

  it("surfaces the server's error text on 400", async () => {
    const client = clientReturning(400, { error: "edge (0->1, lag 0) closes a cycle" });
    const failure = client.patchGraph("g0", 0, { action: "add_edge", payload: {} });
    await expect(failure).rejects.toThrow("edge (0->1, lag 0) closes a cycle");
    await failure.catch((error: ApiError) => {
      expect(error.status).toBe(400);
    });
  });

  it("falls back to the status code when the body is not JSON", async () => {
    const fetchFn: FetchFn = async () => new Response("boom", { status: 502 });
    const client = new ServiceClient("http://fake", fetchFn);
    await expect(client.getGraph("g0")).rejects.toThrow("request failed: 502");
  });

  it("sends edits as PATCH with base_version and event", async () => {
    let captured: { url: string; method?: string; body?: string } | null = null;
    const fetchFn: FetchFn = async (url, init) => {
      captured = { url, method: init?.method, body: String(init?.body) };
      return new Response(JSON.stringify({ id: "g0", version: 1, document: null }), {
        status: 200,
        headers: { "Content-Type": "application/json" },
      });
    };
    const client = new ServiceClient("http://fake/", fetchFn);
    await client.patchGraph("g0", 0, { action: "add_variable", payload: { spec: { name: "x" } } });
    expect(captured!.url).toBe("http://fake/graphs/g0");
    expect(captured!.method).toBe("PATCH");
    expect(JSON.parse(captured!.body!)).toEqual({
      base_version: 0,
      event: { action: "add_variable", payload: { spec: { name: "x" } } },
    });
  });
});
