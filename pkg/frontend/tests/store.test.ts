import { describe, expect, it } from "vitest";

import { ServiceClient, StaleVersionError } from "../src/api.js";
import { EditorStore } from "../src/store.js";
import type { ConflictInfo, ConflictResolution } from "../src/store.js";
import type { EditEventBody, FetchFn } from "./fakes.js";
import { FakeService } from "./fakes.js";

function storeOn(
  fake: FakeService,
  onConflict?: (info: ConflictInfo) => ConflictResolution | Promise<ConflictResolution>,
): EditorStore {
  const client = new ServiceClient("http://fake", fake.fetch as FetchFn);
  return new EditorStore(client, "g0", { onConflict });
}

function addVariable(name: string): EditEventBody {
  return { action: "add_variable", payload: { spec: { name, kind: "continuous" } } };
}

describe("EditorStore", () => {
  it("adopts server state on refresh", async () => {
    const fake = new FakeService(["x", "y"]);
    const store = storeOn(fake);
    await store.refresh();
    expect(store.version).toBe(2);
    expect(store.document!.variables.map((v) => v.name)).toEqual(["x", "y"]);
  });

  it("serializes queued edits so base versions never invert", async () => {
    const fake = new FakeService([]);
    // Slow down the first PATCH; without a queue the later edits would
    // arrive carrying the same stale base version.
    fake.patchDelayMs = [25, 0, 0];
    const store = storeOn(fake);
    await store.refresh();
    await Promise.all([
      store.applyEdit(addVariable("a")),
      store.applyEdit(addVariable("b")),
      store.applyEdit(addVariable("c")),
    ]);
    expect(fake.patchBaseVersions).toEqual([0, 1, 2]);
    expect(store.version).toBe(3);
    expect(store.document!.variables.map((v) => v.name)).toEqual(["a", "b", "c"]);
  });

  it("keeps later queued edits alive when an earlier one fails", async () => {
    const fake = new FakeService(["a"]);
    const store = storeOn(fake);
    await store.refresh();
    const bad = store.applyEdit(addVariable("a"));
    const good = store.applyEdit(addVariable("b"));
    await expect(bad).rejects.toThrow(/already in use/);
    await good;
    expect(store.document!.variables.map((v) => v.name)).toEqual(["a", "b"]);
  });

  it("re-fetches on conflict and retries when the handler says so", async () => {
    const fake = new FakeService([]);
    const seen: ConflictInfo[] = [];
    const store = storeOn(fake, (info) => {
      seen.push(info);
      return "retry";
    });
    await store.refresh();
    fake.externalEdit("intruder");
    await store.applyEdit(addVariable("mine"));
    expect(seen).toHaveLength(1);
    expect(seen[0]!.staleVersion).toBe(0);
    expect(seen[0]!.currentVersion).toBe(1);
    expect(store.version).toBe(2);
    expect(store.document!.variables.map((v) => v.name)).toEqual(["intruder", "mine"]);
  });

  it("aborts a conflicting edit by default but keeps the fresh state", async () => {
    const fake = new FakeService([]);
    const store = storeOn(fake);
    await store.refresh();
    fake.externalEdit("intruder");
    await expect(store.applyEdit(addVariable("mine"))).rejects.toBeInstanceOf(StaleVersionError);
    // The losing edit was not applied, but the canvas caught up.
    expect(store.version).toBe(1);
    expect(store.document!.variables.map((v) => v.name)).toEqual(["intruder"]);
    expect(fake.patchBaseVersions).toEqual([0]);
  });

  it("matches a fresh fetch after any accepted edit sequence", async () => {
    const fake = new FakeService([]);
    const store = storeOn(fake);
    await store.refresh();
    await store.applyEdits([addVariable("a"), addVariable("b"), addVariable("c")]);
    const fresh = storeOn(fake);
    await fresh.refresh();
    expect(store.version).toBe(fresh.version);
    expect(store.document).toEqual(fresh.document);
  });

  it("notices external edits through log polling", async () => {
    const fake = new FakeService([]);
    const store = storeOn(fake);
    await store.refresh();
    expect(await store.pollLog()).toBe(false);
    fake.externalEdit("intruder");
    expect(await store.pollLog()).toBe(true);
    expect(store.version).toBe(1);
    expect(store.document!.variables.map((v) => v.name)).toEqual(["intruder"]);
  });

  it("records failures for the banner and clears them on success", async () => {
    const fake = new FakeService(["a"]);
    const store = storeOn(fake);
    await store.refresh();
    await expect(store.applyEdit(addVariable("a"))).rejects.toThrow();
    expect(store.lastError).toMatch(/already in use/);
    await store.applyEdit(addVariable("b"));
    expect(store.lastError).toBeNull();
  });
});
