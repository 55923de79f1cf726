import { describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api";
import { Panel } from "../src/state";
import { configStore, makeFetch } from "./helpers";

function panelOn(store: ReturnType<typeof configStore>) {
  return new Panel(new ServiceClient("", makeFetch(store.routes)));
}

describe("session config mirror", () => {
  it("round-trips a fetched, edited and saved config unchanged", async () => {
    const store = configStore();
    const panel = panelOn(store);
    await panel.loadConfig();
    const before = structuredClone(panel.state.config!);

    expect(await panel.saveConfig({ delta: 60 })).toBe(true);

    // Only the edited field and the version moved; nothing was dropped,
    // renamed or rounded on the way through.
    const after = store.current;
    expect(after.delta).toBe(60);
    expect(after.version).toBe(before.version + 1);
    expect({ ...after, delta: before.delta, version: before.version }).toEqual(before);
    expect(panel.state.config).toEqual(after);
  });

  it("saving without edits changes nothing but the version", async () => {
    const store = configStore({ background: 144, refresh_plots: false });
    const panel = panelOn(store);
    await panel.loadConfig();
    const before = structuredClone(panel.state.config!);

    await panel.saveConfig({});
    expect({ ...store.current, version: before.version }).toEqual(before);
  });

  it("merges nested search fields instead of replacing the block", async () => {
    const store = configStore();
    const panel = panelOn(store);
    await panel.loadConfig();

    await panel.saveConfig({ search: { step: 3 } } as any);
    expect(store.current.search.step).toBe(3);
    expect(store.current.search.edge_weight).toBe(20.0);
    expect(store.current.search.polarity).toBe("dark");
  });

  it("surfaces a version conflict inline and leaves the mirror untouched", async () => {
    const store = configStore();
    const first = panelOn(store);
    const second = panelOn(store);
    await first.loadConfig();
    await second.loadConfig();

    await first.saveConfig({ delta: 55 });
    const mirrorBefore = structuredClone(second.state.config!);

    expect(await second.saveConfig({ delta: 70 })).toBe(false);
    expect(second.state.formError).toContain("version conflict");
    expect(second.state.config).toEqual(mirrorBefore);
    expect(store.current.delta).toBe(55);

    // Reloading picks up the winning write and clears the way for a retry.
    await second.loadConfig();
    expect(second.state.config?.delta).toBe(55);
    expect(await second.saveConfig({ delta: 70 })).toBe(true);
  });

  it("surfaces rejected fields without touching the mirror", async () => {
    const store = configStore();
    const panel = panelOn(store);
    await panel.loadConfig();
    const before = structuredClone(panel.state.config!);

    expect(await panel.saveConfig({ shiny: true } as any)).toBe(false);
    expect(panel.state.formError).toContain("unknown config field");
    expect(panel.state.config).toEqual(before);
    expect(store.current.version).toBe(before.version);
  });
});
