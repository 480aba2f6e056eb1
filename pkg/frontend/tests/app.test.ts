// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { MockServer } from "./mock_server.js";

async function makeApp(server: MockServer, opts: { stream?: boolean } = {}) {
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = new App(root, new ApiClient("", server.fetchLike()), {
    stream: opts.stream ?? false,
    reconnectDelayMs: 0,
  });
  await app.init();
  return { app, root };
}

describe("selection flow", () => {
  it("POSTs exactly the selected ids", async () => {
    const server = new MockServer(12);
    const { app } = await makeApp(server);
    app.toggle(3);
    app.toggle(7);
    app.toggle(1);
    await app.submitSelection();
    expect(server.selections).toEqual([[1, 3, 7]]);
    expect(app.session?.generation).toBe(1);
    expect(app.selection.size).toBe(0);
  });

  it("renders the new generation after a selection", async () => {
    const server = new MockServer(6);
    const { app, root } = await makeApp(server);
    const before = root.querySelector(".status")!.textContent;
    expect(before).toContain("generation 0");
    app.toggle(0);
    await app.submitSelection();
    expect(root.querySelector(".status")!.textContent).toContain("generation 1");
    expect(root.querySelectorAll(".card")).toHaveLength(6);
  });

  it("keeps the local selection and shows a banner on InvalidSelection", async () => {
    const server = new MockServer(6);
    const { app, root } = await makeApp(server);
    app.toggle(2);
    await app.submitSelection([999]); // stale id: server rejects
    const banner = root.querySelector(".banner") as HTMLElement;
    expect(banner.className).toContain("error");
    expect(banner.textContent).toContain("Selection rejected");
    expect(app.session?.generation).toBe(0);
    expect([...app.selection]).toEqual([2]); // preserved for correction
    await app.submitSelection();
    expect(app.session?.generation).toBe(1);
  });

  it("the no-preference button submits every candidate", async () => {
    const server = new MockServer(5);
    const { app } = await makeApp(server);
    await app.submitAll();
    expect(server.selections).toEqual([[0, 1, 2, 3, 4]]);
  });

  it("never advances the generation without a submit", async () => {
    const server = new MockServer(5);
    const { app } = await makeApp(server);
    app.toggle(1);
    app.toggle(2);
    app.toggle(1);
    expect(server.selections).toEqual([]);
    expect(app.session?.generation).toBe(0);
  });
});

describe("stream handling", () => {
  it("generation_ready refreshes and bumps the counter", async () => {
    const server = new MockServer(6);
    const { app, root } = await makeApp(server);
    server.select([0, 1]); // another client advanced the session
    app.handleEvent({ event: "generation_ready", generation: 1 });
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(root.querySelector(".status")!.textContent).toContain("generation 1");
  });

  it("evaluation progress is displayed and cleared", async () => {
    const server = new MockServer(6);
    const { app, root } = await makeApp(server);
    app.handleEvent({ event: "evaluation_progress", done: 2, total: 6 });
    expect(root.querySelector(".progress")!.textContent).toBe("evaluating 2/6");
    app.handleEvent({ event: "generation_ready", generation: 0 });
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(root.querySelector(".progress")!.textContent).toBe("");
  });

  it("session_paused shows a notice without losing selection", async () => {
    const server = new MockServer(6);
    const { app, root } = await makeApp(server);
    app.toggle(4);
    app.handleEvent({ event: "session_paused" });
    expect(root.querySelector(".banner")!.className).toContain("notice");
    expect([...app.selection]).toEqual([4]);
  });

  it("reconnects after stream drops and stays in sync", async () => {
    const server = new MockServer(6);
    const { app } = await makeApp(server, { stream: true });
    await new Promise((resolve) => setTimeout(resolve, 30));
    expect(server.streamDrops).toBeGreaterThan(1); // dropped and re-opened
    app.close();
    expect(app.session?.generation).toBe(0);
  });
});

describe("state reconstruction", () => {
  it("a fresh app instance rebuilds the same view from the API alone", async () => {
    const server = new MockServer(8);
    const { app } = await makeApp(server);
    app.toggle(0);
    app.toggle(5);
    await app.submitSelection();

    const { app: reloaded, root } = await makeApp(server); // page reload
    expect(reloaded.session?.generation).toBe(1);
    expect(reloaded.candidates.map((c) => c.id)).toEqual(app.candidates.map((c) => c.id));
    expect(root.querySelectorAll(".card")).toHaveLength(8);
  });
});
