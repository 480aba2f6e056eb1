// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { renderCards } from "../src/cards.js";
import { projectPoint, projectPolyline } from "../src/trajectory.js";
import { MockServer } from "./mock_server.js";

describe("trajectory projection", () => {
  const bounds = { x_min: 0, y_min: 0, x_max: 24, y_max: 24 };

  it("maps world corners to canvas corners with y flipped", () => {
    expect(projectPoint(0, 0, bounds, 160, 160)).toEqual({ x: 0, y: 160 });
    expect(projectPoint(24, 24, bounds, 160, 160)).toEqual({ x: 160, y: 0 });
    expect(projectPoint(12, 12, bounds, 160, 160)).toEqual({ x: 80, y: 80 });
  });

  it("projects polylines pointwise", () => {
    const pts = projectPolyline(
      [
        [0, 0],
        [12, 24],
      ],
      bounds,
      100,
      100,
    );
    expect(pts).toEqual([
      { x: 0, y: 100 },
      { x: 50, y: 0 },
    ]);
  });
});

describe("candidate grid", () => {
  it("renders one card per candidate with unique ids", () => {
    const server = new MockServer(12);
    const container = document.createElement("div");
    renderCards(container, server.candidates(), server.worldInfo(), new Set(), {
      onToggle: () => undefined,
    });
    const cards = [...container.querySelectorAll(".card")];
    expect(cards).toHaveLength(12);
    const ids = cards.map((c) => (c as HTMLElement).dataset.candidateId);
    expect(new Set(ids).size).toBe(12);
  });

  it("shows a badge only for candidates that reached the target", () => {
    const server = new MockServer(12);
    const candidates = server.candidates();
    const container = document.createElement("div");
    renderCards(container, candidates, server.worldInfo(), new Set(), {
      onToggle: () => undefined,
    });
    const cards = [...container.querySelectorAll(".card")] as HTMLElement[];
    candidates.forEach((candidate, i) => {
      const badge = cards[i]!.querySelector(".badge.reached");
      expect(badge !== null).toBe(candidate.reached);
    });
  });

  it("stores polyline endpoints that match the API payload", () => {
    const server = new MockServer(6);
    const world = server.worldInfo();
    const candidates = server.candidates();
    const container = document.createElement("div");
    renderCards(container, candidates, world, new Set(), { onToggle: () => undefined });
    const cards = [...container.querySelectorAll(".card")] as HTMLElement[];
    candidates.forEach((candidate, i) => {
      const first = JSON.parse(cards[i]!.dataset.firstPoint!);
      const last = JSON.parse(cards[i]!.dataset.lastPoint!);
      const expected = projectPolyline(candidate.trajectory, world.bounds, 160, 160);
      expect(first).toEqual(expected[0]);
      expect(last).toEqual(expected[expected.length - 1]);
    });
  });

  it("toggles selection through clicks", () => {
    const server = new MockServer(4);
    const container = document.createElement("div");
    const toggled: number[] = [];
    renderCards(container, server.candidates(), server.worldInfo(), new Set(), {
      onToggle: (id) => toggled.push(id),
    });
    (container.querySelector(".card") as HTMLElement).click();
    expect(toggled).toEqual([0]);
  });
});
