import { drawTrajectory } from "./trajectory.js";
import type { Candidate, WorldInfo } from "./types.js";

export interface CardCallbacks {
  onToggle(id: number): void;
}

const CANVAS_SIZE = 160;

function statLine(c: Candidate): string {
  const rot = ((c.rotations_l + c.rotations_r) / 2).toFixed(1);
  const perf = (100 * c.sensor_performance).toFixed(0);
  return `fit ${c.fitness.toFixed(3)} · rot ${rot} · sens ${perf}%`;
}

/** Rebuild the candidate grid: one toggleable card per candidate, each with
 * its trajectory sketched over the arena. */
export function renderCards(
  container: HTMLElement,
  candidates: Candidate[],
  world: WorldInfo,
  selected: Set<number>,
  callbacks: CardCallbacks,
): void {
  container.textContent = "";
  for (const candidate of candidates) {
    const card = document.createElement("div");
    card.className = "card" + (selected.has(candidate.id) ? " selected" : "");
    card.dataset.candidateId = String(candidate.id);

    const canvas = document.createElement("canvas");
    canvas.width = CANVAS_SIZE;
    canvas.height = CANVAS_SIZE;
    const pts = drawTrajectory(canvas, world, candidate.trajectory);
    if (pts.length > 0) {
      card.dataset.firstPoint = JSON.stringify(pts[0]);
      card.dataset.lastPoint = JSON.stringify(pts[pts.length - 1]);
    }
    card.appendChild(canvas);

    const title = document.createElement("div");
    title.className = "card-title";
    title.textContent = `#${candidate.id}`;
    if (candidate.reached) {
      const badge = document.createElement("span");
      badge.className = "badge reached";
      badge.textContent = "reached";
      title.appendChild(badge);
    }
    card.appendChild(title);

    const stats = document.createElement("div");
    stats.className = "card-stats";
    stats.textContent = statLine(candidate);
    card.appendChild(stats);

    card.addEventListener("click", () => callbacks.onToggle(candidate.id));
    container.appendChild(card);
  }
}
