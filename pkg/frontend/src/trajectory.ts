import type { Bounds, WorldInfo } from "./types.js";

export interface Pt {
  x: number;
  y: number;
}

/** World coordinates to canvas pixels, y flipped so north is up. */
export function projectPoint(
  x: number,
  y: number,
  bounds: Bounds,
  width: number,
  height: number,
): Pt {
  const sx = (x - bounds.x_min) / (bounds.x_max - bounds.x_min);
  const sy = (y - bounds.y_min) / (bounds.y_max - bounds.y_min);
  return { x: sx * width, y: (1 - sy) * height };
}

export function projectPolyline(
  trajectory: [number, number][],
  bounds: Bounds,
  width: number,
  height: number,
): Pt[] {
  return trajectory.map(([x, y]) => projectPoint(x, y, bounds, width, height));
}

export function scaleLength(value: number, bounds: Bounds, width: number): number {
  return (value / (bounds.x_max - bounds.x_min)) * width;
}

/** Draw the arena, obstacles, target, and one trajectory onto a card canvas.
 * No-op when a 2D context is unavailable (e.g. under jsdom); the projected
 * points are still computed and returned for assertions. */
export function drawTrajectory(
  canvas: HTMLCanvasElement,
  world: WorldInfo,
  trajectory: [number, number][],
): Pt[] {
  const pts = projectPolyline(trajectory, world.bounds, canvas.width, canvas.height);
  const ctx = canvas.getContext ? canvas.getContext("2d") : null;
  if (!ctx) {
    return pts;
  }
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = world.terrain === "flat" ? "#f4f1e8" : "#e8e4d4";
  ctx.fillRect(0, 0, width, height);
  if (world.terrain === "combined") {
    ctx.fillStyle = "#ded8c2";
    ctx.fillRect(width / 2, 0, width / 2, height);
  }

  ctx.fillStyle = "#8a8578";
  for (const o of world.obstacles) {
    const c = projectPoint(o.x, o.y, world.bounds, width, height);
    ctx.beginPath();
    ctx.arc(c.x, c.y, scaleLength(o.radius, world.bounds, width), 0, 2 * Math.PI);
    ctx.fill();
  }

  const t = projectPoint(world.target.x, world.target.y, world.bounds, width, height);
  ctx.strokeStyle = "#2f9e44";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(t.x, t.y, scaleLength(world.target.radius, world.bounds, width), 0, 2 * Math.PI);
  ctx.stroke();

  if (pts.length > 1) {
    ctx.strokeStyle = "#1c64c8";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    const first = pts[0]!;
    ctx.moveTo(first.x, first.y);
    for (const p of pts.slice(1)) {
      ctx.lineTo(p.x, p.y);
    }
    ctx.stroke();
    const last = pts[pts.length - 1]!;
    ctx.fillStyle = "#d9480f";
    ctx.beginPath();
    ctx.arc(last.x, last.y, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  return pts;
}
