import type { HistoryEntry } from "./types.js";
import type { Pt } from "./trajectory.js";

export interface ChartSeries {
  best: Pt[];
  mean: Pt[];
}

/** Scale best/mean fitness curves into canvas coordinates (fitness axis is
 * fixed to [0, 1] so generations are comparable). */
export function chartSeries(entries: HistoryEntry[], width: number, height: number): ChartSeries {
  if (entries.length === 0) {
    return { best: [], mean: [] };
  }
  const maxGen = Math.max(1, entries[entries.length - 1]!.generation);
  const toPt = (generation: number, value: number): Pt => ({
    x: (generation / maxGen) * width,
    y: (1 - Math.min(1, Math.max(0, value))) * height,
  });
  return {
    best: entries.map((e) => toPt(e.generation, e.best)),
    mean: entries.map((e) => toPt(e.generation, e.mean)),
  };
}

function drawSeries(ctx: CanvasRenderingContext2D, pts: Pt[], color: string): void {
  if (pts.length === 0) {
    return;
  }
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(pts[0]!.x, pts[0]!.y);
  for (const p of pts.slice(1)) {
    ctx.lineTo(p.x, p.y);
  }
  ctx.stroke();
}

export function renderHistory(canvas: HTMLCanvasElement, entries: HistoryEntry[]): ChartSeries {
  const series = chartSeries(entries, canvas.width, canvas.height);
  const ctx = canvas.getContext ? canvas.getContext("2d") : null;
  if (ctx) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = "#fbfaf6";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    drawSeries(ctx, series.mean, "#999");
    drawSeries(ctx, series.best, "#1c64c8");
  }
  return series;
}
