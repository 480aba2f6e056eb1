import { ApiClient, ApiError } from "./api.js";
import { renderCards } from "./cards.js";
import { renderHistory } from "./history.js";
import type { Candidate, SessionInfo, StreamEvent, WorldInfo } from "./types.js";

export interface AppOptions {
  /** Delay before a stream reconnect attempt; tests set it to 0. */
  reconnectDelayMs?: number;
  /** Disable the stream entirely (tests drive events by hand). */
  stream?: boolean;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className: string,
  parent: HTMLElement,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  node.className = className;
  parent.appendChild(node);
  return node;
}

/** The whole page: candidate grid, selection controls, progress and error
 * banners, and the fitness-history chart.  All state reconstructs from the
 * API alone, so a reload (or reconnect) starts with `init()` and loses
 * nothing but the un-submitted local selection. */
export class App {
  readonly selection = new Set<number>();
  session: SessionInfo | null = null;
  world: WorldInfo | null = null;
  candidates: Candidate[] = [];

  private readonly grid: HTMLElement;
  private readonly statusLine: HTMLElement;
  private readonly progressLine: HTMLElement;
  private readonly banner: HTMLElement;
  private readonly submitBtn: HTMLButtonElement;
  private readonly randomBtn: HTMLButtonElement;
  private readonly historyCanvas: HTMLCanvasElement;
  private busy = false;
  private closed = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly options: AppOptions = {},
  ) {
    root.textContent = "";
    const header = el("div", "header", root);
    this.statusLine = el("div", "status", header);
    this.progressLine = el("div", "progress", header);
    this.banner = el("div", "banner hidden", root);
    const controls = el("div", "controls", root);
    this.submitBtn = el("button", "submit", controls);
    this.submitBtn.textContent = "Breed next generation";
    this.submitBtn.addEventListener("click", () => void this.submitSelection());
    this.randomBtn = el("button", "random", controls);
    this.randomBtn.textContent = "No preference (keep all)";
    this.randomBtn.addEventListener("click", () => void this.submitAll());
    this.grid = el("div", "grid", root);
    const chartBox = el("div", "chart", root);
    this.historyCanvas = document.createElement("canvas");
    this.historyCanvas.width = 480;
    this.historyCanvas.height = 160;
    chartBox.appendChild(this.historyCanvas);
  }

  /** Fetch everything and render; safe to call again after a reconnect. */
  async init(): Promise<void> {
    this.world = await this.api.getWorld();
    await this.refresh();
    if (this.options.stream !== false) {
      void this.streamLoop();
    }
  }

  close(): void {
    this.closed = true;
  }

  async refresh(): Promise<void> {
    this.session = await this.api.getSession();
    this.candidates = await this.api.getGeneration();
    for (const id of [...this.selection]) {
      if (!this.candidates.some((c) => c.id === id)) {
        this.selection.delete(id);
      }
    }
    renderHistory(this.historyCanvas, await this.api.getHistory());
    this.render();
  }

  private render(): void {
    const s = this.session;
    this.statusLine.textContent = s
      ? `${s.session_id} · generation ${s.generation} · ${s.status}`
      : "connecting…";
    if (this.world) {
      renderCards(this.grid, this.candidates, this.world, this.selection, {
        onToggle: (id) => this.toggle(id),
      });
    }
    const canSubmit = !this.busy && this.selection.size > 0 && s?.status === "awaiting_selection";
    this.submitBtn.disabled = !canSubmit;
    this.randomBtn.disabled = this.busy || s?.status !== "awaiting_selection";
  }

  toggle(id: number): void {
    if (this.busy) {
      return;
    }
    if (this.selection.has(id)) {
      this.selection.delete(id);
    } else {
      this.selection.add(id);
    }
    this.render();
  }

  showError(message: string): void {
    this.banner.textContent = message;
    this.banner.className = "banner error";
  }

  showNotice(message: string): void {
    this.banner.textContent = message;
    this.banner.className = "banner notice";
  }

  clearBanner(): void {
    this.banner.textContent = "";
    this.banner.className = "banner hidden";
  }

  async submitSelection(ids?: number[]): Promise<void> {
    const chosen = ids ?? [...this.selection].sort((a, b) => a - b);
    if (chosen.length === 0 || this.busy) {
      return;
    }
    this.busy = true;
    this.clearBanner();
    this.render();
    try {
      await this.api.postSelection(chosen);
      this.selection.clear();
      await this.refresh();
    } catch (err) {
      if (err instanceof ApiError) {
        this.showError(
          err.code === "InvalidSelection" ? `Selection rejected: ${err.message}` : err.message,
        );
      } else {
        this.showError(String(err));
      }
      // local selection is preserved so the user can correct and resubmit
    } finally {
      this.busy = false;
      this.render();
    }
  }

  /** Uniform, pressure-free advance: submit every current candidate. */
  async submitAll(): Promise<void> {
    await this.submitSelection(this.candidates.map((c) => c.id));
  }

  handleEvent(event: StreamEvent): void {
    if (event.event === "evaluation_progress") {
      this.progressLine.textContent = `evaluating ${event.done}/${event.total}`;
    } else if (event.event === "generation_ready") {
      this.progressLine.textContent = "";
      void this.refresh();
    } else if (event.event === "session_paused") {
      this.showNotice("Session paused for inactivity; submit a selection to resume.");
    }
  }

  private async streamLoop(): Promise<void> {
    const delay = this.options.reconnectDelayMs ?? 1000;
    while (!this.closed) {
      try {
        await this.api.readStream((event) => this.handleEvent(event));
      } catch {
        /* drop through to reconnect */
      }
      if (this.closed) {
        return;
      }
      await new Promise((resolve) => setTimeout(resolve, delay));
      try {
        await this.refresh(); // idempotent re-sync after a dropped stream
      } catch {
        /* server may still be down; the next loop retries */
      }
    }
  }
}
