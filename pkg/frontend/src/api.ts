import type { Candidate, HistoryEntry, SessionInfo, StreamEvent, WorldInfo } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin JSON client over the session endpoints; the fetch function is
 * injectable so tests can run against an in-memory server. */
export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.base + path);
    if (!resp.ok) {
      throw new ApiError(resp.status, "RequestFailed", `${path} -> ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  getSession(): Promise<SessionInfo> {
    return this.getJson("/api/session");
  }

  getWorld(): Promise<WorldInfo> {
    return this.getJson("/api/world");
  }

  getGeneration(): Promise<Candidate[]> {
    return this.getJson("/api/generation");
  }

  getHistory(): Promise<HistoryEntry[]> {
    return this.getJson("/api/history");
  }

  async postSelection(ids: number[]): Promise<{ generation: number }> {
    const resp = await this.fetchFn(this.base + "/api/selection", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ ids }),
    });
    if (!resp.ok) {
      let code = "RequestFailed";
      let detail = `status ${resp.status}`;
      try {
        const body = (await resp.json()) as { error?: string; detail?: string };
        code = body.error ?? code;
        detail = body.detail ?? detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, code, detail);
    }
    return (await resp.json()) as { generation: number };
  }

  /** Long-lived newline-delimited event stream.  Resolves when the server
   * closes the connection; the caller decides whether to reconnect. */
  async readStream(onEvent: (event: StreamEvent) => void, signal?: AbortSignal): Promise<void> {
    const resp = await this.fetchFn(this.base + "/api/stream", { signal });
    if (!resp.ok || resp.body === null) {
      throw new ApiError(resp.status, "StreamFailed", "cannot open event stream");
    }
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        break;
      }
      buffer += decoder.decode(value, { stream: true });
      let newline = buffer.indexOf("\n");
      while (newline >= 0) {
        const line = buffer.slice(0, newline).trim();
        buffer = buffer.slice(newline + 1);
        if (line.length > 0) {
          onEvent(JSON.parse(line) as StreamEvent);
        }
        newline = buffer.indexOf("\n");
      }
    }
  }
}
