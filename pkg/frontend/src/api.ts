/** Typed client for the provenance server's HTTP API.
 *
 * Every mutation the UI performs goes through this module; errors are
 * surfaced as ApiError values carrying the server's stable error code.
 */

import type { CommitDetail, Annotation, Graph, Mindmap } from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  readonly base: string;
  private readonly fetchImpl: FetchLike;

  /** base "" means same-origin relative requests. */
  constructor(base = "", fetchImpl: FetchLike = fetch) {
    this.base = base.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl;
  }

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    let response: Response;
    try {
      response = await this.fetchImpl(this.url(path), init);
    } catch (err) {
      throw new ApiError("UNREACHABLE", `server unreachable: ${String(err)}`, 0);
    }
    const text = await response.text();
    if (!response.ok) {
      let code = "HTTP_ERROR";
      let message = text || response.statusText;
      try {
        const parsed = JSON.parse(text) as { error?: { code?: string; message?: string } };
        if (parsed.error?.code) code = parsed.error.code;
        if (parsed.error?.message) message = parsed.error.message;
      } catch {
        // non-JSON error body; keep the raw text
      }
      throw new ApiError(code, message, response.status);
    }
    return JSON.parse(text) as T;
  }

  getGraph(): Promise<Graph> {
    return this.request<Graph>("GET", "/api/v1/graph");
  }

  getCommit(id: string): Promise<CommitDetail> {
    return this.request<CommitDetail>("GET", `/api/v1/commits/${encodeURIComponent(id)}`);
  }

  annotate(id: string, author: string, text: string): Promise<Annotation> {
    return this.request<Annotation>(
      "POST",
      `/api/v1/commits/${encodeURIComponent(id)}/annotations`,
      { author, text },
    );
  }

  restore(ref: string): Promise<{ commit: string }> {
    return this.request<{ commit: string }>(
      "POST",
      `/api/v1/restore/${encodeURIComponent(ref)}`,
    );
  }

  redo(ref: string): Promise<{ commit: string; measurement_id: string | null }> {
    return this.request<{ commit: string; measurement_id: string | null }>(
      "POST",
      `/api/v1/redo/${encodeURIComponent(ref)}`,
    );
  }

  getMindmap(): Promise<Mindmap> {
    return this.request<Mindmap>("GET", "/api/v1/mindmap");
  }

  putMindmap(mindmap: Mindmap): Promise<{ commit: string | null }> {
    return this.request<{ commit: string | null }>("PUT", "/api/v1/mindmap", mindmap);
  }

  async getNotes(): Promise<string> {
    const body = await this.request<{ text: string }>("GET", "/api/v1/notes");
    return body.text;
  }

  putNotes(text: string): Promise<{ commit: string | null }> {
    return this.request<{ commit: string | null }>("PUT", "/api/v1/notes", { text });
  }

  screenshotUrl(node: { screenshot_url: string }): string {
    return this.url(node.screenshot_url);
  }

  exportUrl(): string {
    return this.url("/api/v1/export");
  }

  eventsUrl(): string {
    return this.url("/api/v1/events");
  }
}
