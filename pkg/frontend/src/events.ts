/** Server-sent change feed with automatic JSON decoding.
 *
 * The EventSource constructor is injectable because test runtimes
 * (and a few embedded webviews) do not ship one.
 */

import type { ChangeEvent } from "./types.js";

export interface EventSourceLike {
  addEventListener(type: string, listener: (event: MessageEvent) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export class ChangeFeed {
  private source: EventSourceLike | null = null;

  constructor(
    private readonly url: string,
    private readonly factory: EventSourceFactory,
  ) {}

  start(onChange: (event: ChangeEvent) => void): void {
    if (this.source) return;
    this.source = this.factory(this.url);
    this.source.addEventListener("change", (event) => {
      let payload: ChangeEvent;
      try {
        payload = JSON.parse(String(event.data)) as ChangeEvent;
      } catch {
        return; // a malformed frame must not kill the feed
      }
      onChange(payload);
    });
  }

  stop(): void {
    this.source?.close();
    this.source = null;
  }
}

export function defaultEventSourceFactory(url: string): EventSourceLike {
  const ctor = (globalThis as { EventSource?: new (url: string) => EventSourceLike })
    .EventSource;
  if (!ctor) {
    throw new Error("EventSource is not available in this runtime");
  }
  return new ctor(url);
}
