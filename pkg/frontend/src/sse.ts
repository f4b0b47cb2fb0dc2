// Minimal server-sent-events reader over fetch streams, so the same code
// runs in browsers and in node-based tests.  Supports resuming via
// Last-Event-ID and cancellation through an AbortSignal.

import type { SessionEvent } from "./types.js";

export interface StreamOptions {
  lastEventId?: number;
  signal?: AbortSignal;
  fetcher?: typeof fetch;
}

export async function readEventStream(
  url: string,
  onEvent: (event: SessionEvent) => void,
  options: StreamOptions = {},
): Promise<void> {
  const fetcher = options.fetcher ?? fetch;
  const headers: Record<string, string> = { Accept: "text/event-stream" };
  if (options.lastEventId !== undefined) {
    headers["Last-Event-ID"] = String(options.lastEventId);
  }
  const response = await fetcher(url, { headers, signal: options.signal });
  if (!response.ok || response.body === null) {
    throw new Error(`event stream failed: HTTP ${response.status}`);
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        break;
      }
      buffer += decoder.decode(value, { stream: true });
      let boundary = buffer.indexOf("\n\n");
      while (boundary >= 0) {
        const chunk = buffer.slice(0, boundary);
        buffer = buffer.slice(boundary + 2);
        const data = chunk
          .split("\n")
          .filter((line) => line.startsWith("data:"))
          .map((line) => line.slice(5).trim())
          .join("\n");
        if (data) {
          onEvent(JSON.parse(data) as SessionEvent);
        }
        boundary = buffer.indexOf("\n\n");
      }
    }
  } finally {
    reader.releaseLock();
  }
}
