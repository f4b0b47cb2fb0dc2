// Thin fetch client for the session service; every method maps 1:1 onto an
// endpoint and returns the parsed JSON body.

import type { ActResponse, SessionConfig, SessionDescriptor } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parse<T>(response: Response): Promise<T> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail =
      typeof body === "object" && body !== null && "detail" in body
        ? JSON.stringify((body as { detail: unknown }).detail)
        : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetcher: typeof fetch = fetch,
  ) {}

  createSession(kind: string, config: SessionConfig = {}): Promise<SessionDescriptor> {
    return this.request("POST", "/api/sessions", { kind, config });
  }

  getSession(id: string, debug = false): Promise<SessionDescriptor> {
    return this.request("GET", `/api/sessions/${id}${debug ? "?debug=1" : ""}`);
  }

  answer(id: string, answerChoice: number): Promise<ActResponse> {
    return this.request("POST", `/api/sessions/${id}/act`, { answer_choice: answerChoice });
  }

  speak(id: string, statementId: string): Promise<ActResponse> {
    return this.request("POST", `/api/sessions/${id}/act`, { statement_id: statementId });
  }

  deleteSession(id: string): Promise<void> {
    return this.fetcher(`${this.base}/api/sessions/${id}`, { method: "DELETE" }).then(
      (response) => {
        if (!response.ok && response.status !== 204) {
          throw new ApiError(response.status, response.statusText);
        }
      },
    );
  }

  eventsUrl(id: string): string {
    return `${this.base}/api/sessions/${id}/events`;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetcher(`${this.base}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return parse<T>(response);
  }
}
