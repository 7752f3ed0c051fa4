/**
 * Thin client for the /v1 API.
 *
 * All story state lives on the service; the client never caches
 * mutable documents, it just shuttles JSON. The fetch implementation
 * is injectable so tests can point it at a stub server.
 */

import type {
  HealthDoc,
  HistoryEntryDoc,
  InsightDetailDoc,
  NodeDoc,
  QueryTurnDoc,
  SessionSummaryDoc,
  StatusDoc,
  StoryDoc,
  SubspaceListingDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, code: string, message: string, detail?: unknown) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.detail = detail;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, "unreachable", `service unreachable: ${String(err)}`);
    }
    if (!resp.ok) {
      let code = "http_error";
      let message = `${resp.status} ${resp.statusText}`;
      let detail: unknown;
      try {
        const envelope = (await resp.json()) as Record<string, unknown>;
        if (typeof envelope.code === "string") code = envelope.code;
        if (typeof envelope.message === "string") message = envelope.message;
        detail = envelope.detail;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(resp.status, code, message, detail);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<HealthDoc> {
    return this.request("GET", "/v1/health");
  }

  createSession(csv: string, hints?: unknown): Promise<SessionSummaryDoc> {
    const body: Record<string, unknown> = { csv };
    if (hints !== undefined) body.hints = hints;
    return this.request("POST", "/v1/sessions", body);
  }

  getSession(sessionId: string): Promise<SessionSummaryDoc> {
    return this.request("GET", `/v1/sessions/${sessionId}`);
  }

  status(sessionId: string): Promise<StatusDoc> {
    return this.request("GET", `/v1/sessions/${sessionId}/status`);
  }

  /** filters are "Dimension=value" conjuncts; empty list is the root. */
  subspaces(sessionId: string, filters: string[]): Promise<SubspaceListingDoc> {
    const qs = filters.map((f) => `filter=${encodeURIComponent(f)}`).join("&");
    const suffix = qs ? `?${qs}` : "";
    return this.request("GET", `/v1/sessions/${sessionId}/subspaces${suffix}`);
  }

  insight(sessionId: string, insightId: string): Promise<InsightDetailDoc> {
    return this.request("GET", `/v1/sessions/${sessionId}/insights/${insightId}`);
  }

  seed(sessionId: string): Promise<{ seeded_nodes: NodeDoc[] }> {
    return this.request("POST", `/v1/sessions/${sessionId}/seed`);
  }

  query(sessionId: string, focusedNode: string, text: string, step?: number): Promise<QueryTurnDoc> {
    const body: Record<string, unknown> = { focused_node: focusedNode, text };
    if (step !== undefined) body.step = step;
    return this.request("POST", `/v1/sessions/${sessionId}/query`, body);
  }

  story(sessionId: string): Promise<StoryDoc> {
    return this.request("GET", `/v1/sessions/${sessionId}/story`);
  }

  putStory(sessionId: string, doc: StoryDoc): Promise<{ nodes: number; edges: number }> {
    return this.request("PUT", `/v1/sessions/${sessionId}/story`, doc);
  }

  addNode(sessionId: string, parent: string, insightId: string): Promise<{ node: NodeDoc }> {
    return this.request("POST", `/v1/sessions/${sessionId}/story/nodes`, {
      parent,
      insight_id: insightId,
    });
  }

  moveNode(sessionId: string, nodeId: string, newParent: string): Promise<{ node: NodeDoc }> {
    return this.request("POST", `/v1/sessions/${sessionId}/story/nodes/${nodeId}/move`, {
      new_parent: newParent,
    });
  }

  deleteNode(sessionId: string, nodeId: string): Promise<{ removed: string[] }> {
    return this.request("DELETE", `/v1/sessions/${sessionId}/story/nodes/${nodeId}`);
  }

  setNodeState(
    sessionId: string,
    nodeId: string,
    op: "collapse" | "expand" | "pin" | "unpin" | "focus",
  ): Promise<{ node: NodeDoc }> {
    return this.request("POST", `/v1/sessions/${sessionId}/story/nodes/${nodeId}/state`, { op });
  }

  history(sessionId: string, nodeId: string): Promise<{ path: HistoryEntryDoc[] }> {
    return this.request("GET", `/v1/sessions/${sessionId}/story/nodes/${nodeId}/history`);
  }
}
