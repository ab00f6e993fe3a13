/** Thin typed wrapper over the eval-service JSON API. */

import type {
  ActionResult,
  ApiError,
  CreateResponse,
  DatasetInfo,
  Observation,
  SessionLimits,
  Summary,
} from "./state.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiErrorException extends Error {
  constructor(
    public readonly status: number,
    public readonly payload: ApiError,
  ) {
    super(`${payload.code}: ${payload.message}`);
  }
}

export type Action =
  | { type: "peek"; edge: number }
  | { type: "move"; edge: number }
  | { type: "stop" }
  | { type: "giveup" };

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    const payload = await res.json();
    if (!res.ok) {
      throw new ApiErrorException(res.status, payload as ApiError);
    }
    return payload as T;
  }

  listDatasets(): Promise<DatasetInfo[]> {
    return this.request("GET", "/api/datasets");
  }

  createSession(
    dataset: string,
    limits?: Partial<SessionLimits>,
    seed?: number,
  ): Promise<CreateResponse> {
    return this.request("POST", "/api/sessions", { dataset, limits, seed });
  }

  getObservation(sessionId: string): Promise<Observation> {
    return this.request("GET", `/api/sessions/${sessionId}/observation`);
  }

  act(sessionId: string, action: Action): Promise<ActionResult> {
    return this.request("POST", `/api/sessions/${sessionId}/actions`, action);
  }

  getSummary(sessionId: string): Promise<Summary> {
    return this.request("GET", `/api/sessions/${sessionId}/summary`);
  }
}
