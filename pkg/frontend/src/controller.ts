/**
 * Drives one trial session: issues API calls, reduces their responses into
 * the UI state, and serializes user actions (one in-flight request at a
 * time; buttons stay disabled until the server answers).
 */

import { Action, ApiClient, ApiErrorException } from "./api.js";
import {
  UiSessionState,
  initialState,
  onActionResult,
  onCreated,
  onError,
  onObservation,
  onSummary,
} from "./state.js";

export type Listener = (state: UiSessionState, busy: boolean) => void;

export class SessionController {
  private state: UiSessionState = initialState();
  private listeners: Listener[] = [];
  private inFlight = false;

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.state, this.inFlight);
  }

  get current(): UiSessionState {
    return this.state;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state, this.inFlight);
    }
  }

  private set(state: UiSessionState): void {
    this.state = state;
    this.emit();
  }

  /** Run one exchange with the busy flag held; concurrent calls are dropped. */
  private async exchange(run: () => Promise<void>): Promise<void> {
    if (this.inFlight) {
      return;
    }
    this.inFlight = true;
    this.emit();
    try {
      await run();
    } catch (err) {
      await this.handleError(err);
    } finally {
      this.inFlight = false;
      this.emit();
    }
  }

  private async handleError(err: unknown): Promise<void> {
    if (!(err instanceof ApiErrorException)) {
      this.set(onError(this.state, { code: "Transport", message: String(err) }));
      return;
    }
    if (err.payload.code === "UnknownSession") {
      // stale stored session (server store was reset); back to the start
      this.set({ ...initialState(), error: err.payload });
      return;
    }
    this.set(onError(this.state, err.payload));
    const sessionId = this.state.sessionId;
    if (!sessionId) {
      return;
    }
    if (err.payload.code === "SessionExpired") {
      this.set(onSummary(this.state, await this.api.getSummary(sessionId)));
    } else if (
      err.payload.code === "BudgetExceeded" ||
      err.payload.code === "MoveUnexplored" ||
      err.payload.code === "EpisodeOver"
    ) {
      // lost a race against the server; reconcile to its view
      this.set(onObservation(this.state, await this.api.getObservation(sessionId)));
    }
  }

  async start(dataset: string, maxQueries?: number, seed?: number): Promise<void> {
    await this.exchange(async () => {
      const limits = maxQueries === undefined ? undefined : { max_queries: maxQueries };
      const resp = await this.api.createSession(dataset, limits, seed);
      this.set(onCreated(this.state, resp));
    });
  }

  /** Re-attach to an existing session (page reload). */
  async resume(sessionId: string): Promise<void> {
    await this.exchange(async () => {
      this.set({ ...initialState(), sessionId, screen: "trial" });
      this.set(onObservation(this.state, await this.api.getObservation(sessionId)));
    });
  }

  private async action(action: Action): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) {
      return;
    }
    await this.exchange(async () => {
      const result = await this.api.act(sessionId, action);
      this.set(onActionResult(this.state, result));
      if (result.session_complete) {
        this.set(onSummary(this.state, await this.api.getSummary(sessionId)));
      }
    });
  }

  peek(edge: number): Promise<void> {
    return this.action({ type: "peek", edge });
  }

  move(edge: number): Promise<void> {
    return this.action({ type: "move", edge });
  }

  stop(): Promise<void> {
    return this.action({ type: "stop" });
  }

  giveUp(): Promise<void> {
    return this.action({ type: "giveup" });
  }

  async showSummary(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) {
      return;
    }
    await this.exchange(async () => {
      this.set(onSummary(this.state, await this.api.getSummary(sessionId)));
    });
  }
}
