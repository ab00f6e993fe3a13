/**
 * Session state for the human-play client.
 *
 * The server is authoritative: every mutation here is a pure reduction of a
 * server payload (create response, observation, action result, summary, or
 * error). The UI layer renders this state and never invents its own.
 */

export interface PeekedNeighbor {
  title: string;
  text: string;
}

export interface Observation {
  query: string;
  title: string;
  text: string;
  out_degree: number;
  neighbor_titles: string[];
  peeked: Record<string, PeekedNeighbor>;
  hops_taken: number;
  remaining_peeks: number;
  remaining_time_s: number;
  trial: number;
  total_trials: number;
  limits: { n_n: number; n_h: number };
}

export interface SessionLimits {
  max_queries: number;
  time_budget_seconds: number;
  n_n: number;
  n_h: number;
}

export interface CreateResponse {
  session: string;
  limits: SessionLimits;
  observation: Observation;
}

export interface ActionResult {
  type: string;
  reward?: number;
  trial_complete: boolean;
  outcome?: string;
  session_complete?: boolean;
  observation?: Observation;
}

export interface TrialRecord {
  query_index: number;
  outcome: string;
  reward: number;
}

export interface Summary {
  session: string;
  dataset: string;
  split: string;
  trials: number;
  successes: number;
  average_reward: number;
  complete: boolean;
  per_trial: TrialRecord[];
}

export interface ApiError {
  code: string;
  message: string;
}

export interface DatasetInfo {
  id: string;
  counts: Record<string, number>;
  n_h: number | null;
  n_q: number | null;
  kind: string | null;
}

export type Screen = "start" | "trial" | "summary" | "error";

export interface UiSessionState {
  screen: Screen;
  sessionId: string | null;
  limits: SessionLimits | null;
  observation: Observation | null;
  trialsCompleted: number;
  successes: number;
  lastOutcome: string | null;
  lastReward: number | null;
  summary: Summary | null;
  error: ApiError | null;
}

export function initialState(): UiSessionState {
  return {
    screen: "start",
    sessionId: null,
    limits: null,
    observation: null,
    trialsCompleted: 0,
    successes: 0,
    lastOutcome: null,
    lastReward: null,
    summary: null,
    error: null,
  };
}

export function onCreated(state: UiSessionState, resp: CreateResponse): UiSessionState {
  return {
    ...initialState(),
    screen: "trial",
    sessionId: resp.session,
    limits: resp.limits,
    observation: resp.observation,
  };
}

export function onObservation(state: UiSessionState, obs: Observation): UiSessionState {
  return { ...state, screen: "trial", observation: obs, error: null };
}

export function onActionResult(state: UiSessionState, res: ActionResult): UiSessionState {
  let next = { ...state, error: null };
  if (res.trial_complete) {
    next.trialsCompleted = state.trialsCompleted + 1;
    next.lastOutcome = res.outcome ?? null;
    next.lastReward = res.reward ?? null;
    if (res.outcome === "success") {
      next.successes = state.successes + 1;
    }
  }
  if (res.observation) {
    next.observation = res.observation;
  }
  return next;
}

export function onSummary(state: UiSessionState, summary: Summary): UiSessionState {
  return {
    ...state,
    screen: "summary",
    summary,
    trialsCompleted: summary.trials,
    successes: summary.successes,
  };
}

/** Budget and ordering races resolve toward the server; expiry ends the session. */
export function onError(state: UiSessionState, error: ApiError): UiSessionState {
  if (error.code === "SessionExpired") {
    return { ...state, error };
  }
  return { ...state, screen: state.sessionId ? state.screen : "error", error };
}

/** True when the move button for an edge may be enabled. */
export function canMove(obs: Observation, edge: number): boolean {
  return Object.prototype.hasOwnProperty.call(obs.peeked, String(edge));
}

/** True when the peek button for an edge may be enabled. */
export function canPeek(obs: Observation, edge: number): boolean {
  return canMove(obs, edge) || obs.remaining_peeks > 0;
}
