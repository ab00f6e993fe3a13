"""HTTP session service for human navigation trials.

Sessions serve a fixed sequence of queries from one dataset split and
enforce the trial protocol: a per-node peek budget, a hop limit, a wall
-clock time budget, and an explicit give-up action. Every session appends
its actions to a JSON-lines transcript; replaying a transcript through the
same environment reproduces every outcome, which is also how persisted
sessions are restored after a restart.
"""

from __future__ import annotations

import json
import logging
import os
import random
import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .env import EnvConfig, EpisodeState, NavEnv, Observation
from .errors import (
    BudgetExceeded,
    DataError,
    EpisodeOver,
    MoveUnexplored,
    SessionExpired,
    WebNavError,
)
from .graph import NavGraph
from .tasks import DatasetSplits, load_splits

log = logging.getLogger(__name__)

DEFAULT_MAX_QUERIES = 20
DEFAULT_TIME_BUDGET_S = 7200.0
DEFAULT_PEEK_BUDGET = 4

OUTCOME_NAMES = ("success", "failure", "gave-up", "timeout")


class UnknownSession(WebNavError):
    code = "UnknownSession"


class UnknownDataset(WebNavError):
    code = "UnknownDataset"


class BadAction(WebNavError):
    code = "BadAction"


_STATUS = {
    "UnknownSession": 404,
    "UnknownDataset": 404,
    "SessionExpired": 410,
    "BadAction": 400,
    "IndexError": 400,
    "BudgetExceeded": 409,
    "MoveUnexplored": 409,
    "EpisodeOver": 409,
    "DataError": 422,
}


@dataclass
class TrialRecord:
    query_index: int  # example index within the split
    outcome: str | None = None
    reward: int = 0
    actions: list[dict] = field(default_factory=list)
    nodes_visited: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "query_index": self.query_index,
            "outcome": self.outcome,
            "reward": self.reward,
            "actions": self.actions,
            "nodes_visited": self.nodes_visited,
        }


@dataclass
class Session:
    session_id: str
    dataset_id: str
    split: str
    env: NavEnv
    examples: list
    indices: list[int]
    started_at: float
    time_budget_s: float
    cursor: int = 0
    state: EpisodeState | None = None
    trials: list[TrialRecord] = field(default_factory=list)
    closed: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def begin_trial(self) -> None:
        idx = self.indices[self.cursor]
        self.state, _ = self.env.reset(self.examples[idx])
        self.trials.append(TrialRecord(query_index=idx))
        self.trials[-1].nodes_visited.append(self.state.current)

    def expired_at(self, now: float) -> bool:
        return now - self.started_at > self.time_budget_s

    def summary(self) -> dict:
        presented = [t for t in self.trials if t.outcome is not None]
        successes = sum(1 for t in presented if t.outcome == "success")
        n = len(presented)
        return {
            "session": self.session_id,
            "dataset": self.dataset_id,
            "split": self.split,
            "trials": n,
            "successes": successes,
            "average_reward": successes / n if n else 0.0,
            "complete": self.closed,
            "per_trial": [t.to_dict() for t in presented],
        }


class SessionService:
    """All session state plus the transcript log; independent of HTTP."""

    def __init__(
        self,
        graph: NavGraph,
        datasets: dict[str, DatasetSplits],
        store_dir: str | None = None,
        clock: Callable[[], float] | None = None,
    ):
        self.graph = graph
        self.datasets = datasets
        self.store_dir = store_dir
        self.clock = clock or time.time
        self.sessions: dict[str, Session] = {}
        if store_dir:
            os.makedirs(store_dir, exist_ok=True)
            self._restore_all()

    # -- transcript log ----------------------------------------------------

    def _log_event(self, session_id: str, event: dict) -> None:
        if not self.store_dir:
            return
        path = os.path.join(self.store_dir, f"{session_id}.jsonl")
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False, sort_keys=True))
            fh.write("\n")

    def _restore_all(self) -> None:
        for name in sorted(os.listdir(self.store_dir)):
            if not name.endswith(".jsonl"):
                continue
            path = os.path.join(self.store_dir, name)
            try:
                self.replay_transcript(path)
            except Exception as exc:
                log.warning("could not restore session from %s: %s", path, exc)

    def replay_transcript(self, path: str) -> Session:
        """Rebuild a session by re-applying its recorded actions."""
        with open(path, encoding="utf-8") as fh:
            events = [json.loads(line) for line in fh if line.strip()]
        if not events or events[0].get("event") != "created":
            raise DataError(f"{path}: transcript does not start with a created event")
        head = events[0]
        session = self._make_session(
            session_id=head["session"],
            dataset_id=head["dataset"],
            split=head["split"],
            limits=head["limits"],
            indices=head["indices"],
            started_at=head["t"],
            log_creation=False,
        )
        for event in events[1:]:
            kind = event.get("event")
            if kind == "action":
                try:
                    self.apply_action(
                        session, event["type"], event.get("edge"), now=event["t"],
                        log_event=False,
                    )
                except (WebNavError, IndexError):
                    pass  # rejected actions were rejected live as well
            elif kind in ("trial_end", "session_end"):
                # clock expiry can materialize outside any action (e.g. on an
                # observation poll); re-derive it from the recorded time
                with session.lock:
                    self._check_clock(session, event["t"], log_event=False)
        return session

    # -- session lifecycle ---------------------------------------------------

    def _make_session(
        self,
        session_id: str,
        dataset_id: str,
        split: str,
        limits: dict,
        indices: list[int],
        started_at: float,
        log_creation: bool = True,
    ) -> Session:
        splits = self.datasets.get(dataset_id)
        if splits is None:
            raise UnknownDataset(f"unknown dataset {dataset_id!r}")
        examples = splits.split(split)
        cfg = EnvConfig(
            n_n=int(limits["n_n"]),
            n_h=int(limits["n_h"]),
            allow_blind_moves=False,
        )
        session = Session(
            session_id=session_id,
            dataset_id=dataset_id,
            split=split,
            env=NavEnv(self.graph, cfg),
            examples=examples,
            indices=indices,
            started_at=started_at,
            time_budget_s=float(limits["time_budget_seconds"]),
        )
        session.begin_trial()
        self.sessions[session_id] = session
        if log_creation:
            self._log_event(session_id, {
                "event": "created",
                "session": session_id,
                "dataset": dataset_id,
                "split": split,
                "limits": limits,
                "indices": indices,
                "t": started_at,
            })
        return session

    def create_session(
        self,
        dataset_id: str,
        split: str = "test",
        limits: dict | None = None,
        seed: int | None = None,
    ) -> Session:
        splits = self.datasets.get(dataset_id)
        if splits is None:
            raise UnknownDataset(f"unknown dataset {dataset_id!r}")
        examples = splits.split(split)
        if not examples:
            raise DataError(f"dataset {dataset_id!r} split {split!r} is empty")
        limits = dict(limits or {})
        limits.setdefault("max_queries", DEFAULT_MAX_QUERIES)
        limits.setdefault("time_budget_seconds", DEFAULT_TIME_BUDGET_S)
        limits.setdefault("n_n", DEFAULT_PEEK_BUDGET)
        limits.setdefault("n_h", splits.meta.get("n_h", 16))
        n = min(int(limits["max_queries"]), len(examples))
        rng = random.Random(seed)
        indices = rng.sample(range(len(examples)), n)
        return self._make_session(
            session_id=secrets.token_urlsafe(16),
            dataset_id=dataset_id,
            split=split,
            limits=limits,
            indices=indices,
            started_at=self.clock(),
        )

    def get_session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"unknown session {session_id!r}")
        return session

    def _check_clock(self, session: Session, now: float,
                     log_event: bool = True) -> None:
        """Close the session with a timeout if the budget has elapsed."""
        if session.closed or not session.expired_at(now):
            return
        trial = session.trials[-1] if session.trials else None
        if trial is not None and trial.outcome is None:
            trial.outcome = "timeout"
            trial.reward = 0
            if log_event:
                self._log_event(session.session_id, {
                    "event": "trial_end", "trial": len(session.trials) - 1,
                    "outcome": "timeout", "reward": 0, "t": now,
                })
        session.closed = True
        if log_event:
            self._log_event(session.session_id, {"event": "session_end", "t": now})

    def observation_payload(self, session: Session, now: float | None = None) -> dict:
        now = self.clock() if now is None else now
        with session.lock:
            self._check_clock(session, now)
            if session.closed:
                raise SessionExpired("session is over")
            st = session.state
            obs = session.env.observe(st)
            return self._obs_json(session, st, obs, now)

    def _obs_json(self, session: Session, st: EpisodeState, obs: Observation,
                  now: float) -> dict:
        # link anchors (neighbor titles) are visible before peeking; neighbor
        # text is revealed only through a peek
        return {
            "query": obs.query,
            "title": obs.title,
            "text": obs.text,
            "out_degree": obs.out_degree,
            "neighbor_titles": [
                self.graph.titles[nb] for nb in self.graph.edges[st.current]
            ],
            "peeked": {
                str(i): {"title": t, "text": x} for i, (t, x) in obs.peeked.items()
            },
            "hops_taken": st.hops_taken,
            "remaining_peeks": session.env.cfg.n_n - len(st.peeked),
            "remaining_time_s": max(
                0.0, session.time_budget_s - (now - session.started_at)
            ),
            "trial": len(session.trials),
            "total_trials": len(session.indices),
            "limits": {
                "n_n": session.env.cfg.n_n,
                "n_h": session.env.cfg.n_h,
            },
        }

    def apply_action(
        self,
        session: Session,
        action_type: str,
        edge: int | None = None,
        now: float | None = None,
        log_event: bool = True,
    ) -> dict:
        now = self.clock() if now is None else now
        with session.lock:
            self._check_clock(session, now, log_event=log_event)
            if session.closed:
                raise SessionExpired("session is over")
            st = session.state
            trial = session.trials[-1]
            env = session.env
            result: dict = {"type": action_type}
            if log_event:
                self._log_event(session.session_id, {
                    "event": "action", "trial": len(session.trials) - 1,
                    "type": action_type, "edge": edge, "t": now,
                })
            if action_type == "peek":
                if edge is None:
                    raise BadAction("peek needs an edge index")
                env.peek(st, int(edge))
            elif action_type == "move":
                if edge is None:
                    raise BadAction("move needs an edge index")
                env.step_move(st, int(edge))
                trial.nodes_visited.append(st.current)
            elif action_type == "stop":
                result["reward"] = env.step_stop(st)
            elif action_type == "giveup":
                env.give_up(st)
            else:
                raise BadAction(f"unknown action type {action_type!r}")
            trial.actions.append({"type": action_type, "edge": edge, "t": now})

            if st.finished:
                outcome = st.outcome
                if outcome.kind == "stopped":
                    trial.outcome = "success" if outcome.reward else "failure"
                elif outcome.kind == "gave-up":
                    trial.outcome = "gave-up"
                else:  # hop-limit
                    trial.outcome = "failure"
                trial.reward = outcome.reward
                result["trial_complete"] = True
                result["outcome"] = trial.outcome
                result.setdefault("reward", outcome.reward)
                if log_event:
                    self._log_event(session.session_id, {
                        "event": "trial_end", "trial": len(session.trials) - 1,
                        "outcome": trial.outcome, "reward": trial.reward, "t": now,
                    })
                session.cursor += 1
                if session.cursor >= len(session.indices):
                    session.closed = True
                    if log_event:
                        self._log_event(session.session_id,
                                        {"event": "session_end", "t": now})
                    result["session_complete"] = True
                else:
                    session.begin_trial()
                    result["observation"] = self._obs_json(
                        session, session.state, env.observe(session.state), now
                    )
            else:
                result["trial_complete"] = False
                result["observation"] = self._obs_json(
                    session, st, env.observe(st), now
                )
            return result


def load_datasets(data_dir: str) -> dict[str, DatasetSplits]:
    """A dataset directory either is, or contains, dataset split folders."""
    if os.path.exists(os.path.join(data_dir, "meta.json")):
        return {os.path.basename(os.path.normpath(data_dir)): load_splits(data_dir)}
    found: dict[str, DatasetSplits] = {}
    for name in sorted(os.listdir(data_dir)):
        sub = os.path.join(data_dir, name)
        if os.path.isdir(sub) and os.path.exists(os.path.join(sub, "meta.json")):
            found[name] = load_splits(sub)
    if not found:
        raise DataError(f"{data_dir}: no datasets found")
    return found


def create_app(
    graph: NavGraph,
    datasets: dict[str, DatasetSplits],
    store_dir: str | None = None,
    ui_dir: str | None = None,
    clock: Callable[[], float] | None = None,
) -> FastAPI:
    service = SessionService(graph, datasets, store_dir=store_dir, clock=clock)
    app = FastAPI(title="webnav trials")
    app.state.service = service

    @app.exception_handler(WebNavError)
    async def _webnav_error(_req: Request, exc: WebNavError):
        code = getattr(exc, "code", type(exc).__name__)
        return JSONResponse(
            status_code=_STATUS.get(code, 422),
            content={"code": code, "message": str(exc)},
        )

    @app.exception_handler(IndexError)
    async def _index_error(_req: Request, exc: IndexError):
        return JSONResponse(status_code=400,
                            content={"code": "IndexError", "message": str(exc)})

    @app.get("/api/datasets")
    def list_datasets():
        out = []
        for name, splits in sorted(service.datasets.items()):
            out.append({
                "id": name,
                "counts": {s: len(splits.split(s))
                           for s in ("train", "valid", "test")},
                "n_h": splits.meta.get("n_h"),
                "n_q": splits.meta.get("n_q"),
                "kind": splits.meta.get("kind"),
            })
        return out

    @app.post("/api/sessions")
    def create_session(body: dict | None = None):
        body = body or {}
        if "dataset" not in body:
            raise BadAction("body must name a dataset")
        session = service.create_session(
            dataset_id=body["dataset"],
            split=body.get("split", "test"),
            limits=body.get("limits"),
            seed=body.get("seed"),
        )
        return {
            "session": session.session_id,
            "limits": {
                "max_queries": len(session.indices),
                "time_budget_seconds": session.time_budget_s,
                "n_n": session.env.cfg.n_n,
                "n_h": session.env.cfg.n_h,
            },
            "observation": service.observation_payload(session),
        }

    @app.get("/api/sessions/{session_id}/observation")
    def get_observation(session_id: str):
        return service.observation_payload(service.get_session(session_id))

    @app.post("/api/sessions/{session_id}/actions")
    def post_action(session_id: str, body: dict):
        session = service.get_session(session_id)
        return service.apply_action(session, body.get("type", ""), body.get("edge"))

    @app.get("/api/sessions/{session_id}/summary")
    def get_summary(session_id: str):
        return service.get_session(session_id).summary()

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
