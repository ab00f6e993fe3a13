"""Partially observed navigation episodes over a shared immutable graph.

An episode exposes only the current node's text plus the neighbors the agent
has explicitly peeked at (at most ``n_n`` distinct edges per node). Moving
consumes a hop from a budget of ``n_h``; reaching the budget force-finishes
the episode with reward 0. Stopping pays 1 iff the query occurs verbatim
(token-wise) in the current node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BudgetExceeded, DataError, EpisodeOver, MoveUnexplored
from .graph import NavGraph
from .tasks import Example
from .textutil import token_seq_contains, tokenize

OUTCOME_STOPPED = "stopped"
OUTCOME_GAVE_UP = "gave-up"
OUTCOME_HOP_LIMIT = "hop-limit"


def contains(node_text: str, query: str) -> bool:
    """Reward predicate: the query's token sequence occurs contiguously in the text."""
    query_tokens = tokenize(query)
    if not query_tokens:
        raise DataError("query has no tokens after normalization")
    return token_seq_contains(tokenize(node_text), query_tokens)


@dataclass(frozen=True)
class EnvConfig:
    n_n: int  # max peeked edges per node
    n_h: int  # max hops per episode
    n_q: int = 0  # query sentence count, carried as metadata
    allow_blind_moves: bool = False

    def __post_init__(self):
        if self.n_n < 1 or self.n_h < 1:
            raise DataError("n_n and n_h must be >= 1")


@dataclass(frozen=True)
class Outcome:
    kind: str  # stopped | gave-up | hop-limit
    reward: int


@dataclass
class EpisodeState:
    example: Example
    current: int
    hops_taken: int = 0
    peeked: set[int] = field(default_factory=set)  # edge indices at the current node
    finished: bool = False
    outcome: Outcome | None = None


@dataclass(frozen=True)
class Observation:
    query: str
    title: str
    text: str
    out_degree: int
    peeked: dict[int, tuple[str, str]]  # edge index -> (title, text)


class NavEnv:
    """Episode driver bound to one graph and one rule configuration."""

    def __init__(self, graph: NavGraph, cfg: EnvConfig):
        self.graph = graph
        self.cfg = cfg

    def observe(self, st: EpisodeState) -> Observation:
        g = self.graph
        peeked = {}
        for i in sorted(st.peeked):
            nb = g.edges[st.current][i]
            peeked[i] = (g.titles[nb], g.texts[nb])
        return Observation(
            query=st.example.query,
            title=g.titles[st.current],
            text=g.texts[st.current],
            out_degree=g.out_degree(st.current),
            peeked=peeked,
        )

    def reset(self, example: Example) -> tuple[EpisodeState, Observation]:
        if not example.path:
            raise DataError("example with empty path")
        st = EpisodeState(example=example, current=self.graph.start_node)
        return st, self.observe(st)

    def _check_live(self, st: EpisodeState) -> None:
        if st.finished:
            raise EpisodeOver("episode already finished")

    def _check_edge(self, st: EpisodeState, edge_index: int) -> None:
        degree = self.graph.out_degree(st.current)
        if not 0 <= edge_index < degree:
            raise IndexError(
                f"edge index {edge_index} out of range (out-degree {degree})"
            )

    def peek(self, st: EpisodeState, edge_index: int) -> Observation:
        """Reveal one neighbor; repeat peeks of the same edge are free."""
        self._check_live(st)
        self._check_edge(st, edge_index)
        if edge_index not in st.peeked:
            if len(st.peeked) >= self.cfg.n_n:
                raise BudgetExceeded(
                    f"all {self.cfg.n_n} peek slots used at this node"
                )
            st.peeked.add(edge_index)
        return self.observe(st)

    def step_move(self, st: EpisodeState, edge_index: int) -> Observation:
        """Follow a previously peeked edge (or any edge with allow_blind_moves)."""
        self._check_live(st)
        self._check_edge(st, edge_index)
        if edge_index not in st.peeked and not self.cfg.allow_blind_moves:
            raise MoveUnexplored(f"edge {edge_index} was never peeked at")
        st.current = self.graph.edges[st.current][edge_index]
        st.hops_taken += 1
        st.peeked.clear()
        if st.hops_taken >= self.cfg.n_h:
            st.finished = True
            st.outcome = Outcome(OUTCOME_HOP_LIMIT, 0)
        return self.observe(st)

    def step_stop(self, st: EpisodeState) -> int:
        """Declare the current node an answer; pays the binary reward."""
        self._check_live(st)
        reward = int(contains(self.graph.texts[st.current], st.example.query))
        st.finished = True
        st.outcome = Outcome(OUTCOME_STOPPED, reward)
        return reward

    def give_up(self, st: EpisodeState) -> None:
        self._check_live(st)
        st.finished = True
        st.outcome = Outcome(OUTCOME_GAVE_UP, 0)
