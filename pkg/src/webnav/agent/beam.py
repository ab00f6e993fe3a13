"""Forward-only beam search over the navigation graph.

At each depth every live trace expands over its full action distribution;
the ``width`` most likely expansions survive jointly, and surviving
expansions that chose the stop action retire to the finished pool. With
width 1 this reduces exactly to greedy argmax decoding. Traces still live
at the hop limit are force-finished at their current node without a stop
term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..graph import NavGraph
from .model import (
    QUERY_ATT,
    AgentParameters,
    QueryEncoding,
    StepState,
    action_logprobs,
    forward_step,
    init_step_state,
    query_context_vectors,
)


@dataclass(frozen=True)
class Trace:
    """A (partial) navigation: visited nodes, chosen actions, and its score."""

    nodes: tuple[int, ...]
    actions: tuple[int, ...]
    logp: float
    stopped: bool  # True when the trace chose stop; False when force-finished
    state: StepState | None = None

    @property
    def end_node(self) -> int:
        return self.nodes[-1]


def beam_search(
    params: AgentParameters,
    g: NavGraph,
    phi: np.ndarray,
    qenc: QueryEncoding,
    width: int,
    n_h: int,
) -> list[Trace]:
    """Ranked finished traces (best first), truncated to ``width``."""
    if width < 1:
        raise ValueError(f"beam width must be >= 1, got {width}")
    cfg = params.config
    contexts = (
        query_context_vectors(params, qenc.emb) if cfg.query_mode == QUERY_ATT else None
    )
    live = [Trace((g.start_node,), (), 0.0, False, init_step_state(cfg))]
    finished: list[Trace] = []
    for depth in range(n_h + 1):
        if not live:
            break
        if depth == n_h:
            finished.extend(
                Trace(t.nodes, t.actions, t.logp, False) for t in live
            )
            break
        expansions: list[tuple[float, Trace]] = []
        for trace in live:
            node = trace.end_node
            h, state, _ = forward_step(params, phi[node], qenc, trace.state, contexts)
            nb = g.edges[node]
            nb_phis = phi[nb] if nb else np.zeros((0, cfg.dim))
            logp = action_logprobs(params, h, nb_phis)
            for j, target in enumerate(nb):
                expansions.append((
                    trace.logp + logp[j],
                    Trace(trace.nodes + (target,), trace.actions + (j,),
                          trace.logp + logp[j], False, state),
                ))
            stop_lp = trace.logp + logp[len(nb)]
            expansions.append((
                stop_lp,
                Trace(trace.nodes, trace.actions + (len(nb),), stop_lp, True),
            ))
        expansions.sort(key=lambda item: -item[0])  # stable: earlier trace wins ties
        live = []
        for _, trace in expansions[:width]:
            if trace.stopped:
                finished.append(trace)
            else:
                live.append(trace)
    finished.sort(key=lambda t: -t.logp)
    return [Trace(t.nodes, t.actions, t.logp, t.stopped) for t in finished[:width]]


def greedy_decode(
    params: AgentParameters,
    g: NavGraph,
    phi: np.ndarray,
    qenc: QueryEncoding,
    n_h: int,
) -> Trace:
    """Argmax decoding; reference behavior for beam width 1."""
    cfg = params.config
    contexts = (
        query_context_vectors(params, qenc.emb) if cfg.query_mode == QUERY_ATT else None
    )
    state = init_step_state(cfg)
    nodes = (g.start_node,)
    actions: tuple[int, ...] = ()
    total = 0.0
    for _ in range(n_h):
        node = nodes[-1]
        h, state, _ = forward_step(params, phi[node], qenc, state, contexts)
        nb = g.edges[node]
        nb_phis = phi[nb] if nb else np.zeros((0, cfg.dim))
        logp = action_logprobs(params, h, nb_phis)
        best = int(np.argmax(logp))
        total += logp[best]
        actions = actions + (best,)
        if best == len(nb):
            return Trace(nodes, actions, total, True)
        nodes = nodes + (nb[best],)
    return Trace(nodes, actions, total, False)
