import numpy as np
import pytest

from webnav.agent.beam import Trace, beam_search, greedy_decode
from webnav.agent.model import (
    AgentConfig,
    action_logprobs,
    forward_step,
    init_parameters,
    init_step_state,
    prepare_query,
    query_context_vectors,
)
from webnav.embeddings import WordVectors
from webnav.graph import NavGraph


def exhaustive_traces(params, g, phi, qenc, n_h):
    """Oracle: enumerate every action sequence up to depth n_h.

    Mirrors the task rules only (not the beam): a sequence either stops
    voluntarily (gaining the stop log-probability) or is cut at depth n_h.
    """
    cfg = params.config
    contexts = (
        query_context_vectors(params, qenc.emb) if cfg.query_mode == "att" else None
    )
    results = []

    def walk(node, state, nodes, actions, logp, depth):
        if depth == n_h:
            results.append(Trace(nodes, actions, logp, False))
            return
        h, new_state, _ = forward_step(params, phi[node], qenc, state, contexts)
        nb = g.edges[node]
        nb_phis = phi[nb] if nb else np.zeros((0, cfg.dim))
        lp = action_logprobs(params, h, nb_phis)
        results.append(
            Trace(nodes, actions + (len(nb),), logp + lp[len(nb)], True)
        )
        for j, target in enumerate(nb):
            walk(target, new_state, nodes + (target,), actions + (j,),
                 logp + lp[j], depth + 1)

    walk(g.start_node, init_step_state(cfg), (g.start_node,), (), 0.0, 0)
    return sorted(results, key=lambda t: -t.logp)


@pytest.fixture
def small_world():
    # out-degree <= 2, depth-3 searches stay enumerable
    edges = [[1, 2], [3, 2], [3], [0], []]
    g = NavGraph(
        titles=[f"N{i}" for i in range(5)],
        texts=["t"] * 5,
        sentence_spans=[[(0, 1)]] * 5,
        edges=edges,
        start_node=0,
    )
    phi = np.random.default_rng(2).normal(size=(5, 8))
    rng = np.random.default_rng(3)
    wv = WordVectors(
        dim=8,
        vocab={w: i for i, w in enumerate(["alpha", "beta", "gamma"])},
        matrix=rng.normal(size=(3, 8)).astype(np.float32),
    )
    return g, phi, wv


def count_sequences(g, n_h):
    def count(node, depth):
        if depth == n_h:
            return 1
        return 1 + sum(count(t, depth + 1) for t in g.edges[node])

    return count(g.start_node, 0)


@pytest.mark.parametrize("core,qm", [("ff", "bow"), ("rec", "bow"),
                                     ("ff", "att"), ("rec", "att")])
def test_beam_equals_exhaustive_when_wide_enough(small_world, core, qm):
    g, phi, wv = small_world
    cfg = AgentConfig(core=core, layers=1, units=8, dim=8, query_mode=qm,
                      window=2 if qm == "att" else 0, seed=4)
    params = init_parameters(cfg)
    qenc = prepare_query(cfg, "alpha beta gamma", wv)
    n_h = 3
    width = count_sequences(g, n_h)
    got = beam_search(params, g, phi, qenc, width, n_h)
    oracle = exhaustive_traces(params, g, phi, qenc, n_h)[:width]
    assert len(got) == len(oracle)
    for a, b in zip(got, oracle):
        assert a.nodes == b.nodes
        assert a.actions == b.actions
        assert a.stopped == b.stopped
        assert abs(a.logp - b.logp) < 1e-10


def test_beam_one_is_greedy(small_world):
    g, phi, wv = small_world
    for seed in range(8):
        cfg = AgentConfig(core="ff", units=8, dim=8, query_mode="bow", seed=seed)
        params = init_parameters(cfg)
        qenc = prepare_query(cfg, "alpha gamma", wv)
        (top,) = beam_search(params, g, phi, qenc, 1, 4)
        ref = greedy_decode(params, g, phi, qenc, 4)
        assert top.nodes == ref.nodes
        assert top.actions == ref.actions
        assert top.stopped == ref.stopped
        assert top.logp == pytest.approx(ref.logp, abs=1e-12)


def test_beam_best_logp_monotone_in_width(small_world):
    g, phi, wv = small_world
    for seed in range(6):
        cfg = AgentConfig(core="ff", units=8, dim=8, query_mode="bow", seed=seed)
        params = init_parameters(cfg)
        qenc = prepare_query(cfg, "beta", wv)
        best = [
            beam_search(params, g, phi, qenc, w, 3)[0].logp for w in (1, 2, 3, 4, 8)
        ]
        for lo, hi in zip(best, best[1:]):
            assert hi >= lo - 1e-12


def test_beam_logps_are_nonpositive(small_world):
    g, phi, wv = small_world
    cfg = AgentConfig(core="ff", units=8, dim=8, query_mode="bow", seed=1)
    params = init_parameters(cfg)
    qenc = prepare_query(cfg, "alpha", wv)
    for trace in beam_search(params, g, phi, qenc, 6, 3):
        assert trace.logp <= 1e-12


def test_beam_dead_end_forces_stop():
    g = NavGraph(titles=["A", "B"], texts=["t", "t"],
                 sentence_spans=[[(0, 1)]] * 2, edges=[[1], []], start_node=0)
    phi = np.random.default_rng(0).normal(size=(2, 8))
    cfg = AgentConfig(core="ff", units=8, dim=8, query_mode="bow", seed=0)
    params = init_parameters(cfg)
    wv = WordVectors(dim=8, vocab={"a": 0},
                     matrix=np.ones((1, 8), np.float32))
    qenc = prepare_query(cfg, "a", wv)
    traces = beam_search(params, g, phi, qenc, 4, 5)
    # the only actions from B are stop; every trace ends stopped before depth 5
    assert all(t.stopped for t in traces)
