"""Navigation agent: cores, query encoders, action head, and exact gradients.

The agent maps (current-node content vector, query representation) to a
d-dimensional hidden state through either a single tanh layer or a stack of
LSTM layers followed by a linear projection. Edge scores are dot products of
the hidden state with the neighbors' content vectors; a trainable stop
vector scores the terminal action. The attention query encoder re-weights
query context vectors at every step using the previous hidden state, which
creates a through-time dependency that the backward pass follows for both
cores.

All forward/backward math runs in float64; parameters are stored as float32
only on disk.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..embeddings import WordVectors, content_vector
from ..errors import DataError
from ..graph import NavGraph
from ..tasks import Example
from ..textutil import tokenize

log = logging.getLogger(__name__)

CORE_FF = "ff"
CORE_REC = "rec"
QUERY_BOW = "bow"
QUERY_ATT = "att"


@dataclass(frozen=True)
class AgentConfig:
    core: str = CORE_FF
    layers: int = 1
    units: int = 512
    dim: int = 64
    query_mode: str = QUERY_BOW
    window: int = 0  # attention context window u (even)
    beam_width: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.core not in (CORE_FF, CORE_REC):
            raise DataError(f"unknown core {self.core!r}")
        if self.query_mode not in (QUERY_BOW, QUERY_ATT):
            raise DataError(f"unknown query mode {self.query_mode!r}")
        if self.layers < 1 or self.units < 1 or self.dim < 1:
            raise DataError("layers, units and dim must be >= 1")
        if self.window < 0 or self.window % 2:
            raise DataError("attention window must be even and >= 0")

    @property
    def offsets(self) -> range:
        """Relative token offsets covered by one context vector."""
        return range(-self.window // 2, self.window // 2 + 1)


class AgentParameters:
    """Named trainable tensors; iteration order is fixed at construction."""

    def __init__(self, config: AgentConfig, tensors: dict[str, np.ndarray]):
        self.config = config
        self.t = tensors

    def names(self) -> list[str]:
        return list(self.t)

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.t.items()}

    def copy(self) -> "AgentParameters":
        return AgentParameters(self.config, {k: v.copy() for k, v in self.t.items()})


def _xavier(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    fan_out, fan_in = (shape[0], shape[1]) if len(shape) == 2 else (1, shape[0])
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=shape)


def init_parameters(config: AgentConfig) -> AgentParameters:
    """Xavier-uniform weights, zero biases, LSTM forget-gate bias +1."""
    rng = np.random.default_rng(config.seed)
    d, H, L = config.dim, config.units, config.layers
    t: dict[str, np.ndarray] = {}
    if config.core == CORE_FF:
        t["core.W"] = _xavier(rng, (H, 2 * d))
        t["core.b"] = np.zeros(H)
    else:
        for layer in range(L):
            in_dim = 2 * d if layer == 0 else H
            t[f"lstm{layer}.Wx"] = _xavier(rng, (4 * H, in_dim))
            t[f"lstm{layer}.Wh"] = _xavier(rng, (4 * H, H))
            b = np.zeros(4 * H)
            b[H : 2 * H] = 1.0  # forget gate
            t[f"lstm{layer}.b"] = b
    t["proj.P"] = _xavier(rng, (d, H))
    t["stop.v"] = _xavier(rng, (d,))
    if config.query_mode == QUERY_ATT:
        for j in config.offsets:
            t[f"att.W{j}"] = _xavier(rng, (d, d))
        t["att.Uh"] = _xavier(rng, (d, d))
        t["att.Uc"] = _xavier(rng, (d, d))
        t["att.w"] = _xavier(rng, (d,))
    return AgentParameters(config, t)


# --- query encoders -------------------------------------------------------

@dataclass(frozen=True)
class QueryEncoding:
    """Per-example query preprocessing (independent of the parameters)."""

    mode: str
    bow: np.ndarray | None = None  # (d,) float64
    emb: np.ndarray | None = None  # (K, d) float64, in-vocabulary tokens in order


def encode_query_bow(query: str, wv: WordVectors) -> np.ndarray:
    """Mean word vector of the query, exactly as for node content."""
    vec = content_vector(query, wv).astype(np.float64)
    if not vec.any() and query:
        log.warning("query has no in-vocabulary tokens; using the zero vector")
    return vec


def query_token_embeddings(query: str, wv: WordVectors) -> np.ndarray:
    rows = [wv.vocab[t] for t in tokenize(query) if t in wv.vocab]
    if not rows:
        raise DataError("query has no in-vocabulary tokens")
    return wv.matrix[rows].astype(np.float64)


def prepare_query(config: AgentConfig, query: str, wv: WordVectors) -> QueryEncoding:
    if config.query_mode == QUERY_BOW:
        return QueryEncoding(QUERY_BOW, bow=encode_query_bow(query, wv))
    return QueryEncoding(QUERY_ATT, emb=query_token_embeddings(query, wv))


def query_context_vectors(params: AgentParameters, emb: np.ndarray) -> np.ndarray:
    """Context vector per query token: windowed sum of projected embeddings.

    Window positions falling outside the query are skipped (no padding).
    """
    K = emb.shape[0]
    C = np.zeros_like(emb)
    for j in params.config.offsets:
        W = params.t[f"att.W{j}"]
        lo, hi = max(0, -j), min(K, K - j)
        if lo < hi:
            C[lo:hi] += emb[lo + j : hi + j] @ W.T
    return C


def _context_vectors_bwd(params, grads, emb: np.ndarray, dC: np.ndarray) -> None:
    K = emb.shape[0]
    for j in params.config.offsets:
        lo, hi = max(0, -j), min(K, K - j)
        if lo < hi:
            grads[f"att.W{j}"] += dC[lo:hi].T @ emb[lo + j : hi + j]


def attention_pool(
    params: AgentParameters, h_prev: np.ndarray, contexts: np.ndarray
) -> tuple[np.ndarray, tuple]:
    """Score contexts against the previous hidden state and pool them.

    Scores go through a softmax; the pooled vector keeps the extra 1/K
    factor, so it is a scaled (not convex) combination of the contexts.
    """
    Uh, Uc, w = params.t["att.Uh"], params.t["att.Uc"], params.t["att.w"]
    S = np.tanh(Uh @ h_prev + contexts @ Uc.T)
    beta = S @ w
    beta = beta - beta.max()
    alpha = np.exp(beta)
    alpha /= alpha.sum()
    phi_q = (alpha @ contexts) / contexts.shape[0]
    return phi_q, (contexts, S, alpha, h_prev)


def _attention_pool_bwd(params, grads, cache, dphi_q):
    contexts, S, alpha, h_prev = cache
    K = contexts.shape[0]
    dalpha = (contexts @ dphi_q) / K
    dC = alpha[:, None] * (dphi_q / K)[None, :]
    dbeta = alpha * (dalpha - alpha @ dalpha)
    grads["att.w"] += S.T @ dbeta
    dpre = np.outer(dbeta, params.t["att.w"]) * (1.0 - S * S)
    dsum = dpre.sum(axis=0)
    grads["att.Uh"] += np.outer(dsum, h_prev)
    grads["att.Uc"] += dpre.T @ contexts
    dh_prev = params.t["att.Uh"].T @ dsum
    dC += dpre @ params.t["att.Uc"]
    return dh_prev, dC


# --- core step ------------------------------------------------------------

@dataclass(frozen=True)
class StepState:
    """Fixed-size recurrent carry between steps (copy-on-write)."""

    h_att: np.ndarray  # previous projected hidden state, (d,)
    hs: tuple[np.ndarray, ...] = ()  # per-layer LSTM hidden states
    cs: tuple[np.ndarray, ...] = ()  # per-layer LSTM cell states


def init_step_state(config: AgentConfig) -> StepState:
    if config.core == CORE_REC:
        zeros = tuple(np.zeros(config.units) for _ in range(config.layers))
        return StepState(h_att=np.zeros(config.dim), hs=zeros, cs=zeros)
    return StepState(h_att=np.zeros(config.dim))


def forward_step(
    params: AgentParameters,
    phi_c: np.ndarray,
    qenc: QueryEncoding,
    state: StepState,
    contexts: np.ndarray | None = None,
) -> tuple[np.ndarray, StepState, dict]:
    """Compute the projected hidden state for one node visit."""
    cfg = params.config
    cache: dict = {"state": state}
    if cfg.query_mode == QUERY_ATT:
        phi_q, att_cache = attention_pool(params, state.h_att, contexts)
        cache["att"] = att_cache
    else:
        phi_q = qenc.bow
    x = np.concatenate([phi_c, phi_q])
    cache["x"] = x
    if cfg.core == CORE_FF:
        a = _kernels.affine_tanh_fwd(params.t["core.W"], params.t["core.b"], x)
        cache["a"] = a
        top = a
        new_state_hs: tuple[np.ndarray, ...] = ()
        new_state_cs: tuple[np.ndarray, ...] = ()
    else:
        caches = []
        inp = x
        hs, cs = [], []
        for layer in range(cfg.layers):
            h, c, gates = _kernels.lstm_step_fwd(
                params.t[f"lstm{layer}.Wx"],
                params.t[f"lstm{layer}.Wh"],
                params.t[f"lstm{layer}.b"],
                inp,
                state.hs[layer],
                state.cs[layer],
            )
            caches.append((inp, gates, c))
            hs.append(h)
            cs.append(c)
            inp = h
        cache["lstm"] = caches
        top = hs[-1]
        new_state_hs, new_state_cs = tuple(hs), tuple(cs)
    cache["top"] = top
    h_out = params.t["proj.P"] @ top
    new_state = StepState(h_att=h_out, hs=new_state_hs, cs=new_state_cs)
    return h_out, new_state, cache


@dataclass
class _BackCarry:
    dh_att: np.ndarray
    dhs: list[np.ndarray] = field(default_factory=list)
    dcs: list[np.ndarray] = field(default_factory=list)


def _init_carry(config: AgentConfig) -> _BackCarry:
    carry = _BackCarry(dh_att=np.zeros(config.dim))
    if config.core == CORE_REC:
        carry.dhs = [np.zeros(config.units) for _ in range(config.layers)]
        carry.dcs = [np.zeros(config.units) for _ in range(config.layers)]
    return carry


def _backward_step(params, grads, cache, dh, carry, dC_total):
    """Reverse one forward_step; returns the carry for the previous step."""
    cfg = params.config
    grads["proj.P"] += np.outer(dh, cache["top"])
    dtop = params.t["proj.P"].T @ dh
    if cfg.core == CORE_FF:
        dW, db, dx = _kernels.affine_tanh_bwd(
            params.t["core.W"], cache["x"], cache["a"], dtop
        )
        grads["core.W"] += dW
        grads["core.b"] += db
    else:
        state = cache["state"]
        new_carry = _init_carry(cfg)
        dabove = dtop
        for layer in reversed(range(cfg.layers)):
            inp, gates, c_new = cache["lstm"][layer]
            dh_l = dabove + carry.dhs[layer]
            dWx, dWh, db, dx_l, dh_prev, dc_prev = _kernels.lstm_step_bwd(
                params.t[f"lstm{layer}.Wx"],
                params.t[f"lstm{layer}.Wh"],
                inp,
                state.hs[layer],
                state.cs[layer],
                gates,
                c_new,
                dh_l,
                carry.dcs[layer],
            )
            grads[f"lstm{layer}.Wx"] += dWx
            grads[f"lstm{layer}.Wh"] += dWh
            grads[f"lstm{layer}.b"] += db
            new_carry.dhs[layer] = dh_prev
            new_carry.dcs[layer] = dc_prev
            dabove = dx_l
        dx = dabove
        carry = new_carry
    d = cfg.dim
    dphi_q = dx[d:]  # gradient to phi_c is discarded: embeddings are fixed
    if cfg.query_mode == QUERY_ATT:
        dh_prev_att, dC = _attention_pool_bwd(params, grads, cache["att"], dphi_q)
        dC_total += dC
    else:
        dh_prev_att = np.zeros(d)
    if cfg.core == CORE_FF:
        carry = _BackCarry(dh_att=dh_prev_att)
    else:
        carry.dh_att = dh_prev_att
    return carry


# --- action head and supervised loss --------------------------------------

def action_logprobs(
    params: AgentParameters, h: np.ndarray, neighbor_phis: np.ndarray
) -> np.ndarray:
    """Log probabilities over (edges..., stop); stable softmax."""
    logits = np.empty(neighbor_phis.shape[0] + 1)
    logits[:-1] = neighbor_phis @ h
    logits[-1] = params.t["stop.v"] @ h
    z = logits - logits.max()
    return z - np.log(np.exp(z).sum())


def _edge_index(g: NavGraph, node: int, successor: int) -> int:
    try:
        return g.edges[node].index(successor)  # first occurrence on duplicates
    except ValueError:
        raise DataError(
            f"path step {node}->{successor} is not a graph edge (corrupt dataset)"
        ) from None


def supervised_loss(
    params: AgentParameters,
    example: Example,
    g: NavGraph,
    phi: np.ndarray,
    qenc: QueryEncoding,
) -> tuple[float, dict[str, np.ndarray]]:
    """Teacher-forced negative log-likelihood of the supervising path and
    its gradients for every parameter tensor.

    The cost has one term per path edge plus the stop action at the final
    node; gradients come from reverse accumulation through the action head,
    the core, and (in attention mode) the query encoder, including the
    through-time chain created by feeding h_{t-1} to the attention scorer.
    """
    cfg = params.config
    path = example.path
    contexts = (
        query_context_vectors(params, qenc.emb) if cfg.query_mode == QUERY_ATT else None
    )
    state = init_step_state(cfg)
    tape = []
    cost = 0.0
    for i, node in enumerate(path):
        h, state, cache = forward_step(params, phi[node], qenc, state, contexts)
        nb = g.edges[node]
        nb_phis = phi[nb] if nb else np.zeros((0, cfg.dim))
        logp = action_logprobs(params, h, nb_phis)
        if i + 1 < len(path):
            target = _edge_index(g, node, path[i + 1])
        else:
            target = len(nb)  # stop
        cost -= logp[target]
        tape.append((cache, h, nb_phis, logp, target))

    grads = params.zero_grads()
    carry = _init_carry(cfg)
    dC_total = np.zeros_like(contexts) if contexts is not None else None
    for cache, h, nb_phis, logp, target in reversed(tape):
        dlogits = np.exp(logp)
        dlogits[target] -= 1.0
        dh = nb_phis.T @ dlogits[:-1] + params.t["stop.v"] * dlogits[-1]
        dh += carry.dh_att
        grads["stop.v"] += dlogits[-1] * h
        carry = _backward_step(params, grads, cache, dh, carry, dC_total)
    if contexts is not None:
        _context_vectors_bwd(params, grads, qenc.emb, dC_total)
    return cost, grads
