"""Neural navigation agent: model, training, beam search, checkpoints."""

from .beam import Trace, beam_search, greedy_decode
from .checkpoint import load_checkpoint, save_checkpoint
from .model import (
    AgentConfig,
    AgentParameters,
    QueryEncoding,
    action_logprobs,
    attention_pool,
    encode_query_bow,
    forward_step,
    init_parameters,
    init_step_state,
    prepare_query,
    query_context_vectors,
    supervised_loss,
)
from .train import clip_gradients, train

__all__ = [
    "AgentConfig",
    "AgentParameters",
    "QueryEncoding",
    "Trace",
    "action_logprobs",
    "attention_pool",
    "beam_search",
    "clip_gradients",
    "encode_query_bow",
    "forward_step",
    "greedy_decode",
    "init_parameters",
    "init_step_state",
    "load_checkpoint",
    "prepare_query",
    "query_context_vectors",
    "save_checkpoint",
    "supervised_loss",
    "train",
]
