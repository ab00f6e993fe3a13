"""Plain per-example SGD with global gradient-norm clipping."""

from __future__ import annotations

import logging

import numpy as np

from ..embeddings import WordVectors
from ..errors import TrainingDiverged
from ..graph import NavGraph
from ..tasks import Example
from .model import AgentParameters, prepare_query, supervised_loss

log = logging.getLogger(__name__)


def clip_gradients(grads: dict[str, np.ndarray], clip: float) -> float:
    """Scale all gradients so their global L2 norm is at most ``clip``."""
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if clip > 0.0 and total > clip:
        scale = clip / total
        for g in grads.values():
            g *= scale
    return total


def train(
    params: AgentParameters,
    examples: list[Example],
    g: NavGraph,
    phi: np.ndarray,
    wv: WordVectors,
    lr: float = 0.05,
    epochs: int = 10,
    clip: float = 5.0,
    seed: int = 0,
) -> list[float]:
    """Train in place; returns the mean cost per epoch.

    Examples are visited in a seeded per-epoch shuffle and parameters are
    updated after every example. ``params`` may come from a fresh
    initialization or from a loaded checkpoint (pretrain/finetune flow).
    """
    if not examples:
        raise TrainingDiverged("cannot train on an empty dataset")
    encodings = [prepare_query(params.config, ex.query, wv) for ex in examples]
    rng = np.random.default_rng(seed)
    cost_log: list[float] = []
    for epoch in range(epochs):
        order = rng.permutation(len(examples))
        total = 0.0
        for idx in order:
            ex = examples[idx]
            cost, grads = supervised_loss(params, ex, g, phi, encodings[idx])
            if not np.isfinite(cost):
                raise TrainingDiverged(
                    f"cost {cost} at epoch {epoch}, example {idx} "
                    f"(target {ex.target}); try a smaller learning rate"
                )
            clip_gradients(grads, clip)
            if lr:
                for name, grad in grads.items():
                    params.t[name] -= lr * grad
            total += cost
        cost_log.append(total / len(examples))
        log.info("epoch %d: mean cost %.6f", epoch, cost_log[-1])
    return cost_log
