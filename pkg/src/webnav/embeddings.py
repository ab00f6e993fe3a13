"""Word vectors: text-format storage, a small CBOW trainer, and phi caching.

Document content is represented as the mean of its in-vocabulary word
vectors. Means are accumulated in float64 and stored as float32, and the
per-node cache written by :func:`save_phi` holds exactly the vectors that
:func:`content_vector` would recompute.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DataError
from .graph import NavGraph
from .textutil import tokenize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WordVectors:
    """Immutable token -> vector table with a fixed dimension."""

    dim: int
    vocab: dict[str, int]  # token -> row
    matrix: np.ndarray  # (V, dim) float32

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def get(self, token: str) -> np.ndarray | None:
        row = self.vocab.get(token)
        return None if row is None else self.matrix[row]

    def tokens(self) -> list[str]:
        return sorted(self.vocab, key=self.vocab.get)


def load_vectors(path: str) -> WordVectors:
    """Read the text format: optional ``count dim`` header, then one
    ``token v1 .. vd`` line per word. Duplicate tokens: last one wins."""
    tokens: list[str] = []
    rows: list[np.ndarray] = []
    index: dict[str, int] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if dim is None and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    dim = int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            if dim is None:
                dim = len(parts) - 1
                if dim < 1:
                    raise DataError(f"{path}:{lineno}: no vector values")
            if len(parts) - 1 != dim:
                raise DataError(
                    f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}"
                )
            try:
                vec = np.array([float(v) for v in parts[1:]], dtype=np.float32)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad float: {exc}") from exc
            token = parts[0]
            if token in index:
                log.warning("%s:%d: duplicate token %r, keeping the later one",
                            path, lineno, token)
                rows[index[token]] = vec
            else:
                index[token] = len(tokens)
                tokens.append(token)
                rows.append(vec)
    if not rows:
        raise DataError(f"{path}: no vectors")
    matrix = np.vstack(rows)
    if not np.all(np.isfinite(matrix)):
        raise DataError(f"{path}: non-finite vector values")
    return WordVectors(dim=dim, vocab=index, matrix=matrix)


def save_vectors(wv: WordVectors, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(wv)} {wv.dim}\n")
        for token in wv.tokens():
            row = wv.matrix[wv.vocab[token]]
            fh.write(token + " " + " ".join(str(v) for v in row) + "\n")


def content_vector(text: str, wv: WordVectors) -> np.ndarray:
    """Mean word vector of the in-vocabulary tokens of ``text`` (float32).

    Out-of-vocabulary tokens are skipped rather than hashed; a text with no
    known tokens maps to the zero vector.
    """
    acc = np.zeros(wv.dim, dtype=np.float64)
    n = 0
    for token in tokenize(text):
        row = wv.vocab.get(token)
        if row is not None:
            acc += wv.matrix[row]
            n += 1
    if n:
        acc /= n
    return acc.astype(np.float32)


def train_cbow(
    texts: list[str],
    dim: int = 64,
    window: int = 5,
    epochs: int = 5,
    lr: float = 0.05,
    seed: int = 0,
    negative: int = 5,
) -> WordVectors:
    """Train CBOW vectors with negative sampling over the shared tokenizer.

    Single-threaded and fully deterministic under a fixed seed: sentences
    are visited in corpus order with a fixed (not sampled) window, and noise
    words are pre-drawn per epoch from the unigram^0.75 distribution.
    """
    if dim < 2:
        raise DataError(f"embedding dimension must be >= 2, got {dim}")
    sentences = [tokenize(t) for t in texts]
    counts: dict[str, int] = {}
    for sent in sentences:
        for tok in sent:
            counts[tok] = counts.get(tok, 0) + 1
    if len(counts) < 2:
        raise DataError("corpus has fewer than 2 distinct tokens")
    # frequency-sorted vocabulary, ties alphabetical, for stable ids
    ordered = sorted(counts, key=lambda t: (-counts[t], t))
    vocab = {tok: i for i, tok in enumerate(ordered)}
    ids = [[vocab[t] for t in sent] for sent in sentences if len(sent) >= 2]

    rng = np.random.default_rng(seed)
    w_in = ((rng.random((len(vocab), dim)) - 0.5) / dim).astype(np.float32)
    w_out = np.zeros((len(vocab), dim), dtype=np.float32)

    noise = np.array([counts[t] for t in ordered], dtype=np.float64) ** 0.75
    noise_cdf = np.cumsum(noise / noise.sum())

    centers: list[int] = []
    ctx_flat: list[int] = []
    ctx_off = [0]
    for sent in ids:
        for pos, center in enumerate(sent):
            ctx = sent[max(0, pos - window) : pos] + sent[pos + 1 : pos + 1 + window]
            if not ctx:
                continue
            centers.append(center)
            ctx_flat.extend(ctx)
            ctx_off.append(len(ctx_flat))
    if not centers:
        raise DataError("corpus has no usable context windows")
    centers_a = np.array(centers, dtype=np.int32)
    ctx_flat_a = np.array(ctx_flat, dtype=np.int32)
    ctx_off_a = np.array(ctx_off, dtype=np.int32)

    for _ in range(epochs):
        draws = rng.random((len(centers_a), negative))
        negatives = np.searchsorted(noise_cdf, draws).astype(np.int32)
        _kernels.cbow_epoch(w_in, w_out, centers_a, ctx_flat_a, ctx_off_a,
                            negatives, lr)
    return WordVectors(dim=dim, vocab=vocab, matrix=w_in)


# --- per-node content-vector cache ---------------------------------------

_PHI_HEADER = struct.Struct("<I")


def compute_phi(g: NavGraph, wv: WordVectors) -> np.ndarray:
    """Content vectors for every node, shape (n_nodes, dim) float32."""
    phi = np.zeros((g.n_nodes, wv.dim), dtype=np.float32)
    for i, text in enumerate(g.texts):
        phi[i] = content_vector(text, wv)
    return phi


def save_phi(phi: np.ndarray, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(_PHI_HEADER.pack(phi.shape[1]))
        fh.write(np.ascontiguousarray(phi, dtype="<f4").tobytes())


def load_phi(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise DataError(f"{path}: truncated phi file")
    dim = _PHI_HEADER.unpack(raw[:4])[0]
    body = raw[4:]
    if dim == 0 or len(body) % (4 * dim):
        raise DataError(f"{path}: phi payload is not a multiple of the dimension")
    return np.frombuffer(body, dtype="<f4").reshape(-1, dim).copy()
