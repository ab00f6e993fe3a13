"""Inverted-index retrieval baseline.

Scores every article by the sum of tf-idf weights of the query tokens it
shares with the query and returns the top-K. Uses the project TF-IDF
formula (see :mod:`webnav.tfidf`), no stemming, no stop words.

For scale context: on trivia questions over full English Wikipedia this
style of baseline reaches document recall around 5.4 / 12.6 / 28.4 at
K = 1 / 4 / 40; Lucene in its default configuration manages roughly
6.3 / 14.7 / 36.3, and a domain-restricted commercial search API about
14.0 / 22.1 / 25.9.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass

from .errors import DataError
from .graph import NavGraph
from .tfidf import idf
from .textutil import tokenize


@dataclass(frozen=True)
class InvertedIndex:
    """token -> postings [(node id, term frequency)], sorted by node id."""

    postings: dict[str, list[tuple[int, int]]]
    n_nodes: int

    def doc_freq(self, token: str) -> int:
        return len(self.postings.get(token, ()))


def build_index(g: NavGraph) -> InvertedIndex:
    postings: dict[str, list[tuple[int, int]]] = defaultdict(list)
    for node, text in enumerate(g.texts):
        for token, tf in sorted(Counter(tokenize(text)).items()):
            postings[token].append((node, tf))
    return InvertedIndex(postings=dict(postings), n_nodes=g.n_nodes)


def search(index: InvertedIndex, query: str, k: int) -> list[tuple[int, float]]:
    """Top-``k`` (node id, score) pairs; ties broken by lower node id.

    Nodes sharing no token with the query are never returned, so the result
    may be shorter than ``k``.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    tokens = tokenize(query)
    if not tokens:
        raise DataError("query has no tokens after normalization")
    scores: dict[int, float] = defaultdict(float)
    for token in set(tokens):  # each shared token contributes once
        plist = index.postings.get(token)
        if not plist:
            continue
        w = idf(len(plist), index.n_nodes)
        for node, tf in plist:
            scores[node] += tf * w
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]
