"""The single TF-IDF definition shared by query selection and SimpleSearch.

tf(token, node) is the raw occurrence count in the node's text and
idf(token) = ln(N / (1 + df(token))) + 1 with df counting distinct nodes.
This idf is strictly positive for every token that occurs at all, so scores
of matching documents are always positive.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .graph import NavGraph
from .textutil import tokenize


def idf(df: int, n_nodes: int) -> float:
    return math.log(n_nodes / (1 + df)) + 1.0


@dataclass(frozen=True)
class TfIdfIndex:
    """Document frequencies and per-node term counts for one graph."""

    doc_freq: dict[str, int]
    node_counts: list[Counter]
    n_nodes: int

    def weight(self, token: str, node: int) -> float:
        """tf-idf weight of ``token`` inside ``node`` (0 for absent tokens)."""
        tf = self.node_counts[node].get(token, 0)
        if tf == 0:
            return 0.0
        return tf * idf(self.doc_freq[token], self.n_nodes)


def build_tfidf_index(g: NavGraph) -> TfIdfIndex:
    doc_freq: dict[str, int] = {}
    node_counts: list[Counter] = []
    for text in g.texts:
        counts = Counter(tokenize(text))
        node_counts.append(counts)
        for token in counts:
            doc_freq[token] = doc_freq.get(token, 0) + 1
    return TfIdfIndex(doc_freq=doc_freq, node_counts=node_counts, n_nodes=g.n_nodes)
