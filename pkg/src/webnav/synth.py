"""Synthetic hyperlinked corpora for desk-scale experiments.

Layout: one hub start page linking to topic category pages, each category
linking to a handful of its member articles, and articles linking mostly
within their topic. Every article carries two article-unique tokens inside
an otherwise topic-flavored vocabulary, so TF-IDF query selection produces
discriminative queries and content vectors cluster by topic.
"""

from __future__ import annotations

import json
import random

from .corpus import RawDocument

_COMMON = (
    "the of and to in that was for with from this also are has have been "
    "its one two new first during while where which their over under after "
    "before most some many such other only more early later known called "
    "found used part form long great small large high"
).split()


def _sentence(rng: random.Random, pool: list[str], lo: int = 6, hi: int = 12) -> str:
    words = [rng.choice(pool) for _ in range(rng.randint(lo, hi))]
    return words[0].capitalize() + " " + " ".join(words[1:]) + "."


def make_synthetic_corpus(
    n_nodes: int = 500,
    n_categories: int = 40,
    branching: tuple[int, int] = (3, 6),
    words_per_topic: int = 25,
    seed: int = 0,
) -> list[RawDocument]:
    """Deterministically generate a corpus of ``n_nodes`` documents.

    The start page is a hub over all categories; categories and articles
    keep their out-degree within ``branching`` (categories use the upper
    half of the range so the two-hop frontier stays wide enough for
    disjoint dataset splits).
    """
    if n_nodes < n_categories + 2:
        raise ValueError("need at least one article per corpus")
    rng = random.Random(seed)
    n_articles = n_nodes - 1 - n_categories
    topics = [
        [f"t{t}w{w}" for w in range(words_per_topic)] for t in range(n_categories)
    ]
    members: list[list[int]] = [[] for _ in range(n_categories)]
    for a in range(n_articles):
        members[a % n_categories].append(a)

    docs: list[RawDocument] = []
    start_links = " ".join(f"[[Category {t}]]" for t in range(n_categories))
    docs.append(RawDocument(
        title="Start",
        body=(
            _sentence(rng, _COMMON)
            + " This hub indexes every category below.\n"
            + "Browse " + start_links + " for the full tree."
        ),
    ))

    lo, hi = branching
    cat_lo = max(lo, (lo + hi + 1) // 2)
    for t in range(n_categories):
        pool = topics[t] + _COMMON
        k = min(len(members[t]), rng.randint(cat_lo, hi))
        linked = rng.sample(members[t], k) if k else []
        link_text = " ".join(f"[[Article {m}]]" for m in linked)
        docs.append(RawDocument(
            title=f"Category {t}",
            body=(
                _sentence(rng, pool) + " " + _sentence(rng, pool) + "\n"
                + "Members include " + link_text + " among others."
            ),
        ))

    for a in range(n_articles):
        t = a % n_categories
        pool = topics[t] + _COMMON
        u1, u2 = f"zq{a}a", f"zq{a}b"
        sentences = [
            f"{u1.capitalize()} and {u2} anchor this entry on "
            f"{rng.choice(topics[t])} {rng.choice(topics[t])}."
        ]
        for _ in range(rng.randint(4, 8)):
            sentences.append(_sentence(rng, pool))
        same = [m for m in members[t] if m != a]
        cross = [m for m in range(n_articles) if m % n_categories != t]
        k = rng.randint(lo, hi)
        picks: list[int] = []
        while len(picks) < k and (same or cross):
            source = same if (rng.random() < 0.85 and same) else cross
            choice = rng.choice(source)
            source.remove(choice)
            picks.append(choice)
        link_text = ", ".join(f"[[Article {m}]]" for m in picks)
        sentences.append(f"See also {link_text} for related entries.")
        docs.append(RawDocument(title=f"Article {a}", body="\n".join(sentences)))
    return docs


def write_corpus(docs: list[RawDocument], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps({"title": doc.title, "body": doc.body},
                                ensure_ascii=False))
            fh.write("\n")
