"""Project-wide text normalization.

One tokenizer is used everywhere (TF-IDF, embeddings, reward containment) so
that "query appears in document" means the same thing in every module:
lowercase, split on any non-alphanumeric character, drop empty tokens.
"""

from __future__ import annotations

import re

_SPLIT = re.compile(r"[\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters."""
    return [t for t in _SPLIT.split(text.lower()) if t]


def token_seq_contains(haystack_tokens: list[str], needle_tokens: list[str]) -> bool:
    """True iff ``needle_tokens`` occurs as a contiguous run in ``haystack_tokens``."""
    if not needle_tokens:
        raise ValueError("empty token sequence")
    # delimiter-padded join turns contiguous-run search into substring search
    hay = "\x00" + "\x00".join(haystack_tokens) + "\x00"
    needle = "\x00" + "\x00".join(needle_tokens) + "\x00"
    return needle in hay


_TERMINATORS = frozenset(".!?")


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Split ``text`` into sentence (start, end) character spans.

    A sentence ends at ``.``, ``!`` or ``?`` followed by whitespace and an
    uppercase letter, or by end-of-text; a newline always terminates the
    current sentence. Spans are trimmed of surrounding whitespace and empty
    spans are dropped.
    """
    spans: list[tuple[int, int]] = []
    start = 0
    i = 0
    n = len(text)

    def close(end: int) -> None:
        nonlocal start
        s, e = start, end
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if e > s:
            spans.append((s, e))

    while i < n:
        ch = text[i]
        if ch == "\n":
            close(i)
            start = i + 1
        elif ch in _TERMINATORS:
            j = i + 1
            while j < n and text[j].isspace() and text[j] != "\n":
                j += 1
            if j >= n or (j > i + 1 and text[j].isupper()):
                close(i + 1)
                start = i + 1
        i += 1
    close(n)
    return spans
