"""Synthetic corpora with planted topics, shared by tests."""

from __future__ import annotations

import itertools

import numpy as np

from topictrends.ingest import CleanRecord, DocType
from topictrends.textprep import Preprocessor

_CONS = "bdfgklmnprtvz"
_VOWELS = "aiou"


def pseudo_words(n: int, pre: Preprocessor | None = None) -> list[str]:
    """``n`` CVCVC words that the default pipeline maps to themselves."""
    pre = pre or Preprocessor()
    out = []
    for c1, v1, c2, v2, c3 in itertools.product(_CONS, _VOWELS, _CONS, _VOWELS, _CONS):
        w = c1 + v1 + c2 + v2 + c3
        if pre.normalize_token(w) == w:
            out.append(w)
            if len(out) == n:
                return out
    raise RuntimeError("not enough pseudo-words")


def planted_corpus(n_docs: int = 500, n_topics: int = 5, words_per_topic: int = 20,
                   noise: float = 0.03, doc_len: int = 60, seed: int = 0,
                   years: tuple[int, int] = (2008, 2021)):
    """Documents drawn from one planted topic each, with cross-topic noise.

    Returns ``(records, topics, labels)``: clean records (the text goes in
    every field), the planted word lists and each document's planted topic.
    """
    rng = np.random.default_rng(seed)
    words = pseudo_words(n_topics * words_per_topic)
    topics = [words[t * words_per_topic:(t + 1) * words_per_topic] for t in range(n_topics)]
    records, labels = [], []
    for d in range(n_docs):
        t = d % n_topics
        toks = []
        for _ in range(doc_len):
            src = t
            if rng.random() < noise:
                src = int(rng.choice([o for o in range(n_topics) if o != t]))
            toks.append(topics[src][int(rng.integers(words_per_topic))])
        text = " ".join(toks)
        year = int(years[0] + d % (years[1] - years[0] + 1))
        records.append(CleanRecord(id=f"D{d:04d}", doc_type=DocType.ARTICLE, title=text,
                                   abstract=text, keywords=tuple(toks[:5]), categories=("synthetic",),
                                   pub_year=year))
        labels.append(t)
    return records, topics, labels
