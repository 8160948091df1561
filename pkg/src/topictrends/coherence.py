"""C_V topic coherence.

Boolean sliding windows over the modelled corpus, NPMI between topic terms,
one-set segmentation with cosine between each term's NPMI context vector and
the topic's summed vector, arithmetic mean over terms and then over topics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyCorpus, TopicTooSmall
from .textprep import TokenDoc

__all__ = ["WindowStats", "CoherenceCell", "window_counts", "npmi", "cv_score", "topic_cv"]

DEFAULT_WINDOW = 110
DEFAULT_TOP_N = 10
EPS = 1e-12


@dataclass
class WindowStats:
    n_windows: int
    terms: tuple[str, ...]
    counts: np.ndarray  # windows containing each term
    joint: np.ndarray  # windows containing both terms; diagonal equals counts

    def __post_init__(self):
        self._index = {t: i for i, t in enumerate(self.terms)}

    def count(self, term: str) -> int:
        i = self._index.get(term)
        return 0 if i is None else int(self.counts[i])

    def joint_count(self, a: str, b: str) -> int:
        i, j = self._index.get(a), self._index.get(b)
        if i is None or j is None:
            return 0
        return int(self.joint[i, j])


@dataclass
class CoherenceCell:
    set_id: str
    model: str
    k: int
    cv: float | None
    per_topic: list[float] = field(default_factory=list)
    topics: list[list[str]] = field(default_factory=list)
    error: str | None = None
    fitted: object = field(default=None, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.error is None and self.cv is not None


def _tokens(doc) -> Sequence[str]:
    return doc.tokens if isinstance(doc, TokenDoc) else doc


def window_counts(docs: Iterable[TokenDoc | Sequence[str]], terms: Iterable[str],
                  window: int = DEFAULT_WINDOW) -> WindowStats:
    """Count boolean window occurrences of ``terms``.

    A window of ``window`` tokens slides with stride 1 over each document;
    a document shorter than the window counts as one window and an empty
    one counts as none.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    terms = tuple(dict.fromkeys(terms))
    index = {t: i for i, t in enumerate(terms)}
    T = len(terms)
    counts = np.zeros(T, dtype=np.int64)
    joint = np.zeros((T, T), dtype=np.int64)
    n_windows = 0
    for doc in docs:
        toks = _tokens(doc)
        L = len(toks)
        if L == 0:
            continue
        n_win = max(L - window + 1, 1)
        n_windows += n_win
        hits: dict[int, list[int]] = {}
        for pos, tok in enumerate(toks):
            i = index.get(tok)
            if i is not None:
                hits.setdefault(i, []).append(pos)
        if not hits:
            continue
        present = np.fromiter(hits, dtype=np.int64)
        if n_win == 1:
            counts[present] += 1
            joint[np.ix_(present, present)] += 1
            continue
        # window s covers [s, s + window - 1]; a term is in it when its
        # prefix count of occurrences rises across that span
        occ = np.zeros((len(present), n_win), dtype=bool)
        for row, i in enumerate(present):
            marks = np.zeros(L + 1, dtype=np.int64)
            marks[np.asarray(hits[i]) + 1] = 1
            cum = np.cumsum(marks)
            occ[row] = (cum[window:window + n_win] - cum[:n_win]) > 0
        occ_i = occ.astype(np.int64)
        counts[present] += occ_i.sum(axis=1)
        joint[np.ix_(present, present)] += occ_i @ occ_i.T
    return WindowStats(n_windows, terms, counts, joint)


def npmi(stats: WindowStats, i: str, j: str, eps: float = EPS) -> float:
    """Normalised PMI of two terms over the windows.

    Returns -1 when either term never occurs.  A pair present in every
    window gets 1 (the log ratio is 0/0 there).
    """
    if stats.n_windows <= 0:
        raise EmptyCorpus("no windows to estimate probabilities from")
    n = stats.n_windows
    p_i, p_j = stats.count(i) / n, stats.count(j) / n
    if p_i == 0 or p_j == 0:
        return -1.0
    p_ij = stats.joint_count(i, j) / n
    if p_ij == 1.0:
        return 1.0
    value = math.log((p_ij + eps) / (p_i * p_j)) / -math.log(p_ij + eps)
    return max(-1.0, min(1.0, value))


def _npmi_matrix(stats: WindowStats, topic: Sequence[str], eps: float) -> np.ndarray:
    N = len(topic)
    M = np.empty((N, N))
    for a in range(N):
        for b in range(a, N):
            M[a, b] = M[b, a] = npmi(stats, topic[a], topic[b], eps)
    return M


def _cos(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def topic_cv(stats: WindowStats, topic: Sequence[str], eps: float = EPS) -> float:
    """C_V of one topic from precomputed window statistics."""
    if len(topic) < 2:
        raise TopicTooSmall(f"topic needs at least 2 terms, got {len(topic)}")
    M = _npmi_matrix(stats, topic, eps)
    total = M.sum(axis=0)
    return float(np.mean([_cos(M[a], total) for a in range(len(topic))]))


def cv_score(topics: Sequence[Sequence[str]], docs: Sequence[TokenDoc | Sequence[str]],
             window: int = DEFAULT_WINDOW, eps: float = EPS) -> tuple[float, list[float]]:
    """C_V coherence of a topic set against a tokenised reference corpus.

    Returns the mean score and the per-topic scores.
    """
    if not topics:
        raise TopicTooSmall("no topics given")
    for topic in topics:
        if len(topic) < 2:
            raise TopicTooSmall(f"topic needs at least 2 terms, got {len(topic)}")
    wanted = [t for topic in topics for t in topic]
    stats = window_counts(docs, wanted, window)
    if stats.n_windows == 0:
        raise EmptyCorpus("reference corpus is empty")
    per_topic = [topic_cv(stats, topic, eps) for topic in topics]
    return float(np.mean(per_topic)), per_topic
