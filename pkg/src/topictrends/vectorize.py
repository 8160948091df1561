"""Vocabulary and sparse document-term matrices."""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import EmptyVocabulary
from .textprep import TokenDoc

__all__ = [
    "Vocabulary",
    "DocTermMatrix",
    "build_vocab",
    "count_matrix",
    "tfidf",
    "write_triplets",
    "read_triplets",
    "write_vocab",
    "read_vocab",
]

COUNT = "count"
TFIDF = "tfidf"


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    df: tuple[int, ...]

    def __post_init__(self):
        if len(self.terms) != len(self.df):
            raise ValueError("terms and df differ in length")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})
        if len(self._index) != len(self.terms):
            raise ValueError("duplicate terms in vocabulary")

    @property
    def index(self) -> dict[str, int]:
        return self._index

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self._index

    @property
    def digest(self) -> str:
        """Stable hash of the ordered term list."""
        return hashlib.sha256("\n".join(self.terms).encode("utf-8")).hexdigest()


@dataclass
class DocTermMatrix:
    """Documents x terms, nonnegative, CSR.

    ``dropped`` lists ids of input documents whose rows came out empty.
    """

    matrix: sp.csr_matrix
    doc_ids: list[str]
    vocab: Vocabulary
    weighting: str = COUNT
    dropped: list[str] = field(default_factory=list)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def term_doc(self) -> sp.csc_matrix:
        """Term x document view, the orientation LSA works in."""
        return self.matrix.T.tocsc()


def build_vocab(docs: Sequence[TokenDoc], min_df: int = 5, max_df_ratio: float = 0.5) -> Vocabulary:
    """Select terms by document frequency.

    Kept terms appear in at least ``min_df`` documents and at most
    ``max_df_ratio * len(docs)``.  Index order is descending total count,
    ties broken alphabetically.
    """
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    if not 0 < max_df_ratio <= 1:
        raise ValueError("max_df_ratio must be in (0, 1]")
    df: Counter = Counter()
    total: Counter = Counter()
    for doc in docs:
        total.update(doc.tokens)
        df.update(set(doc.tokens))
    cap = max_df_ratio * len(docs)
    kept = [t for t, n in df.items() if min_df <= n <= cap]
    if not kept:
        raise EmptyVocabulary(f"no term has min_df={min_df} <= df <= {cap:g}")
    kept.sort(key=lambda t: (-total[t], t))
    return Vocabulary(tuple(kept), tuple(df[t] for t in kept))


def count_matrix(docs: Sequence[TokenDoc], vocab: Vocabulary) -> DocTermMatrix:
    """Raw term counts; out-of-vocabulary tokens are ignored and empty rows dropped."""
    index = vocab.index
    rows, cols, vals = [], [], []
    doc_ids, dropped = [], []
    for doc in docs:
        counts = Counter(index[t] for t in doc.tokens if t in index)
        if not counts:
            dropped.append(doc.doc_id)
            continue
        r = len(doc_ids)
        doc_ids.append(doc.doc_id)
        for c in sorted(counts):
            rows.append(r)
            cols.append(c)
            vals.append(counts[c])
    mat = sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(len(doc_ids), len(vocab)),
    )
    mat.sort_indices()
    return DocTermMatrix(mat, doc_ids, vocab, COUNT, dropped)


def tfidf(counts: DocTermMatrix) -> DocTermMatrix:
    """tf * (1 + ln((1 + D) / (1 + df))), then unit L2 rows.

    Document frequencies come from ``counts`` itself, not from the vocabulary.
    """
    if counts.weighting != COUNT:
        raise ValueError("tfidf expects a count matrix")
    X = counts.matrix.tocsr(copy=True)
    n_docs = X.shape[0]
    df = np.bincount(X.indices, minlength=X.shape[1])
    idf = 1.0 + np.log((1.0 + n_docs) / (1.0 + df))
    X.data *= idf[X.indices]
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    X = sp.csr_matrix(sp.diags(scale) @ X)
    X.sort_indices()
    return DocTermMatrix(X, list(counts.doc_ids), counts.vocab, TFIDF, list(counts.dropped))


def write_triplets(dtm: DocTermMatrix, path: str | Path) -> None:
    """Header ``D V NNZ`` then one ``row col value`` line per stored entry."""
    coo = dtm.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [f"{dtm.shape[0]} {dtm.shape[1]} {coo.nnz}"]
    lines.extend(f"{coo.row[i]} {coo.col[i]} {float(coo.data[i])!r}" for i in order)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_triplets(path: str | Path) -> sp.csr_matrix:
    with open(path, encoding="utf-8") as fh:
        n_docs, n_terms, nnz = (int(x) for x in fh.readline().split())
        body = np.loadtxt(fh, ndmin=2) if nnz else np.zeros((0, 3))
    if body.shape[0] != nnz:
        raise ValueError(f"{path}: header says {nnz} entries, found {body.shape[0]}")
    return sp.csr_matrix((body[:, 2], (body[:, 0].astype(np.int64), body[:, 1].astype(np.int64))),
                         shape=(n_docs, n_terms))


def write_vocab(vocab: Vocabulary, path: str | Path) -> None:
    Path(path).write_text("".join(f"{i} {t} {d}\n" for i, (t, d) in enumerate(zip(vocab.terms, vocab.df))),
                          encoding="utf-8")


def read_vocab(path: str | Path) -> Vocabulary:
    terms, dfs = [], []
    for expected, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        i, term, df = line.split(" ")
        if int(i) != expected:
            raise ValueError(f"{path}: vocabulary indices are not dense at line {expected + 1}")
        terms.append(term)
        dfs.append(int(df))
    return Vocabulary(tuple(terms), tuple(dfs))
