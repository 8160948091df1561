"""Model sweep, best-cell selection and per-year topic trends."""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .coherence import DEFAULT_TOP_N, DEFAULT_WINDOW, CoherenceCell, cv_score
from .errors import AllCellsFailed, EmptyCorpus, TopicTrendsError
from .ingest import CleanRecord
from .lda import LdaConfig, LdaModel, fit_lda, top_words
from .lsa import LsaModel, fit_lsa, project_lsa, topic_terms_lsa
from .nmf import NmfConfig, NmfModel, fit_nmf, fold_in_nmf, topic_terms_nmf
from .textprep import FeatureSet, Preprocessor, TokenDoc, build_docs
from .vectorize import DocTermMatrix, Vocabulary, build_vocab, count_matrix, tfidf

__all__ = [
    "MODELS",
    "UNCLASSIFIED",
    "SweepGrid",
    "PreparedSet",
    "TrendSeries",
    "derive_seed",
    "prepare_set",
    "vectorize_with",
    "run_sweep",
    "select_best",
    "topic_terms",
    "assign_topics",
    "assign_scores",
    "fold_in",
    "yearly_series",
    "attach_labels",
    "read_labels",
    "round_half_up",
]

log = logging.getLogger(__name__)

MODELS = ("LDA", "NMF", "LSA")
UNCLASSIFIED = -1
TopicModel = LdaModel | NmfModel | LsaModel


@dataclass(frozen=True)
class SweepGrid:
    sets: tuple[FeatureSet, ...] = tuple(FeatureSet)
    models: tuple[str, ...] = MODELS
    k_values: tuple[int, ...] = (5, 10, 15)
    lda: Mapping = field(default_factory=dict)  # LdaConfig fields other than K, seed
    nmf: Mapping = field(default_factory=dict)  # NmfConfig fields other than r, seed
    min_df: int = 5
    max_df_ratio: float = 0.5
    window: int = DEFAULT_WINDOW
    top_n: int = DEFAULT_TOP_N

    def __post_init__(self):
        if not self.sets or not self.models or not self.k_values:
            raise ValueError("sweep grid must be nonempty in every dimension")
        unknown = set(self.models) - set(MODELS)
        if unknown:
            raise ValueError(f"unknown models: {sorted(unknown)}")

    def cells(self) -> list[tuple[FeatureSet, str, int]]:
        return [(s, m, k) for s in self.sets for m in self.models for k in self.k_values]


def derive_seed(base_seed: int, set_id: str, model: str, k: int) -> int:
    """64-bit seed for one sweep cell.

    The cell key is hashed (SHA-256) into the spawn key of a
    ``numpy.random.SeedSequence`` rooted at ``base_seed``, so cells get
    unrelated PCG64 streams and the mapping does not depend on run order.
    """
    digest = hashlib.sha256(f"{set_id}|{model}|{k}".encode()).digest()
    spawn_key = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
    ss = np.random.SeedSequence(base_seed, spawn_key=spawn_key)
    hi, lo = ss.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


@dataclass
class PreparedSet:
    feature_set: FeatureSet
    docs: list[TokenDoc]
    counts: DocTermMatrix
    weighted: DocTermMatrix
    empty_docs: list[str]


def prepare_set(corpus: Sequence[CleanRecord], feature_set: FeatureSet, min_df: int = 5,
                max_df_ratio: float = 0.5, preprocessor: Preprocessor | None = None) -> PreparedSet:
    docs, empty = build_docs(corpus, feature_set, preprocessor)
    if not docs:
        raise EmptyCorpus(f"no documents survive preprocessing for {feature_set.value}")
    vocab = build_vocab(docs, min_df, max_df_ratio)
    counts = count_matrix(docs, vocab)
    return PreparedSet(feature_set, docs, counts, tfidf(counts), empty)


def vectorize_with(docs: Sequence[TokenDoc], vocab: Vocabulary, weighting: str) -> DocTermMatrix:
    counts = count_matrix(docs, vocab)
    return tfidf(counts) if weighting == "tfidf" else counts


def topic_terms(model: TopicModel, k: int, n: int = DEFAULT_TOP_N) -> list[tuple[str | int, float]]:
    if isinstance(model, LdaModel):
        return top_words(model, k, n)
    if isinstance(model, NmfModel):
        return topic_terms_nmf(model, k, n)
    return topic_terms_lsa(model, k, n)


def model_kind(model: TopicModel) -> str:
    return {LdaModel: "LDA", NmfModel: "NMF", LsaModel: "LSA"}[type(model)]


def fit_cell(prep: PreparedSet, model: str, k: int, seed: int, grid: SweepGrid) -> TopicModel:
    if model == "LDA":
        return fit_lda(prep.counts, LdaConfig(K=k, seed=seed, **dict(grid.lda)))
    if model == "NMF":
        return fit_nmf(prep.weighted, NmfConfig(r=k, seed=seed, **dict(grid.nmf)))
    return fit_lsa(prep.weighted, k, seed=seed)


def _run_cell(prep, feature_set, model, k, base_seed, grid, keep_model) -> CoherenceCell:
    cell = CoherenceCell(feature_set.value, model, k, None)
    if isinstance(prep, Exception):
        cell.error = f"{type(prep).__name__}: {prep}"
        return cell
    try:
        fitted = fit_cell(prep, model, k, derive_seed(base_seed, feature_set.value, model, k), grid)
        topics = [[str(t) for t, _ in topic_terms(fitted, j, grid.top_n)] for j in range(k)]
        cv, per_topic = cv_score(topics, prep.docs, grid.window)
    except (TopicTrendsError, ValueError, np.linalg.LinAlgError) as exc:
        log.warning("cell %s/%s/K=%d failed: %s", feature_set.value, model, k, exc)
        cell.error = f"{type(exc).__name__}: {exc}"
        return cell
    cell.cv, cell.per_topic, cell.topics = cv, per_topic, topics
    if keep_model:
        cell.fitted = fitted
    return cell


def run_sweep(corpus: Sequence[CleanRecord], grid: SweepGrid, base_seed: int = 0, jobs: int = 1,
              preprocessor: Preprocessor | None = None, keep_models: bool = False,
              prepared: dict | None = None) -> list[CoherenceCell]:
    """Fit and score every (feature set, model, K) cell of ``grid``.

    Cells come back in grid order (set, then model, then K) whatever
    ``jobs`` is.  A cell that fails carries an ``error`` string and no score.
    Pass a dict as ``prepared`` to receive the per-set vectorised data.
    """
    preps: dict = {} if prepared is None else prepared
    for fs in grid.sets:
        if not corpus:
            preps[fs] = EmptyCorpus("corpus is empty")
            continue
        try:
            preps[fs] = prepare_set(corpus, fs, grid.min_df, grid.max_df_ratio, preprocessor)
        except TopicTrendsError as exc:
            preps[fs] = exc
    tasks = [(preps[fs], fs, m, k, base_seed, grid, keep_models) for fs, m, k in grid.cells()]
    if jobs <= 1:
        return [_run_cell(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_cell, *t) for t in tasks]
        return [f.result() for f in futures]


_SET_ORDER = {fs.value: i for i, fs in enumerate(FeatureSet)}
_MODEL_ORDER = {m: i for i, m in enumerate(MODELS)}


def select_best(cells: Sequence[CoherenceCell]) -> CoherenceCell:
    """Highest C_V; ties go to smaller K, then set order, then LDA < NMF < LSA."""
    ok = [c for c in cells if c.ok]
    if not ok:
        raise AllCellsFailed("no sweep cell produced a score")
    return min(ok, key=lambda c: (-c.cv, c.k, _SET_ORDER.get(c.set_id, len(_SET_ORDER)),
                                  _MODEL_ORDER.get(c.model, len(_MODEL_ORDER))))


def assign_scores(scores: np.ndarray, unclassified: np.ndarray | None = None) -> np.ndarray:
    """Row argmax (first index on ties); rows flagged in ``unclassified`` get -1."""
    scores = np.asarray(scores)
    out = np.argmax(scores, axis=1).astype(np.int64) if scores.shape[0] else np.zeros(0, np.int64)
    if unclassified is not None:
        out[np.asarray(unclassified, dtype=bool)] = UNCLASSIFIED
    return out


def assign_topics(model: TopicModel) -> np.ndarray:
    """Hard topic per fitted document.

    LDA: argmax of theta.  NMF: argmax of the normalised W row, all-zero rows
    are unclassified.  LSA: argmax of |sigma * Vt[:, j]|.
    """
    if isinstance(model, LdaModel):
        return assign_scores(model.theta)
    if isinstance(model, NmfModel):
        return assign_scores(model.doc_topic(), model.zero_rows())
    return assign_scores(np.abs(model.doc_vectors()))


def fold_in(model: TopicModel, X_new: DocTermMatrix, iterations: int = 50) -> np.ndarray:
    """Assign documents the model was not fitted on.

    NMF holds H fixed and runs the one-sided W update; LSA projects with
    Sigma^-1 U' x and ranks by |sigma * projection|.  LDA has no fold-in.
    """
    if isinstance(model, NmfModel):
        W = fold_in_nmf(model, X_new, iterations)
        return assign_scores(W, ~(W.sum(axis=1) > 0))
    if isinstance(model, LsaModel):
        return assign_scores(np.abs(project_lsa(model, X_new) * model.sigma))
    raise TopicTrendsError("LDA models cannot score new documents; refit instead")


@dataclass(frozen=True)
class TrendSeries:
    topic: int
    label: str
    counts: dict[int, int]
    share: float  # percent of in-range documents, rounded half-up to 2 places


def round_half_up(value: Fraction | float, places: int = 2) -> float:
    """Round a nonnegative value half-up, exactly (no binary-float ties)."""
    scaled = Fraction(value) * 10 ** places
    if scaled < 0:
        raise ValueError("round_half_up expects a nonnegative value")
    return float(Fraction(int(scaled + Fraction(1, 2)), 10 ** places))


def _default_label(topic: int) -> str:
    return "unclassified" if topic == UNCLASSIFIED else f"topic-{topic}"


def yearly_series(assignments: Sequence[int], years: Sequence[int], year_range: tuple[int, int],
                  n_topics: int) -> list[TrendSeries]:
    """Documents per topic per year inside ``year_range`` (inclusive).

    One series per topic, plus an ``unclassified`` series when any document
    in range is unclassified.  Shares are over all in-range documents.
    """
    start, end = year_range
    if start > end:
        raise ValueError("year range start is after its end")
    span = range(start, end + 1)
    table = {t: dict.fromkeys(span, 0) for t in range(n_topics)}
    total = 0
    for topic, year in zip(assignments, years):
        if not start <= year <= end:
            continue
        topic = int(topic)
        if topic == UNCLASSIFIED and topic not in table:
            table[topic] = dict.fromkeys(span, 0)
        table[topic][int(year)] += 1
        total += 1
    out = []
    for topic in sorted(table, key=lambda t: (t == UNCLASSIFIED, t)):
        n = sum(table[topic].values())
        share = round_half_up(Fraction(100 * n, total)) if total else 0.0
        out.append(TrendSeries(topic, _default_label(topic), table[topic], share))
    return out


def attach_labels(series: Sequence[TrendSeries], labels: Mapping[int, str]) -> list[TrendSeries]:
    return [replace(s, label=labels.get(s.topic, _default_label(s.topic))) for s in series]


def read_labels(path: str | Path) -> dict[int, str]:
    """``index<TAB>name`` per line."""
    labels = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            idx, name = line.split("\t", 1)
            labels[int(idx)] = name.strip()
        except ValueError:
            raise ValueError(f"{path}:{n}: expected 'index<TAB>name'") from None
    return labels
