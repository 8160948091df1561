"""Latent Dirichlet Allocation fitted by collapsed Gibbs sampling.

Randomness comes from a single ``numpy.random.Generator`` (PCG64) seeded
with ``LdaConfig.seed``.  Initial labels are drawn first, then one block of
uniforms per sweep, one uniform per token.  Independent fits get distinct
seeds from :func:`topictrends.trends.derive_seed`, so they never share a
stream.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numba
import numpy as np
import scipy.sparse as sp

from .errors import InvalidConfig
from .vectorize import COUNT, DocTermMatrix

__all__ = ["LdaConfig", "LdaModel", "GibbsState", "fit_lda", "top_words", "log_likelihood"]


@dataclass(frozen=True)
class LdaConfig:
    K: int
    alpha: float | None = None  # None -> 50 / K
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 500
    seed: int = 0

    @property
    def alpha_value(self) -> float:
        return 50.0 / self.K if self.alpha is None else float(self.alpha)

    def validate(self) -> None:
        if self.K < 1:
            raise InvalidConfig("K must be >= 1")
        if self.alpha_value <= 0 or self.beta <= 0:
            raise InvalidConfig("alpha and beta must be positive")
        if self.iterations < 1:
            raise InvalidConfig("iterations must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise InvalidConfig("burn_in must satisfy 0 <= burn_in < iterations")
        if self.seed < 0:
            raise InvalidConfig("seed must be unsigned")


@dataclass
class LdaModel:
    theta: np.ndarray  # D x K
    phi: np.ndarray  # K x V
    assignments: np.ndarray  # topic label per token, document order then term order
    doc_ptr: np.ndarray  # token slice bounds per document, length D + 1
    config: LdaConfig
    terms: tuple[str, ...] | None = None
    doc_ids: list[str] | None = None

    @property
    def K(self) -> int:
        return self.phi.shape[0]

    def doc_topic(self) -> np.ndarray:
        return self.theta

    def config_dict(self) -> dict:
        d = asdict(self.config)
        d["alpha"] = self.config.alpha_value
        return d


@dataclass
class GibbsState:
    """Read-only view handed to the per-sweep callback."""

    sweep: int
    n_dk: np.ndarray
    n_kw: np.ndarray
    n_k: np.ndarray
    z: np.ndarray
    alpha: float
    beta: float

    def estimates(self) -> tuple[np.ndarray, np.ndarray]:
        """theta and phi from the current counts alone."""
        K = self.n_dk.shape[1]
        V = self.n_kw.shape[1]
        theta = (self.n_dk + self.alpha) / (self.n_dk.sum(axis=1, keepdims=True) + K * self.alpha)
        phi = (self.n_kw + self.beta) / (self.n_k[:, None] + V * self.beta)
        return theta, phi


@numba.njit(cache=True, nogil=True)
def _gibbs_sweep(docs, words, z, n_dk, n_kw, n_k, alpha, beta, vbeta, u, p):
    K = n_k.shape[0]
    for i in range(z.shape[0]):
        d = docs[i]
        w = words[i]
        k = z[i]
        n_dk[d, k] -= 1
        n_kw[k, w] -= 1
        n_k[k] -= 1
        total = 0.0
        for t in range(K):
            total += (n_dk[d, t] + alpha) * (n_kw[t, w] + beta) / (n_k[t] + vbeta)
            p[t] = total
        target = u[i] * total
        k = 0
        while k < K - 1 and p[k] <= target:
            k += 1
        z[i] = k
        n_dk[d, k] += 1
        n_kw[k, w] += 1
        n_k[k] += 1


def _expand_tokens(counts: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = counts.data
    if np.any(data < 0) or np.any(data != np.round(data)):
        raise InvalidConfig("LDA needs a matrix of nonnegative integer counts")
    reps = data.astype(np.int64)
    row_of_entry = np.repeat(np.arange(counts.shape[0], dtype=np.int64), np.diff(counts.indptr))
    docs = np.repeat(row_of_entry, reps)
    words = np.repeat(counts.indices.astype(np.int64), reps)
    lengths = np.bincount(docs, minlength=counts.shape[0])
    doc_ptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    return docs, words, doc_ptr


def fit_lda(counts: DocTermMatrix | sp.spmatrix | np.ndarray, cfg: LdaConfig,
            callback: Callable[[GibbsState], None] | None = None) -> LdaModel:
    """Fit LDA by collapsed Gibbs sampling.

    Parameters
    ----------
    counts : DocTermMatrix or matrix
        Documents x terms integer counts.
    cfg : LdaConfig
    callback : callable, optional
        Called after every sweep with a :class:`GibbsState`.  The arrays are
        the live sampler state and must not be modified.

    Returns
    -------
    LdaModel
        theta and phi are computed from count tables averaged over the
        sweeps after ``burn_in``.
    """
    cfg.validate()
    terms = doc_ids = None
    if isinstance(counts, DocTermMatrix):
        if counts.weighting != COUNT:
            raise InvalidConfig("LDA must be fitted on raw counts")
        terms, doc_ids = counts.vocab.terms, list(counts.doc_ids)
        X = counts.matrix
    else:
        X = counts
    X = sp.csr_matrix(X)
    X.sort_indices()
    D, V = X.shape
    if D == 0 or X.nnz == 0:
        raise InvalidConfig("cannot fit LDA on an empty matrix")

    K, alpha, beta = cfg.K, cfg.alpha_value, float(cfg.beta)
    docs, words, doc_ptr = _expand_tokens(X)
    n_tokens = docs.shape[0]

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    z = rng.integers(0, K, size=n_tokens).astype(np.int64)
    n_dk = np.zeros((D, K), dtype=np.int64)
    n_kw = np.zeros((K, V), dtype=np.int64)
    np.add.at(n_dk, (docs, z), 1)
    np.add.at(n_kw, (z, words), 1)
    n_k = n_kw.sum(axis=1)

    sum_dk = np.zeros((D, K), dtype=np.float64)
    sum_kw = np.zeros((K, V), dtype=np.float64)
    p = np.empty(K, dtype=np.float64)
    for sweep in range(cfg.iterations):
        u = rng.random(n_tokens)
        _gibbs_sweep(docs, words, z, n_dk, n_kw, n_k, alpha, beta, V * beta, u, p)
        if sweep >= cfg.burn_in:
            sum_dk += n_dk
            sum_kw += n_kw
        if callback is not None:
            callback(GibbsState(sweep, n_dk, n_kw, n_k, z, alpha, beta))

    n_kept = cfg.iterations - cfg.burn_in
    mean_dk = sum_dk / n_kept
    mean_kw = sum_kw / n_kept
    doc_len = np.diff(doc_ptr).astype(np.float64)
    theta = (mean_dk + alpha) / (doc_len[:, None] + K * alpha)
    phi = (mean_kw + beta) / (mean_kw.sum(axis=1, keepdims=True) + V * beta)
    return LdaModel(theta, phi, z.copy(), doc_ptr, cfg, terms, doc_ids)


def _ranked(weights: np.ndarray, n: int) -> np.ndarray:
    # stable sort on -w keeps lower indices first among ties
    return np.argsort(-weights, kind="stable")[:n]


def top_words(model: LdaModel, k: int, n: int = 10) -> list[tuple[str | int, float]]:
    """The ``n`` most probable terms of topic ``k``, descending, ties by index.

    Terms are returned as strings when the model knows its vocabulary and as
    integer indices otherwise.
    """
    if not 0 <= k < model.K:
        raise IndexError(f"topic {k} out of range for K={model.K}")
    if n < 1:
        raise ValueError("n must be >= 1")
    row = model.phi[k]
    idx = _ranked(row, n)
    return [(model.terms[i] if model.terms is not None else int(i), float(row[i])) for i in idx]


def log_likelihood(model: LdaModel | tuple[np.ndarray, np.ndarray],
                   counts: DocTermMatrix | sp.spmatrix | np.ndarray) -> float:
    """Sum over tokens of log sum_k theta_dk phi_kw."""
    theta, phi = (model.theta, model.phi) if isinstance(model, LdaModel) else model
    X = sp.csr_matrix(counts.matrix if isinstance(counts, DocTermMatrix) else counts).tocoo()
    probs = np.einsum("ik,ki->i", theta[X.row], phi[:, X.col])
    return float(np.dot(X.data, np.log(probs)))
