"""Latent semantic analysis by truncated SVD of the term x document matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import RankTooLarge
from .vectorize import DocTermMatrix

__all__ = ["LsaModel", "fit_lsa", "randomized_svd", "doc_vector", "cosine", "topic_terms_lsa",
           "project_lsa", "EXACT_CUTOFF"]

EXACT_CUTOFF = 64
OVERSAMPLE = 10
POWER_ITERS = 4


@dataclass
class LsaModel:
    U: np.ndarray  # |V| x k
    sigma: np.ndarray  # k, descending
    Vt: np.ndarray  # k x D
    k: int
    seed: int = 0
    method: str = "exact"
    terms: tuple[str, ...] | None = None
    doc_ids: list[str] | None = None

    @property
    def K(self) -> int:
        return self.k

    def doc_vectors(self) -> np.ndarray:
        """D x k latent coordinates, sigma * Vt[:, j] per document."""
        return (self.sigma[:, None] * self.Vt).T

    def doc_topic(self) -> np.ndarray:
        return np.abs(self.doc_vectors())

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.Vt

    def config_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed, "method": self.method}


def _canonical_signs(U: np.ndarray, Vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # largest-|.| entry of each U column made positive; first such entry on ties
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, Vt * signs[:, None]


def randomized_svd(A, k: int, oversample: int = OVERSAMPLE, power_iters: int = POWER_ITERS,
                   rng: np.random.Generator | None = None):
    """Top-k SVD through a randomized range finder.

    A Gaussian test matrix with ``k + oversample`` columns sketches the range
    of ``A``; each power iteration is re-orthonormalised by QR to keep small
    singular directions from being swamped.
    """
    rng = rng or np.random.default_rng(0)
    m, n = A.shape
    ell = min(k + oversample, min(m, n))
    Q, _ = np.linalg.qr(np.asarray(A @ rng.standard_normal((n, ell))))
    for _ in range(power_iters):
        Z, _ = np.linalg.qr(np.asarray(A.T @ Q))
        Q, _ = np.linalg.qr(np.asarray(A @ Z))
    B = np.asarray((A.T @ Q).T)
    Ub, s, Vt = la.svd(B, full_matrices=False, lapack_driver="gesvd")
    return (Q @ Ub)[:, :k], s[:k], Vt[:k]


def fit_lsa(X, k: int, seed: int = 0, method: str = "auto") -> LsaModel:
    """Truncated SVD of a term x document matrix.

    Parameters
    ----------
    X : DocTermMatrix, ndarray or sparse matrix
        A DocTermMatrix is transposed to terms x documents; raw matrices are
        taken to be terms x documents already.
    k : int
        Latent dimensions, ``1 <= k <= min(X.shape)``.
    seed : int
        Seeds the randomized range finder.
    method : {"auto", "exact", "randomized"}
        ``auto`` uses the exact dense SVD when the smaller dimension is at
        most ``EXACT_CUTOFF``.
    """
    terms = doc_ids = None
    if isinstance(X, DocTermMatrix):
        terms, doc_ids = X.vocab.terms, list(X.doc_ids)
        A = X.term_doc()
    elif sp.issparse(X):
        A = sp.csc_matrix(X, dtype=np.float64)
    else:
        A = np.asarray(X, dtype=np.float64)
    m, n = A.shape
    if not 1 <= k <= min(m, n):
        raise RankTooLarge(f"k={k} not in [1, {min(m, n)}] for a {m}x{n} matrix")
    if method == "auto":
        method = "exact" if min(m, n) <= EXACT_CUTOFF else "randomized"
    if method == "exact":
        dense = A.toarray() if sp.issparse(A) else A
        U, s, Vt = la.svd(dense, full_matrices=False, lapack_driver="gesvd")
        U, s, Vt = U[:, :k], s[:k], Vt[:k]
    elif method == "randomized":
        U, s, Vt = randomized_svd(A, k, rng=np.random.Generator(np.random.PCG64(seed)))
    else:
        raise ValueError(f"unknown method {method!r}")
    U, Vt = _canonical_signs(U, Vt)
    return LsaModel(U, np.maximum(s, 0.0), Vt, k, seed, method, terms, doc_ids)


def doc_vector(model: LsaModel, j: int) -> np.ndarray:
    return model.sigma * model.Vt[:, j]


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def topic_terms_lsa(model: LsaModel, component: int, n: int = 10) -> list[tuple[str | int, float]]:
    """Terms with the largest absolute loading on ``component``; weights keep their sign."""
    if not 0 <= component < model.k:
        raise IndexError(f"component {component} out of range")
    col = model.U[:, component]
    idx = np.argsort(-np.abs(col), kind="stable")[:n]
    return [(model.terms[i] if model.terms is not None else int(i), float(col[i])) for i in idx]


def project_lsa(model: LsaModel, X_new) -> np.ndarray:
    """Fold new documents (rows of a docs x terms matrix) in: Sigma^-1 U' x per document."""
    A = X_new.matrix if isinstance(X_new, DocTermMatrix) else X_new
    proj = np.asarray((A @ model.U))
    inv = np.divide(1.0, model.sigma, out=np.zeros_like(model.sigma), where=model.sigma > 0)
    return proj * inv
