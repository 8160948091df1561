"""Nonnegative matrix factorisation with Lee-Seung multiplicative updates.

Minimises 0.5 * ||X - WH||_F^2.  Both factors use the Frobenius update pair;
``epsilon`` only guards the denominators.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidConfig, NegativeInput
from .vectorize import DocTermMatrix

__all__ = ["NmfConfig", "NmfModel", "fit_nmf", "frobenius_objective", "topic_terms_nmf",
           "doc_topic_nmf", "fold_in_nmf"]


@dataclass(frozen=True)
class NmfConfig:
    r: int
    max_iter: int = 300
    tol: float = 1e-4
    seed: int = 0
    epsilon: float = 1e-12

    def validate(self) -> None:
        if self.r < 1:
            raise InvalidConfig("rank r must be >= 1")
        if self.max_iter < 1:
            raise InvalidConfig("max_iter must be >= 1")
        if self.tol < 0:
            raise InvalidConfig("tol must be nonnegative")
        if not self.epsilon > 0:
            raise InvalidConfig("epsilon must be positive")
        if self.seed < 0:
            raise InvalidConfig("seed must be unsigned")


@dataclass
class NmfModel:
    W: np.ndarray  # m x r
    H: np.ndarray  # r x n
    objective_trace: list[float]
    iterations_run: int
    config: NmfConfig
    terms: tuple[str, ...] | None = None
    doc_ids: list[str] | None = None

    @property
    def K(self) -> int:
        return self.W.shape[1]

    def doc_topic(self) -> np.ndarray:
        """Row-normalised W; all-zero rows become uniform (see ``zero_rows``)."""
        totals = self.W.sum(axis=1, keepdims=True)
        out = np.full(self.W.shape, 1.0 / self.K)
        np.divide(self.W, totals, out=out, where=totals > 0)
        return out

    def zero_rows(self) -> np.ndarray:
        return ~(self.W.sum(axis=1) > 0)

    def config_dict(self) -> dict:
        return asdict(self.config)


def _as_matrix(X):
    terms = doc_ids = None
    if isinstance(X, DocTermMatrix):
        terms, doc_ids = X.vocab.terms, list(X.doc_ids)
        X = X.matrix
    if sp.issparse(X):
        X = sp.csr_matrix(X, dtype=np.float64)
        data = X.data
    else:
        X = np.asarray(X, dtype=np.float64)
        data = X
    if X.ndim != 2 or 0 in X.shape:
        raise InvalidConfig("X must be a nonempty 2-d matrix")
    if np.any(data < 0) or not np.all(np.isfinite(data)):
        raise NegativeInput("X must be finite and nonnegative")
    return X, terms, doc_ids


def frobenius_objective(X, W: np.ndarray, H: np.ndarray) -> float:
    """0.5 * ||X - WH||_F^2.

    Dense inputs are differenced directly.  Sparse inputs use
    ||X||^2 - 2<X, WH> + <W'W, HH'> so WH is never materialised.
    """
    if sp.issparse(X):
        xx = float(X.multiply(X).sum())
        cross = float(np.sum(W * (X @ H.T)))
        quad = float(np.sum((W.T @ W) * (H @ H.T)))
        return 0.5 * max(xx - 2.0 * cross + quad, 0.0)
    R = X - W @ H
    return 0.5 * float(np.sum(R * R))


def _update_H(X, W, H, eps):
    return H * np.asarray(W.T @ X) / (W.T @ W @ H + eps)


def _update_W(X, W, H, eps):
    return W * np.asarray(X @ H.T) / (W @ (H @ H.T) + eps)


def fit_nmf(X, cfg: NmfConfig, W0: np.ndarray | None = None, H0: np.ndarray | None = None,
            check_nonneg: bool = False) -> NmfModel:
    """Factor ``X ~ W H``.

    Parameters
    ----------
    X : DocTermMatrix, ndarray or sparse matrix, shape (m, n)
    cfg : NmfConfig
    W0, H0 : ndarray, optional
        Starting factors.  By default both are uniform on (0, 1) from
        ``cfg.seed``, scaled by ``sqrt(mean(X) / r)``.
    check_nonneg : bool
        Assert nonnegativity of both factors after every update.

    Iteration stops when the relative objective decrease drops below
    ``cfg.tol`` or after ``cfg.max_iter`` iterations.  ``objective_trace``
    holds the objective after each iteration.
    """
    cfg.validate()
    X, terms, doc_ids = _as_matrix(X)
    m, n = X.shape
    r = cfg.r
    if W0 is None or H0 is None:
        rng = np.random.Generator(np.random.PCG64(cfg.seed))
        scale = np.sqrt(float(X.mean()) / r)
        W = rng.random((m, r)) * scale
        H = rng.random((r, n)) * scale
    if W0 is not None:
        W = np.array(W0, dtype=np.float64)
    if H0 is not None:
        H = np.array(H0, dtype=np.float64)
    if W.shape != (m, r) or H.shape != (r, n):
        raise InvalidConfig(f"initial factors must be {m}x{r} and {r}x{n}")

    trace: list[float] = []
    prev = frobenius_objective(X, W, H)
    it = 0
    for it in range(1, cfg.max_iter + 1):
        H = _update_H(X, W, H, cfg.epsilon)
        W = _update_W(X, W, H, cfg.epsilon)
        if check_nonneg:
            assert (W >= 0).all() and (H >= 0).all(), f"negative factor entry at iteration {it}"
        obj = frobenius_objective(X, W, H)
        trace.append(obj)
        if prev == 0.0 or (prev - obj) / prev < cfg.tol:
            break
        prev = obj
    return NmfModel(W, H, trace, it, cfg, terms, doc_ids)


def topic_terms_nmf(model: NmfModel, component: int, n: int = 10) -> list[tuple[str | int, float]]:
    """Largest entries of row ``component`` of H, descending, ties by index."""
    if not 0 <= component < model.H.shape[0]:
        raise IndexError(f"component {component} out of range")
    row = model.H[component]
    idx = np.argsort(-row, kind="stable")[:n]
    return [(model.terms[i] if model.terms is not None else int(i), float(row[i])) for i in idx]


def doc_topic_nmf(model: NmfModel | np.ndarray, doc_row: int) -> tuple[np.ndarray, bool]:
    """Normalised row of W and a flag set when the row was all zero (uniform returned)."""
    W = model.W if isinstance(model, NmfModel) else np.asarray(model)
    row = W[doc_row]
    total = row.sum()
    if not total > 0:
        return np.full(row.shape[0], 1.0 / row.shape[0]), True
    return row / total, False


def fold_in_nmf(model: NmfModel, X_new, iterations: int = 50) -> np.ndarray:
    """W rows for new documents with H held fixed.

    Starts from a constant ``sqrt(mean(X_new) / r)`` and applies the W
    multiplicative update ``iterations`` times.
    """
    X, _, _ = _as_matrix(X_new)
    r = model.H.shape[0]
    if X.shape[1] != model.H.shape[1]:
        raise InvalidConfig(f"new documents have {X.shape[1]} terms, model has {model.H.shape[1]}")
    W = np.full((X.shape[0], r), np.sqrt(float(X.mean()) / r))
    for _ in range(iterations):
        W = _update_W(X, W, model.H, model.config.epsilon)
    return W
