import numpy as np
import pytest
import scipy.sparse as sp

from topictrends.errors import InvalidConfig, NegativeInput
from topictrends.nmf import (NmfConfig, NmfModel, doc_topic_nmf, fit_nmf, fold_in_nmf, frobenius_objective,
                             topic_terms_nmf)


def test_zero_matrix():
    model = fit_nmf(np.zeros((2, 2)), NmfConfig(r=1, seed=0))
    assert model.objective_trace[0] == 0.0 and model.iterations_run == 1


def test_exact_factorisation_is_a_fixed_point():
    rng = np.random.default_rng(5)
    W, H = rng.random((6, 2)) + 0.1, rng.random((2, 5)) + 0.1
    model = fit_nmf(W @ H, NmfConfig(r=2, max_iter=20, tol=0.0), W0=W, H0=H)
    assert max(model.objective_trace) <= 1e-12
    np.testing.assert_allclose(model.W @ model.H, W @ H, rtol=1e-10)


def test_sparse_and_dense_agree():
    X = np.random.default_rng(1).random((20, 12))
    X[X < 0.6] = 0
    dense = fit_nmf(X, NmfConfig(r=3, max_iter=50, seed=2))
    sparse = fit_nmf(sp.csr_matrix(X), NmfConfig(r=3, max_iter=50, seed=2))
    np.testing.assert_allclose(dense.W, sparse.W, rtol=1e-9)
    np.testing.assert_allclose(dense.objective_trace, sparse.objective_trace, rtol=1e-8, atol=1e-12)
    assert frobenius_objective(sp.csr_matrix(X), dense.W, dense.H) == pytest.approx(
        frobenius_objective(X, dense.W, dense.H), rel=1e-9)


def test_deterministic_seed():
    X = np.random.default_rng(3).random((15, 10))
    a, b = fit_nmf(X, NmfConfig(r=4, seed=9)), fit_nmf(X, NmfConfig(r=4, seed=9))
    assert np.array_equal(a.W, b.W) and np.array_equal(a.H, b.H)


def test_scale_indifference():
    rng = np.random.default_rng(4)
    X, W, H = rng.random((8, 6)), rng.random((8, 3)), rng.random((3, 6))
    c = np.array([2.0, 0.5, 4.0])
    np.testing.assert_allclose((W * c) @ (H / c[:, None]), W @ H, rtol=1e-14)
    assert frobenius_objective(X, W * c, H / c[:, None]) == pytest.approx(frobenius_objective(X, W, H),
                                                                          rel=1e-13)


def test_tolerance_stops_early():
    X = np.random.default_rng(6).random((30, 20))
    model = fit_nmf(X, NmfConfig(r=3, max_iter=300, tol=1e-3))
    assert model.iterations_run < 300 and len(model.objective_trace) == model.iterations_run


def test_errors():
    with pytest.raises(NegativeInput):
        fit_nmf(np.array([[1.0, -1.0]]), NmfConfig(r=1))
    with pytest.raises(InvalidConfig):
        fit_nmf(np.ones((2, 2)), NmfConfig(r=0))
    with pytest.raises(InvalidConfig):
        fit_nmf(np.ones((2, 2)), NmfConfig(r=1, epsilon=0.0))


def _model(W, H):
    return NmfModel(np.asarray(W, float), np.asarray(H, float), [], 0, NmfConfig(r=len(H)), ("a", "b", "c"))


def test_topic_terms():
    m = _model([[1, 1]], [[0, 3, 1], [0, 0, 0]])
    assert [t for t, _ in topic_terms_nmf(m, 0, 2)] == ["b", "c"]
    assert topic_terms_nmf(m, 1, 3) == [("a", 0.0), ("b", 0.0), ("c", 0.0)]


def test_doc_topic():
    vec, flag = doc_topic_nmf(np.array([[1.0, 3.0]]), 0)
    assert vec.tolist() == [0.25, 0.75] and not flag
    vec, flag = doc_topic_nmf(np.array([[0.0, 0.0]]), 0)
    assert vec.tolist() == [0.5, 0.5] and flag
    m = _model([[1, 3], [0, 0], [2, 2]], [[1, 0, 0], [0, 1, 0]])
    np.testing.assert_allclose(m.doc_topic().sum(axis=1), 1.0, atol=1e-12)
    assert m.zero_rows().tolist() == [False, True, False]


def test_fold_in_recovers_training_rows():
    rng = np.random.default_rng(7)
    W, H = rng.random((10, 2)), rng.random((2, 8))
    model = fit_nmf(W @ H, NmfConfig(r=2, max_iter=500, tol=0.0, seed=1))
    W_new = fold_in_nmf(model, W @ H, iterations=300)
    np.testing.assert_allclose(W_new @ model.H, W @ H, atol=1e-3)
    with pytest.raises(InvalidConfig):
        fold_in_nmf(model, np.ones((1, 3)))
