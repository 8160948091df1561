import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topictrends.errors import EmptyVocabulary
from topictrends.textprep import TokenDoc
from topictrends.vectorize import (Vocabulary, build_vocab, count_matrix, read_triplets, read_vocab, tfidf,
                                   write_triplets, write_vocab)


def _docs(*token_lists):
    return [TokenDoc(f"d{i}", tuple(toks), 2020) for i, toks in enumerate(token_lists)]


class TestVocab:
    def test_examples(self):
        docs = _docs(["a", "b"], ["a"])
        assert build_vocab(docs, 1, 1.0).index == {"a": 0, "b": 1}
        assert build_vocab(docs, 2, 1.0).terms == ("a",)
        with pytest.raises(EmptyVocabulary):
            build_vocab(docs, 3, 1.0)

    def test_order_and_max_df(self):
        docs = _docs(["z", "z", "y"], ["y", "x"], ["x", "w"], ["w"])
        assert build_vocab(docs, 1, 1.0).terms == ("w", "x", "y", "z")
        assert build_vocab(docs, 1, 0.25).terms == ("z",)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            build_vocab(_docs(["a"]), 0, 1.0)
        with pytest.raises(ValueError):
            build_vocab(_docs(["a"]), 1, 0.0)

    def test_index_inverse(self):
        v = build_vocab(_docs(["a", "b", "c"], ["c"]), 1, 1.0)
        assert all(v.terms[i] == t for t, i in v.index.items()) and len(v) == 3


class TestCounts:
    def test_rows(self):
        v = Vocabulary(("a", "b"), (1, 1))
        dtm = count_matrix(_docs(["a", "a", "b"], ["c"]), v)
        assert dtm.matrix.toarray().tolist() == [[2, 1]]
        assert dtm.doc_ids == ["d0"] and dtm.dropped == ["d1"]
        assert count_matrix([], v).shape == (0, 2)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.lists(st.sampled_from("abcde"), max_size=8), min_size=1, max_size=8), st.randoms())
    def test_row_sums_and_permutation(self, token_lists, rnd):
        docs = _docs(*token_lists)
        try:
            vocab = build_vocab(docs, 1, 1.0)
        except EmptyVocabulary:
            return
        dtm = count_matrix(docs, vocab)
        sums = dict(zip(dtm.doc_ids, np.asarray(dtm.matrix.sum(axis=1)).ravel()))
        for d in docs:
            n = sum(1 for t in d.tokens if t in vocab)
            assert sums.get(d.doc_id, 0) == n
        shuffled = list(docs)
        rnd.shuffle(shuffled)
        other = count_matrix(shuffled, vocab)
        rows = {i: r for i, r in zip(other.doc_ids, other.matrix.toarray())}
        for i, r in zip(dtm.doc_ids, dtm.matrix.toarray()):
            assert np.array_equal(rows[i], r)


class TestTfidf:
    def test_single_entry(self):
        v = Vocabulary(("a",), (1,))
        X = tfidf(count_matrix(_docs(["a"] * 5), v))
        assert X.matrix.toarray().tolist() == [[1.0]]

    def test_idf_values(self):
        v = Vocabulary(("a", "b"), (2, 1))
        counts = count_matrix(_docs(["a", "b"], ["a"]), v)
        X = tfidf(counts).matrix.toarray()
        idf_b = 1 + math.log(3 / 2)
        assert idf_b == pytest.approx(1.405465, abs=1e-6)
        # row 0: a has idf 1 (in every doc), b has idf_b
        expected = np.array([1.0, idf_b]) / math.hypot(1.0, idf_b)
        np.testing.assert_allclose(X[0], expected, rtol=0, atol=1e-15)
        np.testing.assert_allclose(X[1], [1.0, 0.0])

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=10), min_size=1, max_size=10))
    def test_unit_rows(self, token_lists):
        docs = _docs(*token_lists)
        X = tfidf(count_matrix(docs, build_vocab(docs, 1, 1.0))).matrix
        norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
        assert np.all(np.abs(norms - 1.0) <= 1e-12)
        assert (X.data > 0).all()


def test_triplet_and_vocab_files(tmp_path):
    docs = _docs(["a", "b", "b"], ["c", "a"], ["b"])
    vocab = build_vocab(docs, 1, 1.0)
    dtm = tfidf(count_matrix(docs, vocab))
    write_triplets(dtm, tmp_path / "m.txt")
    write_vocab(vocab, tmp_path / "v.txt")
    assert (tmp_path / "m.txt").read_text().splitlines()[0] == f"3 3 {dtm.matrix.nnz}"
    assert np.array_equal(read_triplets(tmp_path / "m.txt").toarray(), dtm.matrix.toarray())
    assert read_vocab(tmp_path / "v.txt") == vocab
