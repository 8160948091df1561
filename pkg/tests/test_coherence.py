import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topictrends.coherence import cv_score, npmi, topic_cv, window_counts
from topictrends.errors import EmptyCorpus, TopicTooSmall


class TestWindows:
    def test_two_tokens(self):
        s = window_counts([["a", "b"]], ["a", "b"], window=2)
        assert (s.n_windows, s.count("a"), s.count("b"), s.joint_count("a", "b")) == (1, 1, 1, 1)

    def test_sliding(self):
        s = window_counts([["a", "b", "c"]], ["a", "b", "c"], window=2)
        assert s.n_windows == 2 and s.count("b") == 2 and s.joint_count("a", "c") == 0
        assert s.count("a") == 1 and s.joint_count("b", "c") == 1

    def test_empty(self):
        assert window_counts([], ["a"]).n_windows == 0
        assert window_counts([[]], ["a"]).n_windows == 0

    def test_brute_force(self):
        rng = np.random.default_rng(0)
        docs = [list(rng.choice(list("abcdefg"), size=rng.integers(1, 30))) for _ in range(20)]
        terms = list("abcdefgz")
        w = 7
        s = window_counts(docs, terms, window=w)
        n, counts, joint = 0, dict.fromkeys(terms, 0), {}
        for doc in docs:
            wins = [doc] if len(doc) <= w else [doc[i:i + w] for i in range(len(doc) - w + 1)]
            for win in wins:
                n += 1
                present = set(win)
                for t in terms:
                    counts[t] += t in present
                    for u in terms:
                        joint[t, u] = joint.get((t, u), 0) + (t in present and u in present)
        assert s.n_windows == n
        assert all(s.count(t) == counts[t] for t in terms)
        assert all(s.joint_count(t, u) == joint[t, u] for t in terms for u in terms)
        for t in terms:
            for u in terms:
                assert s.joint_count(t, u) <= min(s.count(t), s.count(u)) <= s.n_windows


class TestNpmi:
    def test_hand_values(self):
        s = window_counts([["a", "b"], ["c"]], ["a", "b", "c"], window=110)
        assert npmi(s, "a", "b") == pytest.approx(1.0, abs=1e-9)
        expected = math.log(1e-12 / 0.25) / -math.log(1e-12)
        assert npmi(s, "a", "c") == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(-0.9498, abs=1e-4)
        assert npmi(s, "a", "zz") == -1.0

    def test_everywhere_pair(self):
        s = window_counts([["a", "b"], ["b", "a"]], ["a", "b"])
        assert npmi(s, "a", "b") == 1.0

    def test_no_windows(self):
        with pytest.raises(EmptyCorpus):
            npmi(window_counts([], ["a"]), "a", "a")


class TestCv:
    def test_co_occurring_pair(self):
        cv, per = cv_score([["a", "b"]], [["a", "b"], ["c"]])
        assert cv == pytest.approx(1.0, abs=1e-6) and len(per) == 1 and cv == per[0]

    def test_mean_of_topics(self):
        docs = [["a", "b", "c"], ["a", "d"], ["b", "d"], ["c"]]
        cv, per = cv_score([["a", "b"], ["c", "d", "a"]], docs)
        assert cv == pytest.approx(np.mean(per), abs=1e-15)

    def test_errors(self):
        with pytest.raises(TopicTooSmall):
            cv_score([["a"]], [["a"]])
        with pytest.raises(TopicTooSmall):
            cv_score([], [["a"]])
        with pytest.raises(EmptyCorpus):
            cv_score([["a", "b"]], [])

    def test_window_covers_docs_equals_document_level(self):
        rng = np.random.default_rng(1)
        docs = [list(rng.choice(list("abcdef"), size=rng.integers(1, 12))) for _ in range(15)]
        topics = [["a", "b", "c"], ["d", "e", "f"]]
        assert cv_score(topics, docs, window=12) == cv_score(topics, docs, window=500)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=15), min_size=1, max_size=10),
           st.permutations(list("abcd")), st.integers(1, 20))
    def test_properties(self, docs, perm, window):
        topic = ["a", "b", "c", "d"]
        stats = window_counts(docs, topic, window)
        base = topic_cv(stats, topic)
        assert -1.0 <= base <= 1.0
        assert abs(topic_cv(stats, list(perm)) - base) <= 1e-12
        doubled = window_counts(docs + docs, topic, window)
        assert abs(topic_cv(doubled, topic) - base) <= 1e-12
