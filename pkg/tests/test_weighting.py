import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textbends.errors import DomainError
from textbends.weighting import (
    FilteredStats,
    WeightParams,
    bm25,
    bm25_weight,
    idf,
    score_topk_documents,
    score_topk_keywords,
    tf_augmented,
    tfidf,
)

from conftest import corpus_of

REL = 1e-9


def close(a, b, rel=REL):
    return math.isclose(a, b, rel_tol=rel, abs_tol=0.0)


# -- scalar kernels ---------------------------------------------------------------------


@pytest.mark.parametrize("K", [0.0, 0.1, 0.3, 0.5, 0.9])
@pytest.mark.parametrize("f", [1, 3, 17])
def test_maximal_term_tf_is_one(K, f):
    assert tf_augmented(f, f, K) == 1.0


def test_tf_examples():
    assert tf_augmented(1, 2, 0.5) == 0.75
    assert tf_augmented(1, 4, 0.5) == 0.625


def test_tf_domain_errors():
    with pytest.raises(DomainError):
        tf_augmented(1, 0, 0.5)
    with pytest.raises(DomainError):
        tf_augmented(3, 2, 0.5)


def test_idf_examples():
    assert idf(7, 7) == 1.0
    assert close(idf(10, 1), 1 + math.log(10))
    assert round(idf(10, 1), 6) == 3.302585
    assert round(idf(4, 2), 6) == 1.693147


@pytest.mark.parametrize("N,n", [(0, 0), (5, 0), (3, 4)])
def test_idf_domain_errors(N, n):
    with pytest.raises(DomainError):
        idf(N, n)


def test_weight_params_validation():
    for bad in ({"K": 1.0}, {"K": -0.1}, {"k1": 1.0}, {"k1": 2.5}, {"b": 1.5}, {"log_base": "10"}):
        with pytest.raises(ValueError):
            WeightParams(**bad)


# -- subset kernels -----------------------------------------------------------------------


def test_ubiquitous_maximal_term_scores_one():
    c = corpus_of(("t", "male"), ("t t", "female"))
    stats = FilteredStats.from_corpus(c, range(2))
    t = c.word_index["t"]
    assert tfidf(t, 0, stats) == 1.0
    assert tfidf(t, 1, stats) == 1.0


def test_two_document_tfidf_example():
    c = corpus_of(("a a b", "male"), ("c", "male"))
    stats = FilteredStats.from_corpus(c, range(2))
    value = tfidf(c.word_index["b"], 0, stats)
    assert close(value, 0.75 * (1 + math.log(2)))
    assert round(value, 6) == 1.269860


def test_term_absent_from_document_is_domain_error():
    c = corpus_of(("a", "male"), ("b", "male"))
    stats = FilteredStats.from_corpus(c, range(2))
    with pytest.raises(DomainError):
        tfidf(c.word_index["b"], 0, stats)


def test_single_document_bm25_is_one():
    c = corpus_of(("x y x", "male"))
    stats = FilteredStats.from_corpus(c, [0])
    assert stats.doc_length[0] == stats.avgdl == 3
    assert close(bm25(c.word_index["x"], 0, stats), 1.0, rel=1e-15)


def test_bm25_without_length_normalisation():
    # b=0: denominator is TF + k1 regardless of document length
    for dl in (1, 5, 500):
        assert bm25_weight(0.75, 4, 2, dl, 10.0, 1.5, 0.0) == bm25_weight(0.75, 4, 2, 10.0, 10.0, 1.5, 0.0)
    expected = 0.75 * (1 + math.log(2)) * 2.5 / (0.75 + 1.5)
    assert close(bm25_weight(0.75, 4, 2, 3, 10.0, 1.5, 0.0), expected)


def test_bm25_zero_avgdl_is_domain_error():
    with pytest.raises(DomainError):
        bm25_weight(1.0, 1, 1, 0, 0.0, 1.2, 0.75)


def test_bm25_penalises_longer_documents():
    # same (f_td, f_max) for t, different lengths
    c = corpus_of(("t u", "male"), ("t u v w x y", "male"))
    stats = FilteredStats.from_corpus(c, range(2))
    t = c.word_index["t"]
    assert stats.tf[(0, t)] == stats.tf[(1, t)]
    assert bm25(t, 1, stats) < bm25(t, 0, stats)


def test_singleton_keyword_sum_equals_single_weight():
    c = corpus_of(("a b", "male"), ("b", "male"))
    stats = FilteredStats.from_corpus(c, range(2))
    a = c.word_index["a"]
    for scheme, fn in (("tfidf", tfidf), ("bm25", bm25)):
        assert score_topk_keywords(a, stats, scheme=scheme) == fn(a, 0, stats)


def test_identical_documents_sum_is_multiple():
    c = corpus_of(("a b b", "male"), ("a b b", "male"), ("a b b", "male"), ("z", "male"))
    stats = FilteredStats.from_corpus(c, range(4))
    a = c.word_index["a"]
    assert close(score_topk_keywords(a, stats), 3 * tfidf(a, 0, stats))


def test_document_score_edge_cases():
    c = corpus_of(("a b", "male"), ("c", "male"))
    stats = FilteredStats.from_corpus(c, range(2))
    w = c.word_index
    assert score_topk_documents([w["c"]], 0, stats) == 0.0
    assert score_topk_documents([w["a"]], 0, stats) == tfidf(w["a"], 0, stats)
    with pytest.raises(DomainError):
        score_topk_documents([], 0, stats)


# -- naive oracle -------------------------------------------------------------------------


def naive_weights(texts, scheme, K=0.5, k1=1.2, b=0.75):
    """{(doc index, term): weight} straight from token lists."""
    bags = [Counter(t.split()) for t in texts]
    bags = [(i, bag) for i, bag in enumerate(bags) if bag]
    N = len(bags)
    df = Counter(term for _, bag in bags for term in bag)
    lengths = {i: sum(bag.values()) for i, bag in bags}
    avgdl = sum(lengths.values()) / N
    out = {}
    for i, bag in bags:
        top = max(bag.values())
        for term, f in bag.items():
            tf = K + (1 - K) * f / top
            w = tf * (1 + math.log(N / df[term]))
            if scheme == "bm25":
                w = w * (k1 + 1) / (tf + k1 * (1 - b + b * lengths[i] / avgdl))
            out[(i, term)] = w
    return out


vocab = st.sampled_from(["think", "today", "friday", "a", "b", "c", "d", "e"])
doc = st.lists(vocab, min_size=1, max_size=15).map(" ".join)


@settings(max_examples=40, deadline=None)
@given(st.lists(doc, min_size=1, max_size=200), st.sampled_from(["tfidf", "bm25"]))
def test_kernels_match_naive_oracle(texts, scheme):
    c = corpus_of(*[(t, "male") for t in texts])
    stats = FilteredStats.from_corpus(c, range(c.n_docs))
    expected = naive_weights(texts, scheme)
    kernel = tfidf if scheme == "tfidf" else bm25
    for (i, term), w in expected.items():
        assert close(kernel(c.word_index[term], i, stats), w)
    for term in set(term for _, term in expected):
        total = math.fsum(w for (i, t), w in expected.items() if t == term)
        assert close(score_topk_keywords(c.word_index[term], stats, scheme=scheme), total)
    query = ["think", "today", "friday"]
    ids = [c.word_index[t] for t in query if t in c.word_index]
    if ids:
        for i in range(len(texts)):
            naive = math.fsum(expected.get((i, t), 0.0) for t in query)
            assert close(score_topk_documents(ids, i, stats, scheme=scheme), naive)


@settings(max_examples=40, deadline=None)
@given(st.lists(doc, min_size=2, max_size=30), st.data())
def test_weights_depend_only_on_the_subset(texts, data):
    """Dropping a document outside the subset leaves every weight bit-identical."""
    subset = data.draw(st.sets(st.integers(0, len(texts) - 1), min_size=1, max_size=len(texts) - 1))
    outside = data.draw(st.sampled_from(sorted(set(range(len(texts))) - subset)))
    full = corpus_of(*[(t, "male") for t in texts])
    kept = [i for i in range(len(texts)) if i != outside]
    reduced = corpus_of(*[(texts[i], "male") for i in kept])
    s_full = FilteredStats.from_corpus(full, subset)
    s_red = FilteredStats.from_corpus(reduced, [kept.index(i) for i in subset])
    for i in subset:
        for term in set(texts[i].split()):
            for fn in (tfidf, bm25):
                assert fn(full.word_index[term], i, s_full) == fn(reduced.word_index[term], kept.index(i), s_red)


@settings(max_examples=50, deadline=None)
@given(st.lists(doc, min_size=1, max_size=20))
def test_positivity_and_ranges(texts):
    c = corpus_of(*[(t, "male") for t in texts])
    stats = FilteredStats.from_corpus(c, range(c.n_docs))
    assert all(1 <= n <= stats.N for n in stats.df.values())
    assert stats.avgdl > 0
    for (d, t), tf in stats.tf.items():
        assert 0.5 <= tf <= 1.0
        assert tfidf(t, d, stats) > 0 and bm25(t, d, stats) > 0
        if stats.df[t] == stats.N:
            assert 0.5 <= tfidf(t, d, stats) <= 1.0
