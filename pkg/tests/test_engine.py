import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textbends.engine import (
    EXECUTORS,
    compare_results,
    execute,
    execute_mapreduce,
    execute_oracle,
    plan,
    selectivity,
    verify,
)
from textbends.errors import ConfigError, DomainError
from textbends.gencorpus import GeneratorConfig, generate
from textbends.model import from_nested, to_nested
from textbends.weighting import WeightParams
from textbends.workload import STANDARD_PARAMS, FilterSet, QuerySpec, build_workload, make_spec

from conftest import corpus_of, record

LN2 = math.log(2)


def q1(gender="male", scheme="tfidf", k=10, **kw):
    return QuerySpec("Q1", scheme, FilterSet(gender=gender), k, WeightParams(**kw))


def q1d(terms, gender="male", scheme="tfidf", k=10):
    return QuerySpec("Q1d", scheme, FilterSet(gender=gender, search_terms=tuple(terms)), k)


def assert_entries(result, expected):
    assert result.keys == [k for k, _ in expected]
    for (_, got), (_, want) in zip(result.entries, expected):
        assert math.isclose(got, want, rel_tol=1e-9)


# -- hand corpus --------------------------------------------------------------------------


def naive_hand_oracle():
    """Direct evaluation for d1="a a b", d2="b c" (male subset)."""
    N = 2
    n = {"a": 1, "b": 2, "c": 1}
    tf = {("d1", "a"): 1.0, ("d1", "b"): 0.75, ("d2", "b"): 1.0, ("d2", "c"): 1.0}
    scores = {}
    for (_, term), t in tf.items():
        scores[term] = scores.get(term, 0.0) + t * (1 + math.log(N / n[term]))
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def test_hand_oracle_matches_closed_forms():
    # c is a maximal term of d2 ("b c"), so tf = 1 and it ties with a;
    # the ascending-key tie-break puts a first.
    got = naive_hand_oracle()
    assert [k for k, _ in got] == ["b", "a", "c"]
    assert dict(got) == pytest.approx({"b": 1.75, "a": 1 + LN2, "c": 1 + LN2}, rel=1e-12)


@pytest.mark.parametrize("executor", EXECUTORS)
def test_hand_corpus_keyword_ranking(hand_corpus, executor):
    result = execute(hand_corpus, q1(), executor)
    assert_entries(result, naive_hand_oracle())
    assert result.keys == ["b", "a", "c"]
    assert result.total_matching == 3


@pytest.mark.parametrize("executor", EXECUTORS)
def test_document_query_single_term(hand_corpus, executor):
    result = execute(hand_corpus, q1d(["a"]), executor)
    assert result.keys == [1]
    assert math.isclose(result.scores[0], 1 + LN2, rel_tol=1e-12)


@pytest.mark.parametrize("executor", EXECUTORS)
def test_no_matching_gender_is_empty(executor):
    c = corpus_of(("a b", "male"), ("c", "male"))
    result = execute(c, q1("female"), executor)
    assert result.entries == () and result.total_matching == 0
    assert execute(c, q1d(["a"], "female"), executor).entries == ()


@pytest.mark.parametrize("executor", EXECUTORS)
def test_absent_search_term_is_empty(hand_corpus, executor):
    assert execute(hand_corpus, q1d(["zebra"]), executor).entries == ()


@pytest.mark.parametrize("executor", EXECUTORS)
def test_empty_corpus_is_empty(executor):
    empty = from_nested([])
    for spec in (q1(), q1d(["a"])):
        assert execute(empty, spec, executor).entries == ()


def test_mapreduce_over_empty_stream():
    spec = q1()
    assert execute_mapreduce(plan(spec, "mapreduce"), iter(()), spec).entries == ()


@pytest.mark.parametrize("executor", EXECUTORS)
def test_single_document_keywords_scored_by_tf(executor):
    c = corpus_of(("x x x y z z", "male"))
    result = execute(c, q1(), executor)
    # N = n = 1, so every weight is its augmented TF
    assert_entries(result, [("x", 1.0), ("z", 0.5 + 0.5 * 2 / 3), ("y", 0.5 + 0.5 / 3)])


@pytest.mark.parametrize("executor", EXECUTORS)
def test_ties_break_on_ascending_key(executor):
    c = corpus_of(("q p", "male"), ("s r", "male"))
    assert execute(c, q1(), executor).keys == ["p", "q", "r", "s"]
    assert execute(c, q1d(["p", "r"]), executor).keys == [1, 2]


def test_recomputes_tf_for_other_K(hand_corpus):
    spec = q1(K=0.2)
    results = [execute(hand_corpus, spec, e) for e in EXECUTORS]
    assert all(compare_results(results[0], r) is None for r in results[1:])
    b = dict(results[0].entries)["b"]
    assert math.isclose(b, (0.2 + 0.8 / 2) + 1.0, rel_tol=1e-12)


# -- plans --------------------------------------------------------------------------------


def test_plan_q1_tfidf():
    p = plan(make_spec("Q1", "tfidf", "male", STANDARD_PARAMS))
    assert p.joins == {"c5", "c6"}
    assert p.nested == ["Q_nD"]
    assert p.filters == {"c1"}
    assert p.of_kind("group_by") == ["Word"]
    assert [s.kind for s in p.stages][-1] == "topk"


def test_plan_q4_bm25():
    p = plan(make_spec("Q4", "bm25", "male", STANDARD_PARAMS))
    assert p.joins == {"c5", "c6", "c7", "c8"}
    assert p.nested == ["Q_DL"]
    assert p.filters == {"c1", "c2", "c3"}


def test_plan_q2d_bm25():
    p = plan(make_spec("Q2d", "bm25", "female", STANDARD_PARAMS))
    assert p.joins == {"c5", "c6", "c7"}
    assert p.nested == ["Q_nW", "Q_DL"]
    assert p.of_kind("group_by") == ["ID_Document"]
    assert "c4" in p.filters


# -- generated corpus ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def workload():
    return build_workload(STANDARD_PARAMS)


def test_all_specs_agree_with_oracle(small_generated, workload):
    corpus, _ = small_generated
    outcome = verify(corpus, workload)
    assert [spec.label for spec, problem in outcome if problem] == []


def test_document_results_contain_a_search_term(small_generated, workload):
    corpus, _ = small_generated
    by_id = {int(d): t.split() for d, t in zip(corpus.doc_ids, corpus.lemma_text)}
    for spec in workload:
        if spec.task == "documents":
            for doc_id in execute(corpus, spec).keys:
                assert set(by_id[doc_id]) & set(spec.filters.search_terms)


def test_q4_keys_within_q2_and_q3_candidates(small_generated):
    corpus, _ = small_generated
    big = lambda q: set(execute(corpus, make_spec(q, "tfidf", "male", STANDARD_PARAMS, k=10**6)).keys)
    q1_, q2_, q3_, q4_ = (big(q) for q in ("Q1", "Q2", "Q3", "Q4"))
    assert q4_ <= q2_ <= q1_
    assert q4_ <= q3_ <= q1_


@pytest.mark.parametrize("executor", ["columnar", "mapreduce"])
def test_topk_prefix_stability(small_generated, executor):
    corpus, _ = small_generated
    for qid in ("Q1", "Q3", "Q1d"):
        full = execute(corpus, make_spec(qid, "bm25", "female", STANDARD_PARAMS, k=25), executor)
        for k in (1, 5, 10):
            short = execute(corpus, make_spec(qid, "bm25", "female", STANDARD_PARAMS, k=k), executor)
            assert short.entries == full.entries[:k]


@pytest.mark.parametrize("executor", EXECUTORS)
def test_repeated_execution_bit_identical(small_generated, executor):
    corpus, _ = small_generated
    spec = make_spec("Q4d", "bm25", "male", STANDARD_PARAMS)
    assert execute(corpus, spec, executor).checksum() == execute(corpus, spec, executor).checksum()


def test_entries_sorted_and_unique(small_generated, workload):
    corpus, _ = small_generated
    for spec in workload:
        r = execute(corpus, spec)
        assert len(set(r.keys)) == len(r.keys) <= spec.k
        assert r.entries == tuple(sorted(r.entries, key=lambda kv: (-kv[1], kv[0])))


def test_oracle_guard():
    c = corpus_of(("a", "male"), ("b", "male"), ("c", "female"))
    with pytest.raises(ConfigError):
        execute_oracle(c, q1(), max_docs=2)
    with pytest.raises(ConfigError):
        verify(c, [q1()], max_docs=2)


def test_corrupted_tf_column_is_caught_by_oracle(small_generated):
    corpus, _ = small_generated
    broken = from_nested(to_nested(corpus))
    broken.fact_tf[::7] *= 0.9
    outcome = verify(broken, build_workload(STANDARD_PARAMS))
    failing = [spec.label for spec, problem in outcome if problem]
    assert failing
    assert all("oracle" in problem for _, problem in outcome if problem)


# -- selectivity --------------------------------------------------------------------------


def test_selectivity_everything_and_nothing():
    both = corpus_of(("a b", "male"), ("c", "male"))
    assert selectivity(q1("male"), both) == 0.0
    assert selectivity(q1("female"), both) == 1.0


def test_selectivity_empty_corpus_is_domain_error():
    with pytest.raises(DomainError):
        selectivity(q1(), from_nested([]))


def test_selectivity_counts_fact_rows(hand_corpus):
    # 5 fact rows; male docs d1, d2 contribute 4; of those only (d1, a) holds "a"
    assert selectivity(q1("male"), hand_corpus) == pytest.approx(1 - 4 / 5)
    assert selectivity(q1d(["a"]), hand_corpus) == pytest.approx(1 - 1 / 5)


def _check_selectivity_order(corpus, gender, scheme):
    S = {q: selectivity(make_spec(q, scheme, gender, STANDARD_PARAMS), corpus)
         for q in ("Q1", "Q2", "Q3", "Q4", "Q1d", "Q2d", "Q3d", "Q4d")}
    assert all(0.0 <= s <= 1.0 for s in S.values())
    for prefix in ("Q{}", "Q{}d"):
        s1, s2, s3, s4 = (S[prefix.format(i)] for i in range(1, 5))
        assert s1 <= s2 <= s4 and s1 <= s3 <= s4
    for i in range(1, 5):
        assert S[f"Q{i}d"] >= S[f"Q{i}"]


def test_selectivity_order_on_generated(small_generated):
    corpus, _ = small_generated
    for gender in ("male", "female"):
        _check_selectivity_order(corpus, gender, "tfidf")


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.0002, 0.0005]))
def test_selectivity_order_any_seed(seed, sf):
    corpus, _ = generate(GeneratorConfig(sf=sf, seed=seed))
    _check_selectivity_order(corpus, "female", "bm25")


# -- random small corpora: dual engine + oracle --------------------------------------------

vocab = st.sampled_from(["think", "today", "friday", "a", "b", "c"])


@st.composite
def small_corpora(draw):
    n = draw(st.integers(0, 12))
    recs = []
    for i in range(n):
        text = " ".join(draw(st.lists(vocab, min_size=0, max_size=8)))
        recs.append(record(
            i + 1, text,
            gender=draw(st.sampled_from(["male", "female"])),
            date=draw(st.sampled_from(["2015-09-16T23:59:59", "2015-09-17T00:00:00", "2015-09-18T00:00:00", "2015-09-18T00:00:01"])),
            x=draw(st.sampled_from([19.5, 20.0, 40.0, 41.0])),
            y=draw(st.sampled_from([-100.0, 0.0, 100.5])),
        ))
    return from_nested(recs)


@settings(max_examples=40, deadline=None)
@given(small_corpora(), st.sampled_from([1, 3, 10]), st.sampled_from([{}, {"k1": 2.0, "b": 0.3}, {"K": 0.25}]))
def test_executors_agree_on_random_corpora(corpus, k, weights):
    specs = build_workload(STANDARD_PARAMS, k=k, weights=WeightParams(**weights))
    assert [s.label for s, problem in verify(corpus, specs) if problem] == []
