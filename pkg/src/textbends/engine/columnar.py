"""Columnar join/aggregate executor.

Joins are foreign-key gathers on the fact table, the nested statistics
queries become bincounts over the filtered fact rows, and the aggregation
operator is a weighted bincount keyed by word (keywords task) or document
(documents task).  Fact rows are sorted by (document, word), so every sum
accumulates in ascending document order per word and ascending word order
per document.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..model import GENDERS, Corpus, augmented_tf
from ..weighting import weight_values
from ..workload import FilterSet, QuerySpec
from .plan import ExecutionPlan, plan as make_plan
from .result import RankedResult, empty_result


def document_mask(corpus: Corpus, filters: FilterSet, joins: set[str] | None = None) -> np.ndarray:
    """Boolean mask over document rows for the dimension filters c1..c3."""
    joins = {"c5", "c6", "c7", "c8"} if joins is None else joins
    mask = np.ones(corpus.n_docs, dtype=bool)
    if filters.gender is not None:
        mask &= corpus.doc_gender == GENDERS.index(filters.gender)
    if filters.time_window is not None:
        if "c7" not in joins:
            raise DomainError("time filter c2 needs the TimeDimension join c7")
        ts = corpus.doc_ts
        mask &= (ts >= filters.time_window.start) & (ts <= filters.time_window.end)
    if filters.geo_box is not None:
        if "c8" not in joins:
            raise DomainError("location filter c3 needs the LocationDimension join c8")
        g = filters.geo_box
        x, y = corpus.doc_x, corpus.doc_y
        mask &= (x >= g.x_min) & (x <= g.x_max) & (y >= g.y_min) & (y <= g.y_max)
    return mask


def filtered_fact_rows(corpus: Corpus, filters: FilterSet, joins: set[str] | None = None) -> np.ndarray:
    return np.flatnonzero(document_mask(corpus, filters, joins)[corpus.fact_doc])


def term_ids(corpus: Corpus, terms) -> np.ndarray:
    index = corpus.word_index
    return np.array(sorted({index[t] for t in terms if t in index}), dtype=np.int64)


def _fact_tf(corpus: Corpus, rows: np.ndarray, K: float) -> np.ndarray:
    if K == corpus.K:
        return corpus.fact_tf[rows]
    off = corpus.doc_offsets
    starts = off[:-1][off[:-1] < off[1:]]
    fmax_doc = np.zeros(corpus.n_docs, dtype=np.int64)
    fmax_doc[corpus.fact_doc[starts]] = np.maximum.reduceat(corpus.fact_count, starts)
    return augmented_tf(corpus.fact_count[rows], fmax_doc[corpus.fact_doc[rows]], K)


def _top_k(scores: np.ndarray, tiebreak: np.ndarray, k: int) -> np.ndarray:
    """Positions of the k best entries: descending score, then ascending tiebreak."""
    order = np.lexsort((tiebreak, -scores))
    return order[:k]


def execute_columnar(plan: ExecutionPlan, corpus: Corpus, spec: QuerySpec) -> RankedResult:
    if plan.query_id != spec.query_id or plan.scheme != spec.scheme:
        raise ValueError(f"plan for {plan.query_id}/{plan.scheme} does not match spec {spec.label}")
    params = spec.params
    task = spec.task

    # selection on the joined dimensions (c1..c3)
    rows = filtered_fact_rows(corpus, spec.filters, plan.joins)
    if rows.size == 0:
        return empty_result(task)
    d = corpus.fact_doc[rows]
    w = corpus.fact_word[rows]
    c = corpus.fact_count[rows]
    tf = _fact_tf(corpus, rows, params.K)

    # statistics pass (Q_nD / Q_DL / Q_nW semantics, same filters as the main query)
    doc_len = np.bincount(d, weights=c if params.doc_length == "tokens" else None, minlength=corpus.n_docs)
    in_subset = doc_len > 0
    N = int(in_subset.sum())
    total_len = int(c.sum()) if params.doc_length == "tokens" else int(rows.size)
    avgdl = total_len / N
    df = np.bincount(w, minlength=corpus.n_words)

    if task == "keywords":
        weights = weight_values(spec.scheme, tf, N, df[w], doc_len[d], avgdl, params)
        scores = np.bincount(w, weights=weights, minlength=corpus.n_words)
        candidates = np.flatnonzero(df > 0)
        best = candidates[_top_k(scores[candidates], corpus.lemma_rank[candidates], spec.k)]
        entries = tuple((corpus.lemmas[i], float(scores[i])) for i in best)
        return RankedResult(task, entries, int(candidates.size), int(rows.size))

    # documents task: c4 keeps only fact rows of the search terms
    hit = np.isin(w, term_ids(corpus, spec.filters.search_terms))
    if not hit.any():
        return empty_result(task)
    dh, wh = d[hit], w[hit]
    weights = weight_values(spec.scheme, tf[hit], N, df[wh], doc_len[dh], avgdl, params)
    scores = np.bincount(dh, weights=weights, minlength=corpus.n_docs)
    candidates = np.unique(dh)
    ids = corpus.doc_ids[candidates]
    best = candidates[_top_k(scores[candidates], ids, spec.k)]
    entries = tuple((int(corpus.doc_ids[i]), float(scores[i])) for i in best)
    return RankedResult(task, entries, int(candidates.size), int(hit.sum()))


def run_columnar(corpus: Corpus, spec: QuerySpec) -> RankedResult:
    return execute_columnar(make_plan(spec, "columnar"), corpus, spec)
