"""Map/reduce executor over nested documents.

Two jobs per query, as a document store would run them:

1. statistics job: map each admitted document to (("N",), 1),
   (("df", word), 1) and (("DL", doc_id), length); reduce by summing.
2. scoring job: with the statistics broadcast, map each admitted document to
   (word, weight) pairs (keywords) or (doc_id, weight) pairs for the search
   terms it contains (documents); reduce by summing.

The shuffle groups emitted values by key and hands keys to the reducer in
ascending order; values keep emission order (input order of documents).
"""

from __future__ import annotations

from collections import defaultdict
from typing import Any, Callable, Iterable, Iterator

from ..model import DEFAULT_K, augmented_tf, parse_datetime
from ..weighting import bm25_weight, tfidf_weight
from ..workload import FilterSet, QuerySpec
from .plan import ExecutionPlan, plan as make_plan
from .result import RankedResult, empty_result

Mapper = Callable[[dict[str, Any]], Iterable[tuple[Any, Any]]]
Reducer = Callable[[Any, list], Any]


def shuffle(emitted: Iterable[tuple[Any, Any]]) -> list[tuple[Any, list]]:
    groups: dict[Any, list] = defaultdict(list)
    for key, value in emitted:
        groups[key].append(value)
    return [(key, groups[key]) for key in sorted(groups)]


def map_reduce(records: Iterable[dict[str, Any]], mapper: Mapper, reducer: Reducer) -> list[tuple[Any, Any]]:
    emitted = (pair for rec in records for pair in mapper(rec))
    return [(key, reducer(key, values)) for key, values in shuffle(emitted)]


def sum_reducer(_key, values: list):
    total = 0
    for v in values:
        total += v
    return total


def admits(rec: dict[str, Any], filters: FilterSet) -> bool:
    """Dimension filters c1..c3 evaluated on the embedded sub-records."""
    if filters.gender is not None and rec["author"]["gender"] != filters.gender:
        return False
    if filters.time_window is not None:
        ts = parse_datetime(rec["time"]["date"])
        if not filters.time_window.start <= ts <= filters.time_window.end:
            return False
    if filters.geo_box is not None:
        g, loc = filters.geo_box, rec["location"]
        if not (g.x_min <= loc["x"] <= g.x_max and g.y_min <= loc["y"] <= g.y_max):
            return False
    return True


def _tf_values(rec: dict[str, Any], K: float, stored_K: float) -> list[float]:
    words = rec["words"]
    if K == stored_K:
        return [w["tf"] for w in words]
    f_max = max(w["count"] for w in words)
    return [augmented_tf(w["count"], f_max, K) for w in words]


def execute_mapreduce(
    plan: ExecutionPlan,
    nested_stream: Iterable[dict[str, Any]],
    spec: QuerySpec,
    stored_K: float = DEFAULT_K,
) -> RankedResult:
    """Run ``spec`` over nested records; ``stored_K`` is the K the records' tf was computed with."""
    if plan.query_id != spec.query_id or plan.scheme != spec.scheme:
        raise ValueError(f"plan for {plan.query_id}/{plan.scheme} does not match spec {spec.label}")
    params = spec.params
    task = spec.task
    filters = spec.filters
    # the stream is read twice (one pass per job)
    records = [rec for rec in nested_stream if rec["words"] and admits(rec, filters)]
    if not records:
        return empty_result(task)

    def stats_mapper(rec) -> Iterator[tuple[Any, int]]:
        words = rec["words"]
        yield ("N",), 1
        for w in words:
            yield ("df", w["word"]), 1
        length = sum(w["count"] for w in words) if params.doc_length == "tokens" else len(words)
        yield ("DL", rec["doc_id"]), length

    N, df, dl = 0, {}, {}
    for key, value in map_reduce(records, stats_mapper, sum_reducer):
        if key[0] == "N":
            N = value
        elif key[0] == "df":
            df[key[1]] = value
        else:
            dl[key[1]] = value
    total_len = 0
    for value in dl.values():
        total_len += value
    avgdl = total_len / N

    terms = set(filters.search_terms or ())

    def weight(tf: float, lemma: str, doc_id: int) -> float:
        if spec.scheme == "tfidf":
            return tfidf_weight(tf, N, df[lemma])
        return bm25_weight(tf, N, df[lemma], dl[doc_id], avgdl, params.k1, params.b)

    def score_mapper(rec) -> Iterator[tuple[Any, float]]:
        doc_id = rec["doc_id"]
        for w, tf in zip(rec["words"], _tf_values(rec, params.K, stored_K)):
            if task == "keywords":
                yield w["word"], weight(tf, w["word"], doc_id)
            elif w["word"] in terms:
                yield doc_id, weight(tf, w["word"], doc_id)

    reduced = map_reduce(records, score_mapper, lambda _k, vs: (len(vs), sum_reducer(_k, vs)))
    if not reduced:
        return empty_result(task)
    matched_rows = sum(n for _, (n, _) in reduced)
    ranked = sorted(((key, score) for key, (_, score) in reduced), key=lambda kv: (-kv[1], kv[0]))
    return RankedResult(task, tuple(ranked[: spec.k]), len(reduced), matched_rows)


def run_mapreduce(corpus, spec: QuerySpec) -> RankedResult:
    return execute_mapreduce(make_plan(spec, "mapreduce"), corpus.nested, spec, corpus.K)
