"""Brute-force reference executor.

Recomputes every statistic from the raw lemma_text of each document and
evaluates the filters straight from the dimension columns.  Deliberately
shares no code with the columnar and map/reduce executors or with the
weighting module; it exists to check them.
"""

from __future__ import annotations

import math
from collections import Counter

from ..errors import ConfigError
from ..workload import QuerySpec
from .result import RankedResult

MAX_ORACLE_DOCS = 10_000


def execute_oracle(corpus, spec: QuerySpec, max_docs: int = MAX_ORACLE_DOCS) -> RankedResult:
    if corpus.n_docs > max_docs:
        raise ConfigError(f"oracle refuses corpora over {max_docs} documents (got {corpus.n_docs})")
    f = spec.filters
    p = spec.params
    K, k1, b = p.K, p.k1, p.b

    # (doc_id, token counts) of admitted documents, in load order
    docs = []
    for row in range(corpus.n_docs):
        author = int(corpus.doc_author[row])
        gender = ("male", "female")[int(corpus.author_gender[author])]
        if f.gender is not None and gender != f.gender:
            continue
        if f.time_window is not None:
            when = int(corpus.time_ts[int(corpus.doc_time[row])])
            if when < f.time_window.start or when > f.time_window.end:
                continue
        if f.geo_box is not None:
            loc = int(corpus.doc_location[row])
            x, y = float(corpus.location_x[loc]), float(corpus.location_y[loc])
            g = f.geo_box
            if not (g.x_min <= x <= g.x_max and g.y_min <= y <= g.y_max):
                continue
        tokens = corpus.lemma_text[row].split()
        if tokens:
            docs.append((int(corpus.doc_ids[row]), Counter(tokens)))

    if not docs:
        return RankedResult(spec.task, (), 0, 0)

    N = len(docs)
    n = Counter()
    for _, counts in docs:
        n.update(counts.keys())
    lengths = [sum(c.values()) if p.doc_length == "tokens" else len(c) for _, c in docs]
    avgdl = sum(lengths) / N

    def weight(term, counts, length):
        top = max(counts.values())
        tf = 1.0 if counts[term] == top else K + (1.0 - K) * counts[term] / top
        w = tf * (1.0 + math.log(N / n[term]))
        if spec.scheme == "bm25":
            w = w * (k1 + 1) / (tf + k1 * (1 - b + b * length / avgdl))
        return w

    scores: dict = {}
    matched = 0
    if spec.task == "keywords":
        for (_, counts), length in zip(docs, lengths):
            for term in counts:
                scores[term] = scores.get(term, 0.0) + weight(term, counts, length)
                matched += 1
    else:
        query = set(f.search_terms)
        for (doc_id, counts), length in zip(docs, lengths):
            present = sorted(query & counts.keys())
            if present:
                scores[doc_id] = sum(weight(t, counts, length) for t in present)
                matched += len(present)

    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return RankedResult(spec.task, tuple(ranked[: spec.k]), len(scores), matched)
