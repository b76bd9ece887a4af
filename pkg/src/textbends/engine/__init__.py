"""Query executors: columnar, map/reduce, and a brute-force oracle."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import ConfigError, DomainError
from ..model import Corpus
from ..workload import QuerySpec
from .columnar import document_mask, execute_columnar, filtered_fact_rows, run_columnar, term_ids
from .mapreduce import execute_mapreduce, map_reduce, run_mapreduce
from .oracle import MAX_ORACLE_DOCS, execute_oracle
from .plan import EXECUTORS, ExecutionPlan, Stage, plan
from .result import RankedResult, compare_results, empty_result

RUNNERS: dict[str, Callable[[Corpus, QuerySpec], RankedResult]] = {
    "columnar": run_columnar,
    "mapreduce": run_mapreduce,
    "oracle": execute_oracle,
}


def execute_plan(plan: ExecutionPlan, corpus: Corpus, spec: QuerySpec) -> RankedResult:
    """Run an already-built plan with the executor it names."""
    if plan.executor == "columnar":
        return execute_columnar(plan, corpus, spec)
    if plan.executor == "mapreduce":
        return execute_mapreduce(plan, corpus.nested, spec, corpus.K)
    if plan.executor == "oracle":
        return execute_oracle(corpus, spec)
    raise ValueError(f"unknown executor {plan.executor!r}; expected one of {EXECUTORS}")


def execute(corpus: Corpus, spec: QuerySpec, executor: str = "columnar") -> RankedResult:
    return execute_plan(plan(spec, executor), corpus, spec)


def verify(
    corpus: Corpus,
    specs: list[QuerySpec],
    executors: tuple[str, ...] = EXECUTORS,
    rel_tol: float = 1e-9,
    max_docs: int = MAX_ORACLE_DOCS,
) -> list[tuple[QuerySpec, str | None]]:
    """Run every executor on every spec; pair each spec with None (agreement)
    or a description of the first disagreement with the first executor."""
    if corpus.n_docs > max_docs:
        raise ConfigError(f"verification is limited to {max_docs} documents (corpus has {corpus.n_docs})")
    outcome = []
    for spec in specs:
        results = {name: execute(corpus, spec, name) for name in executors}
        reference = executors[0]
        problem = None
        for name in executors[1:]:
            diff = compare_results(results[reference], results[name], rel_tol)
            if diff:
                problem = f"{reference} vs {name}: {diff}"
                break
        outcome.append((spec, problem))
    return outcome


def selectivity(spec: QuerySpec, corpus: Corpus) -> float:
    """S(Q) = 1 - n(Q)/N over DocumentFacts rows.

    n(Q) is the number of fact rows that pass the query's selection (c1..c3,
    plus c4 for document queries); N is the total number of fact rows.
    """
    if corpus.n_facts == 0:
        raise DomainError("selectivity is undefined on an empty corpus")
    rows = filtered_fact_rows(corpus, spec.filters)
    if spec.task == "documents":
        ids = term_ids(corpus, spec.filters.search_terms)
        matched = int(np.isin(corpus.fact_word[rows], ids).sum())
    else:
        matched = int(rows.size)
    return 1.0 - matched / corpus.n_facts


__all__ = [
    "EXECUTORS",
    "ExecutionPlan",
    "MAX_ORACLE_DOCS",
    "RUNNERS",
    "RankedResult",
    "Stage",
    "compare_results",
    "document_mask",
    "empty_result",
    "execute",
    "execute_columnar",
    "execute_mapreduce",
    "execute_oracle",
    "execute_plan",
    "map_reduce",
    "plan",
    "run_columnar",
    "run_mapreduce",
    "selectivity",
    "verify",
]
