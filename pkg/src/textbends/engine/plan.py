"""Logical plans mirroring the relational form of each benchmark query."""

from __future__ import annotations

from dataclasses import dataclass

from ..workload import QuerySpec, query_shape, validate

EXECUTORS = ("columnar", "mapreduce", "oracle")

# join constraint -> dimension joined to DocumentFacts
JOINS = {
    "c5": "WordDimension",
    "c6": "AuthorDimension",
    "c7": "TimeDimension",
    "c8": "LocationDimension",
}


@dataclass(frozen=True)
class Stage:
    kind: str  # filter | join | nested | group_by | topk
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}({self.detail})"


@dataclass(frozen=True)
class ExecutionPlan:
    executor: str
    query_id: str
    scheme: str
    stages: tuple[Stage, ...]

    def of_kind(self, kind: str) -> list[str]:
        return [s.detail for s in self.stages if s.kind == kind]

    @property
    def joins(self) -> set[str]:
        return set(self.of_kind("join"))

    @property
    def filters(self) -> set[str]:
        return set(self.of_kind("filter"))

    @property
    def nested(self) -> list[str]:
        return self.of_kind("nested")

    def __str__(self) -> str:
        return " -> ".join(map(str, self.stages))


def plan(spec: QuerySpec, executor: str = "columnar") -> ExecutionPlan:
    if executor not in EXECUTORS:
        raise ValueError(f"unknown executor {executor!r}; expected one of {EXECUTORS}")
    validate(spec)
    needs_time, needs_geo = query_shape(spec.query_id)
    documents = spec.task == "documents"

    joins = ["c5", "c6"] + (["c7"] if needs_time else []) + (["c8"] if needs_geo else [])
    filters = ["c1"] + (["c2"] if needs_time else []) + (["c3"] if needs_geo else []) + (["c4"] if documents else [])
    nested = (["Q_nW"] if documents else []) + (["Q_nD"] if spec.scheme == "tfidf" else ["Q_DL"])

    stages = [Stage("join", j) for j in joins]
    stages += [Stage("filter", c) for c in filters]
    stages += [Stage("nested", q) for q in nested]
    stages.append(Stage("group_by", "ID_Document" if documents else "Word"))
    stages.append(Stage("topk", f"c_tk k={spec.k}"))
    return ExecutionPlan(executor, spec.query_id, spec.scheme, tuple(stages))
