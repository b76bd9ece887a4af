"""Ranked query results and cross-executor comparison."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class RankedResult:
    """Top-k entries ordered by descending score, ties by ascending key.

    ``total_matching`` counts candidate keys (words or documents) before the
    top-k cut; ``matched_rows`` counts the fact rows that survived the
    query's filter stage and is the n(Q) of the selectivity formula.
    """

    task: str
    entries: tuple[tuple[Any, float], ...]
    total_matching: int = 0
    matched_rows: int = 0

    @property
    def keys(self) -> list:
        return [key for key, _ in self.entries]

    @property
    def scores(self) -> list[float]:
        return [score for _, score in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict[str, Any]:
        return {
            "task": self.task,
            "entries": [[key, score] for key, score in self.entries],
            "total_matching": self.total_matching,
            "matched_rows": self.matched_rows,
        }

    def checksum(self) -> str:
        payload = {
            "task": self.task,
            "entries": [[key, repr(float(score))] for key, score in self.entries],
            "total_matching": self.total_matching,
            "matched_rows": self.matched_rows,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def empty_result(task: str) -> RankedResult:
    return RankedResult(task, (), 0, 0)


def compare_results(a: RankedResult, b: RankedResult, rel_tol: float = 1e-9) -> str | None:
    """None when ``a`` and ``b`` agree (same keys in the same order, scores
    within ``rel_tol``); otherwise a short description of the first difference."""
    if a.task != b.task:
        return f"task differs: {a.task} vs {b.task}"
    if a.keys != b.keys:
        for i, (ka, kb) in enumerate(zip(a.keys, b.keys)):
            if ka != kb:
                return f"rank {i}: key {ka!r} vs {kb!r}"
        return f"length differs: {len(a)} vs {len(b)}"
    for i, (sa, sb) in enumerate(zip(a.scores, b.scores)):
        if not math.isclose(sa, sb, rel_tol=rel_tol, abs_tol=0.0):
            return f"rank {i} ({a.keys[i]!r}): score {sa!r} vs {sb!r}"
    if a.total_matching != b.total_matching:
        return f"total_matching differs: {a.total_matching} vs {b.total_matching}"
    if a.matched_rows != b.matched_rows:
        return f"matched_rows differs: {a.matched_rows} vs {b.matched_rows}"
    return None
