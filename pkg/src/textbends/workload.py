"""The benchmark's eight query shapes, their filter constraints and parameters.

Keyword queries Q1..Q4 and document queries Q1d..Q4d combine

* c1: author gender equals ``pGender``
* c2: document date within ``[pStartDate, pEndDate]``
* c3: location inside ``[pStartX, pEndX] x [pStartY, pEndY]``
* c4: the document contains at least one of the search terms ``pWords``

as c1, c1^c2, c1^c3, c1^c2^c3 (plus c4 for the document task).
All intervals are closed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable

from .errors import QueryValidationError
from .model import GENDERS, parse_datetime
from .weighting import SCHEMES, WeightParams

KEYWORD_QUERIES = ("Q1", "Q2", "Q3", "Q4")
DOCUMENT_QUERIES = ("Q1d", "Q2d", "Q3d", "Q4d")
QUERY_IDS = KEYWORD_QUERIES + DOCUMENT_QUERIES
DEFAULT_K = 10

# query shape -> (uses time window c2, uses geo box c3)
_SHAPE = {"1": (False, False), "2": (True, False), "3": (False, True), "4": (True, True)}


def query_task(query_id: str) -> str:
    if query_id in KEYWORD_QUERIES:
        return "keywords"
    if query_id in DOCUMENT_QUERIES:
        return "documents"
    raise QueryValidationError(f"unknown query id {query_id!r}")


def query_shape(query_id: str) -> tuple[bool, bool]:
    """(needs time window, needs geo box) for a query id."""
    query_task(query_id)
    return _SHAPE[query_id[1]]


@dataclass(frozen=True)
class TimeWindow:
    start: int  # epoch seconds, inclusive
    end: int  # epoch seconds, inclusive


@dataclass(frozen=True)
class GeoBox:
    x_min: float
    x_max: float
    y_min: float
    y_max: float


@dataclass(frozen=True)
class FilterSet:
    gender: str | None = None
    time_window: TimeWindow | None = None
    geo_box: GeoBox | None = None
    search_terms: tuple[str, ...] | None = None

    def without_terms(self) -> FilterSet:
        return replace(self, search_terms=None)


@dataclass(frozen=True)
class QuerySpec:
    query_id: str
    scheme: str
    filters: FilterSet
    k: int = DEFAULT_K
    params: WeightParams = field(default_factory=WeightParams)

    @property
    def task(self) -> str:
        return query_task(self.query_id)

    @property
    def label(self) -> str:
        return f"{self.query_id}/{self.scheme}/{self.filters.gender}"

    def keyword_counterpart(self) -> QuerySpec:
        """The keyword query with the same non-term filters (Qnd -> Qn)."""
        if self.task == "keywords":
            return self
        return replace(self, query_id=self.query_id[:2], filters=self.filters.without_terms())


def validate(spec: QuerySpec) -> QuerySpec:
    """Check a spec against its query shape; errors name the violated constraint."""
    task = query_task(spec.query_id)
    if spec.scheme not in SCHEMES:
        raise QueryValidationError(f"unknown scheme {spec.scheme!r}; expected one of {SCHEMES}")
    if isinstance(spec.k, bool) or not isinstance(spec.k, int) or spec.k < 1:
        raise QueryValidationError(f"k must be a positive integer, got {spec.k!r}", "c_tk")
    f = spec.filters
    if f.gender is None:
        raise QueryValidationError(f"{spec.query_id} requires a gender filter", "c1")
    if f.gender not in GENDERS:
        raise QueryValidationError(f"gender must be one of {GENDERS}, got {f.gender!r}", "c1")

    needs_time, needs_geo = query_shape(spec.query_id)
    if needs_time and f.time_window is None:
        raise QueryValidationError(f"{spec.query_id} requires a time window", "c2")
    if not needs_time and f.time_window is not None:
        raise QueryValidationError(f"{spec.query_id} does not take a time window", "c2")
    if f.time_window is not None and not f.time_window.start < f.time_window.end:
        raise QueryValidationError("pStartDate must precede pEndDate", "c2")
    if needs_geo and f.geo_box is None:
        raise QueryValidationError(f"{spec.query_id} requires a geographic box", "c3")
    if not needs_geo and f.geo_box is not None:
        raise QueryValidationError(f"{spec.query_id} does not take a geographic box", "c3")
    if f.geo_box is not None:
        g = f.geo_box
        if not (g.x_min < g.x_max and g.y_min < g.y_max):
            raise QueryValidationError("need pStartX < pEndX and pStartY < pEndY", "c3")

    if task == "keywords" and f.search_terms is not None:
        raise QueryValidationError(f"{spec.query_id} is a keyword query and takes no search terms", "c4")
    if task == "documents":
        if not f.search_terms or any(not t for t in f.search_terms):
            raise QueryValidationError(f"{spec.query_id} requires a non-empty search-term list", "c4")
    return spec


# -- parameter files ------------------------------------------------------------------

_ALIASES = {"peEndDate": "pEndDate"}
_PARAM_NAMES = ("pGender", "pStartDate", "pEndDate", "pStartX", "pEndX", "pStartY", "pEndY", "pWords", "k")


@dataclass(frozen=True)
class ParamFile:
    """Named parameter bindings, with the benchmark's parameter names."""

    pGender: tuple[str, ...] | None = None
    pStartDate: str | None = None
    pEndDate: str | None = None
    pStartX: float | None = None
    pEndX: float | None = None
    pStartY: float | None = None
    pEndY: float | None = None
    pWords: tuple[str, ...] | None = None
    k: int | None = None

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ParamFile:
        values: dict[str, Any] = {}
        for key, value in data.items():
            key = _ALIASES.get(key, key)
            if key not in _PARAM_NAMES:
                raise QueryValidationError(f"unknown parameter {key!r}")
            values[key] = value
        for key in ("pGender", "pWords"):
            if isinstance(values.get(key), str):
                values[key] = (values[key],)
            elif values.get(key) is not None:
                values[key] = tuple(values[key])
        return cls(**values)

    @classmethod
    def load(cls, path: str | Path) -> ParamFile:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for name in _PARAM_NAMES:
            value = getattr(self, name)
            if value is not None:
                out[name] = list(value) if isinstance(value, tuple) else value
        return out

    def _need(self, name: str, query_id: str, constraint: str):
        value = getattr(self, name)
        if value is None:
            raise QueryValidationError(f"parameter {name} is required by {query_id}", constraint)
        return value

    def time_window(self, query_id: str = "Q2") -> TimeWindow:
        start = self._need("pStartDate", query_id, "c2")
        end = self._need("pEndDate", query_id, "c2")
        return TimeWindow(parse_datetime(start), parse_datetime(end))

    def geo_box(self, query_id: str = "Q3") -> GeoBox:
        return GeoBox(
            float(self._need("pStartX", query_id, "c3")),
            float(self._need("pEndX", query_id, "c3")),
            float(self._need("pStartY", query_id, "c3")),
            float(self._need("pEndY", query_id, "c3")),
        )


STANDARD_PARAMS = ParamFile(
    pGender=("male", "female"),
    pStartDate="2015-09-17 00:00:00",
    pEndDate="2015-09-18 00:00:00",
    pStartX=20,
    pEndX=40,
    pStartY=-100,
    pEndY=100,
    pWords=("think", "today", "friday"),
)


def make_spec(
    query_id: str,
    scheme: str,
    gender: str,
    params: ParamFile,
    k: int = DEFAULT_K,
    weights: WeightParams | None = None,
) -> QuerySpec:
    needs_time, needs_geo = query_shape(query_id)
    terms = None
    if query_task(query_id) == "documents":
        terms = tuple(params._need("pWords", query_id, "c4"))
    filters = FilterSet(
        gender=gender,
        time_window=params.time_window(query_id) if needs_time else None,
        geo_box=params.geo_box(query_id) if needs_geo else None,
        search_terms=terms,
    )
    return validate(QuerySpec(query_id, scheme, filters, k, weights or WeightParams()))


def build_workload(
    params: ParamFile,
    schemes: Iterable[str] = SCHEMES,
    k: int | None = None,
    weights: WeightParams | None = None,
    query_ids: Iterable[str] = QUERY_IDS,
) -> list[QuerySpec]:
    """Every query shape x scheme x gender, fully bound.

    ``k`` falls back to the parameter file's ``k``, then to 10.
    """
    requested = set(schemes)
    unknown = requested - set(SCHEMES)
    if unknown:
        raise QueryValidationError(f"unknown scheme(s) {sorted(unknown)}; expected a subset of {SCHEMES}")
    schemes = [s for s in SCHEMES if s in requested]
    if not schemes:
        raise QueryValidationError("at least one weighting scheme is required")
    genders = params.pGender
    if not genders:
        raise QueryValidationError("parameter pGender is required by every query", "c1")
    k = k if k is not None else params.k if params.k is not None else DEFAULT_K
    return [
        make_spec(qid, scheme, gender, params, k, weights)
        for qid in query_ids
        for scheme in schemes
        for gender in genders
    ]


# -- complexity ------------------------------------------------------------------------


def complexity_breakdown(spec: QuerySpec) -> dict[str, int]:
    """Traversal counts per (sub)query of the query's plan.

    The main query and every nested statistics query count one traversal of
    their base relationships; a nested result used in the main query's
    projection or joined into it adds one traversal more.  Each time or
    location filter adds one traversal to the main query and to every nested
    query that must honour the same filters.
    """
    documents = spec.task == "documents"
    nested = ["Q_nW"] if documents else []
    nested.append("Q_nD" if spec.scheme == "tfidf" else "Q_DL")
    extra_dims = sum(query_shape(spec.query_id))

    counts = {"Q_M": 1 + extra_dims}
    for name in nested:
        # own traversal + its use inside the main query
        counts[name] = 2 + extra_dims
    if spec.scheme == "bm25":
        # Q_DL feeds both the projection (N) and the length normalization
        counts["Q_DL"] += 1
    return counts


def complexity(spec: QuerySpec) -> int:
    return sum(complexity_breakdown(spec).values())
