"""Snowflake-schema domain types and the columnar in-memory corpus.

The corpus is stored column-wise: the fact table (``DocumentFacts``) is four
parallel numpy arrays sorted by ``(document row, word_id)`` and every
dimension is a set of parallel arrays/lists indexed by its dense surrogate
key.  Row dataclasses (``Author``, ``Document`` ...) are lightweight views
materialized on demand.

The nested rendering (one JSON-ready dict per document with every dimension
embedded) mirrors the document-store layout and is the JSONL exchange format.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from typing import Any, Iterable, Iterator

import numpy as np

from .errors import IngestError, IntegrityError

GENDERS = ("male", "female")
TAG_KINDS = ("hashtag", "mention", "label")
ENTITY_KINDS = ("person", "location", "organization", "product", "other")
TOKENIZER_MODES = ("pretokenized", "whitespace_lower")

DEFAULT_K = 0.5
TF_TOLERANCE = 1e-12


# --------------------------------------------------------------------------
# Row types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Word:
    word_id: int
    lemma: str


@dataclass(frozen=True)
class WordFact:
    doc_id: int
    word_id: int
    f_td: int
    tf: float


@dataclass(frozen=True)
class Author:
    author_id: int
    gender: str
    age: int
    firstname: str
    lastname: str


@dataclass(frozen=True)
class TimePoint:
    time_id: int
    full_date: datetime
    minute: int
    hour: int
    day: int
    month: int
    year: int

    @classmethod
    def from_timestamp(cls, time_id: int, ts: int) -> TimePoint:
        dt = datetime.fromtimestamp(int(ts), tz=timezone.utc)
        return cls(time_id, dt, dt.minute, dt.hour, dt.day, dt.month, dt.year)


@dataclass(frozen=True)
class GeoLocation:
    location_id: int
    x: float
    y: float


@dataclass(frozen=True)
class Tag:
    id: int
    label: str
    kind: str


@dataclass(frozen=True)
class NamedEntity:
    id: int
    label: str
    kind: str


@dataclass(frozen=True)
class Document:
    doc_id: int
    raw_text: str
    clean_text: str
    lemma_text: str
    author_id: int
    time_id: int
    location_id: int
    tag_ids: tuple[int, ...] = ()
    named_entity_ids: tuple[int, ...] = ()


# --------------------------------------------------------------------------
# Date helpers
# --------------------------------------------------------------------------


def parse_datetime(value: str) -> int:
    """Parse an ISO-8601 string to UTC epoch seconds (naive values are UTC)."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return math.floor(dt.timestamp())


def format_datetime(ts: int) -> str:
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%S")


def augmented_tf(f_td, f_max, K: float):
    """K + (1-K) * f_td / f_max; works elementwise on numpy arrays.

    The maximal term gets exactly 1.0: the plain formula can round to
    1 - 2**-53 for some K.
    """
    if isinstance(f_td, np.ndarray) or isinstance(f_max, np.ndarray):
        return np.where(f_td == f_max, 1.0, K + (1.0 - K) * f_td / f_max)
    if f_td == f_max:
        return 1.0
    return K + (1.0 - K) * f_td / f_max


# --------------------------------------------------------------------------
# Corpus
# --------------------------------------------------------------------------


def _i64(values=()) -> np.ndarray:
    return np.asarray(values, dtype=np.int64)


def _f64(values=()) -> np.ndarray:
    return np.asarray(values, dtype=np.float64)


@dataclass(eq=False)
class Corpus:
    """A loaded snowflake-schema dataset.

    Document rows are addressed by their position (``0..n_docs-1``); the
    external ``doc_id`` is kept in ``doc_ids``.  ``fact_doc`` stores document
    row positions, not external ids.
    """

    doc_ids: np.ndarray = field(default_factory=_i64)
    raw_text: list[str] = field(default_factory=list)
    clean_text: list[str] = field(default_factory=list)
    lemma_text: list[str] = field(default_factory=list)
    doc_author: np.ndarray = field(default_factory=_i64)
    doc_time: np.ndarray = field(default_factory=_i64)
    doc_location: np.ndarray = field(default_factory=_i64)
    doc_tags: list[tuple[int, ...]] = field(default_factory=list)
    doc_entities: list[tuple[int, ...]] = field(default_factory=list)

    lemmas: list[str] = field(default_factory=list)

    fact_doc: np.ndarray = field(default_factory=_i64)
    fact_word: np.ndarray = field(default_factory=_i64)
    fact_count: np.ndarray = field(default_factory=_i64)
    fact_tf: np.ndarray = field(default_factory=_f64)

    author_gender: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))
    author_age: np.ndarray = field(default_factory=_i64)
    author_firstname: list[str] = field(default_factory=list)
    author_lastname: list[str] = field(default_factory=list)

    time_ts: np.ndarray = field(default_factory=_i64)

    location_x: np.ndarray = field(default_factory=_f64)
    location_y: np.ndarray = field(default_factory=_f64)

    tag_label: list[str] = field(default_factory=list)
    tag_kind: list[str] = field(default_factory=list)
    entity_label: list[str] = field(default_factory=list)
    entity_kind: list[str] = field(default_factory=list)

    K: float = DEFAULT_K

    # -- sizes -------------------------------------------------------------

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def n_words(self) -> int:
        return len(self.lemmas)

    @property
    def n_facts(self) -> int:
        return len(self.fact_doc)

    def __len__(self) -> int:
        return self.n_docs

    def __repr__(self) -> str:
        return (
            f"Corpus(n_docs={self.n_docs}, n_words={self.n_words}, "
            f"n_facts={self.n_facts}, K={self.K})"
        )

    # -- derived indexes (corpus is immutable after load) -------------------

    @cached_property
    def doc_offsets(self) -> np.ndarray:
        """``fact_*[doc_offsets[i]:doc_offsets[i+1]]`` are the facts of document row i."""
        return np.searchsorted(self.fact_doc, np.arange(self.n_docs + 1)).astype(np.int64)

    @cached_property
    def lemma_rank(self) -> np.ndarray:
        """Lexicographic rank of each word's lemma, used for tie-breaking."""
        order = sorted(range(self.n_words), key=self.lemmas.__getitem__)
        rank = np.empty(self.n_words, dtype=np.int64)
        rank[order] = np.arange(self.n_words)
        return rank

    @cached_property
    def word_index(self) -> dict[str, int]:
        return {lemma: i for i, lemma in enumerate(self.lemmas)}

    @cached_property
    def doc_gender(self) -> np.ndarray:
        return self.author_gender[self.doc_author]

    @cached_property
    def doc_ts(self) -> np.ndarray:
        return self.time_ts[self.doc_time]

    @cached_property
    def doc_x(self) -> np.ndarray:
        return self.location_x[self.doc_location]

    @cached_property
    def doc_y(self) -> np.ndarray:
        return self.location_y[self.doc_location]

    @cached_property
    def nested(self) -> list[dict[str, Any]]:
        """Materialized nested rendering, shared by map/reduce executions."""
        return list(to_nested(self))

    # -- row views -----------------------------------------------------------

    def word(self, word_id: int) -> Word:
        return Word(word_id, self.lemmas[word_id])

    def author(self, author_id: int) -> Author:
        return Author(
            author_id,
            GENDERS[int(self.author_gender[author_id])],
            int(self.author_age[author_id]),
            self.author_firstname[author_id],
            self.author_lastname[author_id],
        )

    def time(self, time_id: int) -> TimePoint:
        return TimePoint.from_timestamp(time_id, int(self.time_ts[time_id]))

    def location(self, location_id: int) -> GeoLocation:
        return GeoLocation(
            location_id, float(self.location_x[location_id]), float(self.location_y[location_id])
        )

    def tag(self, tag_id: int) -> Tag:
        return Tag(tag_id, self.tag_label[tag_id], self.tag_kind[tag_id])

    def named_entity(self, entity_id: int) -> NamedEntity:
        return NamedEntity(entity_id, self.entity_label[entity_id], self.entity_kind[entity_id])

    def document(self, row: int) -> Document:
        return Document(
            int(self.doc_ids[row]),
            self.raw_text[row],
            self.clean_text[row],
            self.lemma_text[row],
            int(self.doc_author[row]),
            int(self.doc_time[row]),
            int(self.doc_location[row]),
            tuple(self.doc_tags[row]),
            tuple(self.doc_entities[row]),
        )

    def facts_of(self, row: int) -> list[WordFact]:
        lo, hi = self.doc_offsets[row], self.doc_offsets[row + 1]
        doc_id = int(self.doc_ids[row])
        return [
            WordFact(doc_id, int(w), int(c), float(t))
            for w, c, t in zip(self.fact_word[lo:hi], self.fact_count[lo:hi], self.fact_tf[lo:hi])
        ]

    # -- integrity -----------------------------------------------------------

    def validate(self, check_text: bool = False) -> Corpus:
        """Check referential integrity and fact-table invariants.

        Raises IntegrityError naming the first offending row.  With
        ``check_text`` the lemma_text of every document is re-tokenized and
        compared with its fact rows (O(total tokens), pure Python).
        """
        n = self.n_docs
        for name in ("raw_text", "clean_text", "lemma_text", "doc_author", "doc_time",
                     "doc_location", "doc_tags", "doc_entities"):
            if len(getattr(self, name)) != n:
                raise IntegrityError(f"document column {name!r} has {len(getattr(self, name))} rows, expected {n}")
        if len(np.unique(self.doc_ids)) != n:
            ids, counts = np.unique(self.doc_ids, return_counts=True)
            raise IntegrityError(f"duplicate doc_id {int(ids[counts > 1][0])}")

        def check_fk(column: np.ndarray, size: int, what: str) -> None:
            bad = np.flatnonzero((column < 0) | (column >= size))
            if bad.size:
                row = int(bad[0])
                raise IntegrityError(
                    f"document row {row} (doc_id={int(self.doc_ids[row])}) references "
                    f"missing {what} {int(column[row])}"
                )

        check_fk(self.doc_author, len(self.author_gender), "author")
        check_fk(self.doc_time, len(self.time_ts), "time")
        check_fk(self.doc_location, len(self.location_x), "location")
        for row, (tags, ents) in enumerate(zip(self.doc_tags, self.doc_entities)):
            for t in tags:
                if not 0 <= t < len(self.tag_label):
                    raise IntegrityError(f"document row {row} (doc_id={int(self.doc_ids[row])}) references missing tag {t}")
            for e in ents:
                if not 0 <= e < len(self.entity_label):
                    raise IntegrityError(
                        f"document row {row} (doc_id={int(self.doc_ids[row])}) references missing named entity {e}"
                    )

        if not (len(self.author_age) == len(self.author_firstname) == len(self.author_lastname)
                == len(self.author_gender)):
            raise IntegrityError("author dimension columns have inconsistent lengths")
        if len(self.location_x) != len(self.location_y):
            raise IntegrityError("location dimension columns have inconsistent lengths")
        if not np.all(np.isfinite(self.location_x)) or not np.all(np.isfinite(self.location_y)):
            raise IntegrityError("location coordinates must be finite")
        bad_gender = np.flatnonzero((self.author_gender < 0) | (self.author_gender >= len(GENDERS)))
        if bad_gender.size:
            raise IntegrityError(f"author row {int(bad_gender[0])} has an invalid gender code")
        for i, (label, kind) in enumerate(zip(self.tag_label, self.tag_kind)):
            if not label or kind not in TAG_KINDS:
                raise IntegrityError(f"tag row {i} is malformed ({label!r}, {kind!r})")
        for i, (label, kind) in enumerate(zip(self.entity_label, self.entity_kind)):
            if not label or kind not in ENTITY_KINDS:
                raise IntegrityError(f"named entity row {i} is malformed ({label!r}, {kind!r})")

        if len(set(self.lemmas)) != len(self.lemmas):
            raise IntegrityError("word lemmas are not unique")
        if any(not lemma for lemma in self.lemmas):
            raise IntegrityError("empty lemma in word dimension")

        m = self.n_facts
        if not (len(self.fact_word) == len(self.fact_count) == len(self.fact_tf) == m):
            raise IntegrityError("fact table columns have inconsistent lengths")
        if m:
            bad = np.flatnonzero((self.fact_doc < 0) | (self.fact_doc >= n))
            if bad.size:
                raise IntegrityError(f"fact row {int(bad[0])} references missing document row {int(self.fact_doc[bad[0]])}")
            bad = np.flatnonzero((self.fact_word < 0) | (self.fact_word >= self.n_words))
            if bad.size:
                raise IntegrityError(f"fact row {int(bad[0])} references missing word {int(self.fact_word[bad[0]])}")
            bad = np.flatnonzero(self.fact_count < 1)
            if bad.size:
                raise IntegrityError(f"fact row {int(bad[0])} has f_td < 1")
            key_order = (np.diff(self.fact_doc) > 0) | (
                (np.diff(self.fact_doc) == 0) & (np.diff(self.fact_word) > 0)
            )
            bad = np.flatnonzero(~key_order)
            if bad.size:
                raise IntegrityError(
                    f"fact row {int(bad[0]) + 1} is out of (document, word) order or duplicated"
                )
            starts = self.doc_offsets[:-1][self.doc_offsets[:-1] < self.doc_offsets[1:]]
            fmax = np.maximum.reduceat(self.fact_count, starts)
            expected = augmented_tf(self.fact_count, np.repeat(fmax, np.diff(np.append(starts, m))), self.K)
            err = np.abs(expected - self.fact_tf)
            bad = np.flatnonzero(~(err <= TF_TOLERANCE))
            if bad.size:
                i = int(bad[0])
                raise IntegrityError(
                    f"fact row {i} (doc_id={int(self.doc_ids[self.fact_doc[i]])}, "
                    f"word={self.lemmas[self.fact_word[i]]!r}) stores tf={self.fact_tf[i]!r}, "
                    f"recomputed {expected[i]!r}"
                )

        if check_text:
            for row in range(n):
                lo, hi = self.doc_offsets[row], self.doc_offsets[row + 1]
                stored = {self.lemmas[w]: int(c) for w, c in zip(self.fact_word[lo:hi], self.fact_count[lo:hi])}
                counts: dict[str, int] = {}
                for tok in self.lemma_text[row].split():
                    counts[tok] = counts.get(tok, 0) + 1
                if counts != stored:
                    raise IntegrityError(
                        f"document row {row} (doc_id={int(self.doc_ids[row])}): lemma_text "
                        "does not match its fact rows"
                    )
        return self

    # -- comparison ----------------------------------------------------------

    def canonical_records(self) -> Iterator[dict[str, Any]]:
        """Nested records with surrogate ids stripped; the basis for equality and checksums."""
        for rec in to_nested(self):
            yield _strip_ids(rec)

    def equivalent(self, other: Corpus) -> bool:
        """Field-wise equality up to surrogate-id renumbering."""
        if self.n_docs != other.n_docs or self.K != other.K:
            return False
        return all(a == b for a, b in zip(self.canonical_records(), other.canonical_records()))

    def checksum(self) -> str:
        h = hashlib.sha256()
        for rec in self.canonical_records():
            h.update(canonical_json(rec).encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


def canonical_json(record: Any) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _strip_ids(rec: dict[str, Any]) -> dict[str, Any]:
    out = dict(rec)
    for key in ("author", "time", "location"):
        out[key] = {k: v for k, v in rec[key].items() if k != "id"}
    out["tags"] = [{k: v for k, v in t.items() if k != "id"} for t in rec["tags"]]
    out["named_entities"] = [{k: v for k, v in e.items() if k != "id"} for e in rec["named_entities"]]
    out["words"] = sorted(
        ({k: v for k, v in w.items() if k != "word_id"} for w in rec["words"]),
        key=lambda w: w["word"],
    )
    return out


# --------------------------------------------------------------------------
# Nested rendering
# --------------------------------------------------------------------------


def to_nested(corpus: Corpus) -> Iterator[dict[str, Any]]:
    """Yield one self-contained record per document, every dimension embedded.

    Dangling foreign keys raise IntegrityError naming the document row.
    """
    offsets = corpus.doc_offsets
    for row in range(corpus.n_docs):
        doc_id = int(corpus.doc_ids[row])
        a, t, l = int(corpus.doc_author[row]), int(corpus.doc_time[row]), int(corpus.doc_location[row])
        for key, size, what in (
            (a, len(corpus.author_gender), "author"),
            (t, len(corpus.time_ts), "time"),
            (l, len(corpus.location_x), "location"),
            *((i, len(corpus.tag_label), "tag") for i in corpus.doc_tags[row]),
            *((i, len(corpus.entity_label), "named entity") for i in corpus.doc_entities[row]),
        ):
            if not 0 <= key < size:
                raise IntegrityError(f"document row {row} (doc_id={doc_id}) references missing {what} {key}")
        author = corpus.author(a)
        ts = int(corpus.time_ts[t])
        loc = corpus.location(l)
        tags = [corpus.tag(i) for i in corpus.doc_tags[row]]
        ents = [corpus.named_entity(i) for i in corpus.doc_entities[row]]
        tp = TimePoint.from_timestamp(t, ts)
        lo, hi = offsets[row], offsets[row + 1]
        yield {
            "doc_id": doc_id,
            "raw_text": corpus.raw_text[row],
            "clean_text": corpus.clean_text[row],
            "lemma_text": corpus.lemma_text[row],
            "author": {
                "id": author.author_id,
                "gender": author.gender,
                "age": author.age,
                "firstname": author.firstname,
                "lastname": author.lastname,
            },
            "time": {
                "id": t,
                "date": format_datetime(ts),
                "minute": tp.minute,
                "hour": tp.hour,
                "day": tp.day,
                "month": tp.month,
                "year": tp.year,
            },
            "location": {"id": loc.location_id, "x": loc.x, "y": loc.y},
            "tags": [{"id": g.id, "label": g.label, "kind": g.kind} for g in tags],
            "named_entities": [{"id": e.id, "label": e.label, "kind": e.kind} for e in ents],
            "words": [
                {
                    "word_id": int(w),
                    "word": corpus.lemmas[w],
                    "count": int(c),
                    "tf": float(tf),
                }
                for w, c, tf in zip(corpus.fact_word[lo:hi], corpus.fact_count[lo:hi], corpus.fact_tf[lo:hi])
            ],
        }


def from_nested(
    records: Iterable[dict[str, Any]],
    K: float = DEFAULT_K,
    tokenizer_mode: str = "pretokenized",
) -> Corpus:
    """Rebuild a corpus from nested records (inverse of :func:`to_nested`)."""
    builder = CorpusBuilder(K=K, tokenizer_mode=tokenizer_mode)
    for rec in records:
        builder.add(rec)
    return builder.build()


def tokenize(text: str, mode: str) -> list[str]:
    if mode == "pretokenized":
        return text.split()
    if mode == "whitespace_lower":
        return text.lower().split()
    raise ValueError(f"unknown tokenizer mode {mode!r}; expected one of {TOKENIZER_MODES}")


_MISSING = object()


def _field(rec: dict[str, Any], path: str, line: int | None) -> Any:
    cur: Any = rec
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise IngestError(f"missing required field {path!r}", line)
        cur = cur[part]
    return cur


def _as_float(value: Any, path: str, line: int | None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise IngestError(f"field {path!r} must be a number, got {value!r}", line)
    out = float(value)
    if not math.isfinite(out):
        raise IngestError(f"field {path!r} must be finite, got {value!r}", line)
    return out


class CorpusBuilder:
    """Accumulates nested records and assigns dense surrogate keys in load order.

    Dimension sub-records carrying an ``id`` are keyed by that id (so shared
    rows stay shared); sub-records without one are keyed by value.
    lemma_text is the authoritative token source: f_td and tf are always
    recomputed from it, and any ``words`` sub-records present must agree.
    """

    def __init__(self, K: float = DEFAULT_K, tokenizer_mode: str = "pretokenized"):
        if not 0 <= K < 1:
            raise ValueError(f"K must lie in [0, 1), got {K}")
        if tokenizer_mode not in TOKENIZER_MODES:
            raise ValueError(f"unknown tokenizer mode {tokenizer_mode!r}; expected one of {TOKENIZER_MODES}")
        self.K = K
        self.tokenizer_mode = tokenizer_mode
        self._seen_docs: set[int] = set()
        self.doc_ids: list[int] = []
        self.raw_text: list[str] = []
        self.clean_text: list[str] = []
        self.lemma_text: list[str] = []
        self.doc_author: list[int] = []
        self.doc_time: list[int] = []
        self.doc_location: list[int] = []
        self.doc_tags: list[tuple[int, ...]] = []
        self.doc_entities: list[tuple[int, ...]] = []
        self.word_ids: dict[str, int] = {}
        self.fact_doc: list[int] = []
        self.fact_word: list[int] = []
        self.fact_count: list[int] = []
        self.fact_tf: list[float] = []
        self._authors: dict[Any, int] = {}
        self.authors: list[tuple[int, int, str, str]] = []
        self._times: dict[Any, int] = {}
        self.times: list[int] = []
        self._locations: dict[Any, int] = {}
        self.locations: list[tuple[float, float]] = []
        self._tags: dict[Any, int] = {}
        self.tags: list[tuple[str, str]] = []
        self._entities: dict[Any, int] = {}
        self.entities: list[tuple[str, str]] = []

    @staticmethod
    def _intern(index: dict[Any, int], rows: list, key: Any, value: Any, what: str, line) -> int:
        if key in index:
            i = index[key]
            if rows[i] != value:
                raise IngestError(f"{what} id {key[1]!r} reused with different attributes", line)
            return i
        index[key] = len(rows)
        rows.append(value)
        return index[key]

    def add(self, rec: dict[str, Any], line: int | None = None) -> None:
        if not isinstance(rec, dict):
            raise IngestError("record must be a JSON object", line)
        doc_id = _field(rec, "doc_id", line)
        if isinstance(doc_id, bool) or not isinstance(doc_id, int):
            raise IngestError(f"doc_id must be an integer, got {doc_id!r}", line)
        if doc_id in self._seen_docs:
            raise IngestError(f"duplicate doc_id {doc_id}", line)
        lemma_text = _field(rec, "lemma_text", line)
        if not isinstance(lemma_text, str):
            raise IngestError("field 'lemma_text' must be a string", line)

        gender = _field(rec, "author.gender", line)
        if gender not in GENDERS:
            raise IngestError(f"author.gender must be one of {GENDERS}, got {gender!r}", line)
        author = rec["author"]
        age = author.get("age", -1)
        if isinstance(age, bool) or not isinstance(age, int):
            raise IngestError(f"author.age must be an integer, got {age!r}", line)
        author_row = (GENDERS.index(gender), age, str(author.get("firstname", "")), str(author.get("lastname", "")))
        a_key = ("id", author["id"]) if "id" in author else ("value", author_row)
        a = self._intern(self._authors, self.authors, a_key, author_row, "author", line)

        date = _field(rec, "time.date", line)
        try:
            ts = parse_datetime(str(date))
        except ValueError as exc:
            raise IngestError(f"time.date is not ISO-8601: {date!r}", line) from exc
        t_key = ("id", rec["time"]["id"]) if "id" in rec["time"] else ("value", ts)
        t = self._intern(self._times, self.times, t_key, ts, "time", line)

        x = _as_float(_field(rec, "location.x", line), "location.x", line)
        y = _as_float(_field(rec, "location.y", line), "location.y", line)
        l_key = ("id", rec["location"]["id"]) if "id" in rec["location"] else ("value", (x, y))
        loc = self._intern(self._locations, self.locations, l_key, (x, y), "location", line)

        tag_ids = []
        for item in rec.get("tags", []) or []:
            if isinstance(item, str):
                label = item
                kind = "hashtag" if item.startswith("#") else "mention" if item.startswith("@") else "label"
                tid = None
            elif isinstance(item, dict):
                label, kind, tid = item.get("label"), item.get("kind", "label"), item.get("id")
            else:
                raise IngestError(f"tag entries must be strings or objects, got {item!r}", line)
            if not label or kind not in TAG_KINDS:
                raise IngestError(f"malformed tag {item!r}", line)
            key = ("id", tid) if tid is not None else ("value", (label, kind))
            tag_ids.append(self._intern(self._tags, self.tags, key, (label, kind), "tag", line))

        ent_ids = []
        for item in rec.get("named_entities", []) or []:
            if isinstance(item, str):
                label, kind, eid = item, "other", None
            elif isinstance(item, dict):
                label, kind, eid = item.get("label"), item.get("kind", "other"), item.get("id")
            else:
                raise IngestError(f"named entity entries must be strings or objects, got {item!r}", line)
            if not label or kind not in ENTITY_KINDS:
                raise IngestError(f"malformed named entity {item!r}", line)
            key = ("id", eid) if eid is not None else ("value", (label, kind))
            ent_ids.append(self._intern(self._entities, self.entities, key, (label, kind), "named entity", line))

        tokens = tokenize(lemma_text, self.tokenizer_mode)
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        stored = rec.get("words")
        if stored is not None:
            given = {}
            for w in stored:
                try:
                    given[w["word"]] = (int(w["count"]), w.get("tf"))
                except (KeyError, TypeError, ValueError) as exc:
                    raise IngestError(f"malformed word fact {w!r}", line) from exc
            if {k: v[0] for k, v in given.items()} != counts:
                raise IntegrityError(
                    f"doc_id={doc_id}: word facts do not match lemma_text" + (f" (line {line})" if line else "")
                )

        row = len(self.doc_ids)
        self._seen_docs.add(doc_id)
        self.doc_ids.append(doc_id)
        self.lemma_text.append(" ".join(tokens))
        self.raw_text.append(str(rec.get("raw_text", lemma_text)))
        self.clean_text.append(str(rec.get("clean_text", lemma_text)))
        self.doc_author.append(a)
        self.doc_time.append(t)
        self.doc_location.append(loc)
        self.doc_tags.append(tuple(tag_ids))
        self.doc_entities.append(tuple(ent_ids))

        if counts:
            f_max = max(counts.values())
            facts = []
            for lemma, c in counts.items():
                wid = self.word_ids.setdefault(lemma, len(self.word_ids))
                facts.append((wid, lemma, c))
            facts.sort()
            for wid, lemma, c in facts:
                tf = augmented_tf(c, f_max, self.K)
                if stored is not None and given[lemma][1] is not None:
                    if not abs(float(given[lemma][1]) - tf) <= TF_TOLERANCE:
                        raise IntegrityError(
                            f"doc_id={doc_id}, word={lemma!r}: stored tf {given[lemma][1]!r} "
                            f"disagrees with recomputed {tf!r}" + (f" (line {line})" if line else "")
                        )
                self.fact_doc.append(row)
                self.fact_word.append(wid)
                self.fact_count.append(c)
                self.fact_tf.append(tf)

    def build(self) -> Corpus:
        return Corpus(
            doc_ids=_i64(self.doc_ids),
            raw_text=self.raw_text,
            clean_text=self.clean_text,
            lemma_text=self.lemma_text,
            doc_author=_i64(self.doc_author),
            doc_time=_i64(self.doc_time),
            doc_location=_i64(self.doc_location),
            doc_tags=self.doc_tags,
            doc_entities=self.doc_entities,
            lemmas=list(self.word_ids),
            fact_doc=_i64(self.fact_doc),
            fact_word=_i64(self.fact_word),
            fact_count=_i64(self.fact_count),
            fact_tf=_f64(self.fact_tf),
            author_gender=np.asarray([a[0] for a in self.authors], dtype=np.int8),
            author_age=_i64([a[1] for a in self.authors]),
            author_firstname=[a[2] for a in self.authors],
            author_lastname=[a[3] for a in self.authors],
            time_ts=_i64(self.times),
            location_x=_f64([p[0] for p in self.locations]),
            location_y=_f64([p[1] for p in self.locations]),
            tag_label=[t[0] for t in self.tags],
            tag_kind=[t[1] for t in self.tags],
            entity_label=[e[0] for e in self.entities],
            entity_kind=[e[1] for e in self.entities],
            K=self.K,
        )
