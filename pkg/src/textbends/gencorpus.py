"""Corpus generation, JSONL ingestion and snowflake CSV export.

``generate`` builds a synthetic corpus whose size is controlled by a scale
factor.  Documents are balanced across gender, day and geographic quadrant;
lemmas follow a Zipf law over a pseudo-word vocabulary, and a short list of
guaranteed terms is kept frequent enough for search-term queries to match.
Everything is a pure function of the configuration (numpy PCG64 seeded from
``seed``).
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Iterator

import numpy as np

from .errors import ConfigError, IngestError, IntegrityError
from .model import (
    DEFAULT_K,
    GENDERS,
    Corpus,
    CorpusBuilder,
    augmented_tf,
    canonical_json,
    format_datetime,
    parse_datetime,
    to_nested,
)

log = logging.getLogger(__name__)

GUARANTEED_TERMS = ("think", "today", "friday")

_ONSETS = "b c d f g h j k l m n p r s t v w z br ch cl cr dr fl fr gl gr pl pr sh sl sp st th tr".split()
_VOWELS = "a e i o u ai ea ee oo ou".split()
_SYLLABLES = [o + v for o in _ONSETS for v in _VOWELS]

_FIRST = {
    "male": "james john robert michael david william richard joseph thomas daniel".split(),
    "female": "mary patricia jennifer linda elizabeth barbara susan jessica sarah karen".split(),
}
_LAST = "smith johnson williams brown jones garcia miller davis wilson moore taylor clark".split()
_ENTITIES = (
    [(n, "person") for n in ("obama", "merkel", "messi", "adele", "musk")]
    + [(n, "location") for n in ("paris", "london", "tokyo", "bucharest", "aarhus", "lyon")]
    + [(n, "organization") for n in ("nasa", "unicef", "fifa", "apple")]
    + [(n, "product") for n in ("iphone", "playstation", "kindle")]
    + [(n, "other") for n in ("olympics", "eurovision")]
)


@dataclass(frozen=True)
class GeneratorConfig:
    sf: float
    seed: int = 42
    docs_per_unit_sf: int = 1_000_000
    vocab_size: int = 5000
    min_tokens: int = 5
    max_tokens: int = 30
    time_range: tuple[str, str] = ("2015-09-14T00:00:00", "2015-09-21T00:00:00")
    geo_range: tuple[float, float, float, float] = (0.0, 60.0, -150.0, 150.0)
    zipf_exponent: float = 1.07
    guaranteed_terms: tuple[str, ...] = GUARANTEED_TERMS
    guaranteed_rate: float = 0.001
    author_pool: int | None = None
    K: float = DEFAULT_K

    def __post_init__(self):
        if not (isinstance(self.sf, (int, float)) and self.sf > 0 and math.isfinite(self.sf)):
            raise ConfigError(f"scale factor must be positive, got {self.sf!r}")
        if self.docs_per_unit_sf < 1:
            raise ConfigError("docs_per_unit_sf must be >= 1")
        if self.vocab_size < max(1, len(self.guaranteed_terms)):
            raise ConfigError("vocab_size must be >= 1 and hold every guaranteed term")
        if not 1 <= self.min_tokens <= self.max_tokens:
            raise ConfigError("need 1 <= min_tokens <= max_tokens")
        if not parse_datetime(self.time_range[0]) < parse_datetime(self.time_range[1]):
            raise ConfigError("time_range start must precede its end")
        x0, x1, y0, y1 = self.geo_range
        if not (x0 < x1 and y0 < y1):
            raise ConfigError("geo_range must satisfy x_min < x_max and y_min < y_max")
        if self.zipf_exponent <= 0:
            raise ConfigError("zipf_exponent must be positive")
        if self.author_pool is not None and self.author_pool < 2:
            raise ConfigError("author_pool must hold at least one author per gender")
        if not 0 <= self.K < 1:
            raise ConfigError(f"K must lie in [0, 1), got {self.K}")

    @property
    def document_count(self) -> int:
        return int(round(self.sf * self.docs_per_unit_sf))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["time_range"] = list(self.time_range)
        d["geo_range"] = list(self.geo_range)
        d["guaranteed_terms"] = list(self.guaranteed_terms)
        return d


@dataclass(frozen=True)
class CorpusManifest:
    sf: float | None
    seed: int | None
    document_count: int
    vocabulary_size: int
    checksum: str

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CorpusManifest:
        return cls(**{k: data[k] for k in ("sf", "seed", "document_count", "vocabulary_size", "checksum")})

    @classmethod
    def for_corpus(cls, corpus: Corpus, sf: float | None = None, seed: int | None = None) -> CorpusManifest:
        return cls(sf, seed, corpus.n_docs, corpus.n_words, corpus.checksum())


# --------------------------------------------------------------------------
# generation
# --------------------------------------------------------------------------


def _pseudo_word(i: int) -> str:
    """Injective index -> pronounceable word of two or more syllables."""
    i += len(_SYLLABLES)
    parts = []
    while i:
        i, r = divmod(i, len(_SYLLABLES))
        parts.append(_SYLLABLES[r])
    return "".join(reversed(parts))


def vocabulary(size: int, guaranteed: tuple[str, ...] = GUARANTEED_TERMS) -> list[str]:
    """Rank-ordered vocabulary; guaranteed term j sits at rank 10 + 15*j (capped)."""
    slots: dict[int, str] = {}
    for j, term in enumerate(guaranteed):
        pos = min(10 + 15 * j, size - 1)
        while pos in slots:
            pos -= 1
        slots[pos] = term
    taken = set(guaranteed)
    words, i = [], 0
    for rank in range(size):
        if rank in slots:
            words.append(slots[rank])
            continue
        w = _pseudo_word(i)
        while w in taken:
            i += 1
            w = _pseudo_word(i)
        words.append(w)
        i += 1
    return words


def _inject_guaranteed(tokens, offsets, lengths, term_ranks, need, rng) -> None:
    n = len(lengths)
    doc_of_token = np.repeat(np.arange(n), lengths)
    for _ in range(10):
        changed = False
        for j, rank in enumerate(term_ranks):
            present = np.unique(doc_of_token[tokens == rank])
            missing = need - present.size
            if missing <= 0:
                continue
            lacking = np.setdiff1d(np.arange(n), present, assume_unique=True)
            pick = np.sort(rng.choice(lacking, size=missing, replace=False))
            tokens[offsets[pick] + (j % lengths[pick])] = rank
            changed = True
        if not changed:
            return
    raise ConfigError("could not place guaranteed terms; increase min_tokens or lower guaranteed_rate")


def generate(config: GeneratorConfig) -> tuple[Corpus, CorpusManifest]:
    """Build a corpus of ``round(sf * docs_per_unit_sf)`` documents."""
    rng = np.random.default_rng(config.seed)
    n = config.document_count
    V = config.vocab_size
    words = vocabulary(V, config.guaranteed_terms)

    ranks = np.arange(1, V + 1, dtype=np.float64)
    p = ranks ** -config.zipf_exponent
    p /= p.sum()

    lengths = rng.integers(config.min_tokens, config.max_tokens + 1, size=n)
    offsets = np.concatenate(([0], np.cumsum(lengths)[:-1])).astype(np.int64)
    tokens = rng.choice(V, size=int(lengths.sum()), p=p)
    if n and config.guaranteed_terms:
        need = math.ceil(config.guaranteed_rate * n)
        term_ranks = [words.index(t) for t in config.guaranteed_terms]
        _inject_guaranteed(tokens, offsets, lengths, term_ranks, need, rng)

    # fact table
    doc_of_token = np.repeat(np.arange(n, dtype=np.int64), lengths)
    keys, counts = np.unique(doc_of_token * V + tokens, return_counts=True)
    fact_doc = keys // V
    used = np.unique(tokens)
    remap = np.full(V, -1, dtype=np.int64)
    remap[used] = np.arange(used.size)
    fact_word = remap[keys % V]
    fact_count = counts.astype(np.int64)
    starts = np.searchsorted(fact_doc, np.arange(n))
    fmax = np.maximum.reduceat(fact_count, starts) if n else np.zeros(0, dtype=np.int64)
    fact_tf = augmented_tf(fact_count, fmax[fact_doc], config.K)
    lemmas = [words[u] for u in used]

    # balanced dimensions: each attribute gets its own permutation of the documents
    gender = np.empty(n, dtype=np.int8)
    gender[rng.permutation(n)] = np.arange(n) % 2

    t0, t1 = parse_datetime(config.time_range[0]), parse_datetime(config.time_range[1])
    slots = np.floor((np.arange(n) + rng.random(n)) * ((t1 - t0) / max(n, 1))).astype(np.int64)
    doc_ts = np.empty(n, dtype=np.int64)
    doc_ts[rng.permutation(n)] = t0 + slots

    x0, x1, y0, y1 = config.geo_range
    cell = np.arange(n) % 16
    quadrant, sub = cell % 4, cell // 4
    col = (quadrant % 2) * 2 + sub % 2
    row = (quadrant // 2) * 2 + sub // 2
    perm = rng.permutation(n)
    xs, ys = np.empty(n), np.empty(n)
    xs[perm] = x0 + (col + rng.random(n)) * ((x1 - x0) / 4)
    ys[perm] = y0 + (row + rng.random(n)) * ((y1 - y0) / 4)

    # authors
    if config.author_pool is None:
        author_gender = gender.copy()
        doc_author = np.arange(n, dtype=np.int64)
    else:
        author_gender = (np.arange(config.author_pool) % 2).astype(np.int8)
        pools = [np.flatnonzero(author_gender == g) for g in range(2)]
        doc_author = np.empty(n, dtype=np.int64)
        for g in range(2):
            docs = np.flatnonzero(gender == g)
            doc_author[docs] = pools[g][rng.integers(0, pools[g].size, size=docs.size)]
    n_authors = author_gender.size
    ages = rng.integers(18, 71, size=n_authors)
    first_pick = rng.integers(0, 10, size=n_authors)
    last_pick = rng.integers(0, len(_LAST), size=n_authors)
    firstnames = [_FIRST[GENDERS[g]][i] for g, i in zip(author_gender, first_pick)]
    lastnames = [_LAST[i] for i in last_pick]

    # tags and named entities
    tag_label = [f"#{_pseudo_word(1000 + i)}" for i in range(40)]
    tag_label += [f"@{_FIRST['male'][i % 10]}_{_LAST[i % len(_LAST)]}{i}" for i in range(20)]
    tag_label += ["news", "sports", "music", "politics", "weather"]
    tag_kind = ["hashtag"] * 40 + ["mention"] * 20 + ["label"] * 5
    tag_draw = rng.integers(0, len(tag_label), size=(n, 2))
    tag_count = rng.integers(0, 3, size=n)
    ent_draw = rng.integers(0, len(_ENTITIES), size=n)
    ent_count = rng.integers(0, 2, size=n)
    doc_tags = [tuple(dict.fromkeys(tag_draw[i, : tag_count[i]].tolist())) for i in range(n)]
    doc_entities = [(int(ent_draw[i]),) if ent_count[i] else () for i in range(n)]

    vocab_arr = np.asarray(words, dtype=object)
    lemma_text = [" ".join(vocab_arr[tokens[o:o + m]]) for o, m in zip(offsets, lengths)]
    raw_text = [
        " ".join([text[:1].upper() + text[1:]] + [tag_label[t] for t in tags])
        for text, tags in zip(lemma_text, doc_tags)
    ]

    corpus = Corpus(
        doc_ids=np.arange(1, n + 1, dtype=np.int64),
        raw_text=raw_text,
        clean_text=list(lemma_text),
        lemma_text=lemma_text,
        doc_author=doc_author,
        doc_time=np.arange(n, dtype=np.int64),
        doc_location=np.arange(n, dtype=np.int64),
        doc_tags=doc_tags,
        doc_entities=doc_entities,
        lemmas=lemmas,
        fact_doc=fact_doc.astype(np.int64),
        fact_word=fact_word,
        fact_count=fact_count,
        fact_tf=np.asarray(fact_tf, dtype=np.float64),
        author_gender=author_gender,
        author_age=ages.astype(np.int64),
        author_firstname=firstnames,
        author_lastname=lastnames,
        time_ts=doc_ts,
        location_x=xs,
        location_y=ys,
        tag_label=tag_label,
        tag_kind=tag_kind,
        entity_label=[e[0] for e in _ENTITIES],
        entity_kind=[e[1] for e in _ENTITIES],
        K=config.K,
    ).validate()
    manifest = CorpusManifest.for_corpus(corpus, sf=config.sf, seed=config.seed)
    log.info("generated %d documents, %d lemmas, %d fact rows", n, corpus.n_words, corpus.n_facts)
    return corpus, manifest


# --------------------------------------------------------------------------
# JSONL
# --------------------------------------------------------------------------


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict[str, Any]]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"malformed JSON: {exc.msg}", lineno) from exc


def ingest_jsonl(path: str | Path, tokenizer_mode: str = "pretokenized", K: float = DEFAULT_K) -> Corpus:
    """Load newline-delimited nested documents; f_td and tf are recomputed from lemma_text."""
    builder = CorpusBuilder(K=K, tokenizer_mode=tokenizer_mode)
    for lineno, rec in iter_jsonl(path):
        builder.add(rec, line=lineno)
    return builder.build().validate()


def write_jsonl(corpus: Corpus, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in to_nested(corpus):
            fh.write(canonical_json(rec))
            fh.write("\n")
    return path


def manifest_path(corpus_path: str | Path) -> Path:
    p = Path(corpus_path)
    return p.with_name(p.name.split(".")[0] + ".manifest.json")


def write_manifest(manifest: CorpusManifest, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str | Path) -> CorpusManifest:
    return CorpusManifest.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# --------------------------------------------------------------------------
# snowflake CSV export
# --------------------------------------------------------------------------

SNOWFLAKE_TABLES = {
    "document_facts": ["document_id", "word_id", "count", "tf"],
    "document_dim": ["document_id", "doc_id", "raw_text", "clean_text", "lemma_text",
                     "author_id", "time_id", "location_id"],
    "word_dim": ["word_id", "lemma"],
    "time_dim": ["time_id", "full_date", "minute", "hour", "day", "month", "year"],
    "author_dim": ["author_id", "gender", "age", "firstname", "lastname"],
    "location_dim": ["location_id", "x", "y"],
    "tag_dim": ["tag_id", "label", "kind"],
    "named_entity_dim": ["named_entity_id", "label", "kind"],
    "document_bridge": ["document_id", "kind", "ref_id", "position"],
}


def _snowflake_rows(corpus: Corpus, table: str) -> Iterator[list]:
    if table == "document_facts":
        for d, w, c, t in zip(corpus.fact_doc, corpus.fact_word, corpus.fact_count, corpus.fact_tf):
            yield [int(d), int(w), int(c), repr(float(t))]
    elif table == "document_dim":
        for i in range(corpus.n_docs):
            yield [i, int(corpus.doc_ids[i]), corpus.raw_text[i], corpus.clean_text[i], corpus.lemma_text[i],
                   int(corpus.doc_author[i]), int(corpus.doc_time[i]), int(corpus.doc_location[i])]
    elif table == "word_dim":
        yield from ([i, lemma] for i, lemma in enumerate(corpus.lemmas))
    elif table == "time_dim":
        for i in range(len(corpus.time_ts)):
            tp = corpus.time(i)
            yield [i, format_datetime(int(corpus.time_ts[i])), tp.minute, tp.hour, tp.day, tp.month, tp.year]
    elif table == "author_dim":
        for i in range(len(corpus.author_gender)):
            a = corpus.author(i)
            yield [i, a.gender, a.age, a.firstname, a.lastname]
    elif table == "location_dim":
        for i, (x, y) in enumerate(zip(corpus.location_x, corpus.location_y)):
            yield [i, repr(float(x)), repr(float(y))]
    elif table == "tag_dim":
        yield from ([i, lab, kind] for i, (lab, kind) in enumerate(zip(corpus.tag_label, corpus.tag_kind)))
    elif table == "named_entity_dim":
        yield from ([i, lab, kind] for i, (lab, kind) in enumerate(zip(corpus.entity_label, corpus.entity_kind)))
    elif table == "document_bridge":
        for i in range(corpus.n_docs):
            yield from ([i, "tag", t, pos] for pos, t in enumerate(corpus.doc_tags[i]))
            yield from ([i, "named_entity", e, pos] for pos, e in enumerate(corpus.doc_entities[i]))


def export_snowflake(corpus: Corpus, directory: str | Path) -> list[Path]:
    """Write one RFC-4180 CSV file (with header) per snowflake table."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for table, header in SNOWFLAKE_TABLES.items():
        path = directory / f"{table}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(_snowflake_rows(corpus, table))
        paths.append(path)
    return paths


def _read_table(directory: Path, table: str) -> list[dict[str, str]]:
    path = directory / f"{table}.csv"
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SNOWFLAKE_TABLES[table]:
            raise IntegrityError(f"{path.name}: unexpected header {reader.fieldnames}")
        rows = list(reader)
    for i, row in enumerate(rows):
        if int(row[SNOWFLAKE_TABLES[table][0]]) != i and table not in ("document_facts", "document_bridge"):
            raise IntegrityError(f"{path.name}: row {i + 2} is out of surrogate-key order")
    return rows


def load_snowflake(directory: str | Path, K: float = DEFAULT_K) -> Corpus:
    """Inverse of :func:`export_snowflake`; stored tf is verified against recomputation."""
    directory = Path(directory)
    t = {table: _read_table(directory, table) for table in SNOWFLAKE_TABLES}
    docs = t["document_dim"]
    n = len(docs)
    doc_tags: list[list[int]] = [[] for _ in range(n)]
    doc_entities: list[list[int]] = [[] for _ in range(n)]
    for row in t["document_bridge"]:
        d = int(row["document_id"])
        if not 0 <= d < n:
            raise IntegrityError(f"document_bridge references missing document {d}")
        (doc_tags if row["kind"] == "tag" else doc_entities)[d].append(int(row["ref_id"]))
    facts = t["document_facts"]
    authors = t["author_dim"]
    try:
        gender_codes = [GENDERS.index(a["gender"]) for a in authors]
    except ValueError as exc:
        raise IntegrityError(f"author_dim: {exc}") from exc
    return Corpus(
        doc_ids=np.array([int(r["doc_id"]) for r in docs], dtype=np.int64),
        raw_text=[r["raw_text"] for r in docs],
        clean_text=[r["clean_text"] for r in docs],
        lemma_text=[r["lemma_text"] for r in docs],
        doc_author=np.array([int(r["author_id"]) for r in docs], dtype=np.int64),
        doc_time=np.array([int(r["time_id"]) for r in docs], dtype=np.int64),
        doc_location=np.array([int(r["location_id"]) for r in docs], dtype=np.int64),
        doc_tags=[tuple(x) for x in doc_tags],
        doc_entities=[tuple(x) for x in doc_entities],
        lemmas=[r["lemma"] for r in t["word_dim"]],
        fact_doc=np.array([int(r["document_id"]) for r in facts], dtype=np.int64),
        fact_word=np.array([int(r["word_id"]) for r in facts], dtype=np.int64),
        fact_count=np.array([int(r["count"]) for r in facts], dtype=np.int64),
        fact_tf=np.array([float(r["tf"]) for r in facts], dtype=np.float64),
        author_gender=np.array(gender_codes, dtype=np.int8),
        author_age=np.array([int(a["age"]) for a in authors], dtype=np.int64),
        author_firstname=[a["firstname"] for a in authors],
        author_lastname=[a["lastname"] for a in authors],
        time_ts=np.array([parse_datetime(r["full_date"]) for r in t["time_dim"]], dtype=np.int64),
        location_x=np.array([float(r["x"]) for r in t["location_dim"]], dtype=np.float64),
        location_y=np.array([float(r["y"]) for r in t["location_dim"]], dtype=np.float64),
        tag_label=[r["label"] for r in t["tag_dim"]],
        tag_kind=[r["kind"] for r in t["tag_dim"]],
        entity_label=[r["label"] for r in t["named_entity_dim"]],
        entity_kind=[r["kind"] for r in t["named_entity_dim"]],
        K=K,
    ).validate(check_text=True)
