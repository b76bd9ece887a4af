"""Term weighting kernels: augmented TF, IDF, TF-IDF, Okapi BM25 and the
summed keyword/document scores.

All statistics (N, document frequencies, document lengths, average length)
come from a *filtered* sub-corpus captured in :class:`FilteredStats`; nothing
here reads global precomputed weights.

Scalar kernels and their ``*_values`` array counterparts evaluate the same
floating-point expression in the same order, and IDF always goes through
``math.log``, so the scalar and vector paths agree bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError
from .model import Corpus, augmented_tf

SCHEMES = ("tfidf", "bm25")
DOC_LENGTH_MODES = ("tokens", "distinct")


@dataclass(frozen=True)
class WeightParams:
    """Free parameters of the weighting formulas.

    ``doc_length`` selects how ||d|| is measured: ``"tokens"`` sums f_td over
    the document's facts, ``"distinct"`` counts its distinct terms.
    """

    K: float = 0.5
    k1: float = 1.2
    b: float = 0.75
    log_base: str = "natural"
    doc_length: str = "tokens"

    def __post_init__(self):
        if not 0 <= self.K < 1:
            raise DomainError(f"K must lie in [0, 1), got {self.K}")
        if not 1.2 <= self.k1 <= 2.0:
            raise DomainError(f"k1 must lie in [1.2, 2.0], got {self.k1}")
        if not 0 <= self.b <= 1:
            raise DomainError(f"b must lie in [0, 1], got {self.b}")
        if self.log_base != "natural":
            raise DomainError(f"only the natural logarithm is supported, got {self.log_base!r}")
        if self.doc_length not in DOC_LENGTH_MODES:
            raise DomainError(f"doc_length must be one of {DOC_LENGTH_MODES}, got {self.doc_length!r}")

    def to_dict(self) -> dict:
        return asdict(self)


# -- scalar kernels -----------------------------------------------------------


def tf_augmented(f_td: int, f_max: int, K: float) -> float:
    if f_max <= 0:
        raise DomainError(f"f_max must be positive, got {f_max}")
    if not 1 <= f_td <= f_max:
        raise DomainError(f"need 1 <= f_td <= f_max, got f_td={f_td}, f_max={f_max}")
    return augmented_tf(f_td, f_max, K)


def idf(N: int, n: int) -> float:
    if N <= 0 or n <= 0:
        raise DomainError(f"idf needs N > 0 and n > 0, got N={N}, n={n}")
    if n > N:
        raise DomainError(f"document frequency n={n} exceeds N={N}")
    return 1.0 + math.log(N / n)


def tfidf_weight(tf: float, N: int, n: int) -> float:
    return tf * idf(N, n)


def bm25_weight(tf: float, N: int, n: int, dl: float, avgdl: float, k1: float, b: float) -> float:
    if not avgdl > 0:
        raise DomainError(f"avgdl must be positive, got {avgdl}")
    return tfidf_weight(tf, N, n) * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))


# -- array kernels --------------------------------------------------------------


def idf_values(N: int, n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    if n.size == 0:
        return np.zeros(0)
    uniq, inverse = np.unique(n, return_inverse=True)
    table = np.array([idf(N, int(u)) for u in uniq])
    return table[inverse]


def tfidf_values(tf: np.ndarray, N: int, n: np.ndarray) -> np.ndarray:
    return tf * idf_values(N, n)


def bm25_values(
    tf: np.ndarray, N: int, n: np.ndarray, dl: np.ndarray, avgdl: float, k1: float, b: float
) -> np.ndarray:
    if len(tf) and not avgdl > 0:
        raise DomainError(f"avgdl must be positive, got {avgdl}")
    return tfidf_values(tf, N, n) * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))


def weight_values(scheme: str, tf, N, n, dl, avgdl, params: WeightParams) -> np.ndarray:
    if scheme == "tfidf":
        return tfidf_values(tf, N, n)
    if scheme == "bm25":
        return bm25_values(tf, N, n, dl, avgdl, params.k1, params.b)
    raise DomainError(f"unknown weighting scheme {scheme!r}")


# -- filtered statistics ----------------------------------------------------------


@dataclass(frozen=True)
class FilteredStats:
    """Statistics of a filtered sub-corpus.

    Documents and words are keyed by corpus row / word_id.  ``tf`` holds the
    augmented term frequency of every (document, word) pair in the subset.
    """

    N: int
    df: dict[int, int]
    doc_length: dict[int, int]
    avgdl: float
    tf: dict[tuple[int, int], float] = field(repr=False)

    @classmethod
    def from_corpus(
        cls, corpus: Corpus, doc_rows: Iterable[int], params: WeightParams = WeightParams()
    ) -> FilteredStats:
        """Statistics over the given document rows; documents without facts are ignored."""
        rows = sorted(set(int(r) for r in doc_rows))
        off = corpus.doc_offsets
        df: dict[int, int] = {}
        dls: dict[int, int] = {}
        tf: dict[tuple[int, int], float] = {}
        for r in rows:
            lo, hi = off[r], off[r + 1]
            if lo == hi:
                continue
            counts = corpus.fact_count[lo:hi]
            tfs = document_tf(corpus, lo, hi, params.K)
            for w, t in zip(corpus.fact_word[lo:hi], tfs):
                df[int(w)] = df.get(int(w), 0) + 1
                tf[(r, int(w))] = float(t)
            dls[r] = int(counts.sum()) if params.doc_length == "tokens" else int(hi - lo)
        N = len(dls)
        avgdl = sum(dls.values()) / N if N else 0.0
        return cls(N, df, dls, avgdl, tf)


def document_tf(corpus: Corpus, lo: int, hi: int, K: float) -> np.ndarray:
    """Augmented TF of facts ``lo:hi`` (one document): the stored column when
    it was materialized with the same K, otherwise recomputed from counts."""
    if K == corpus.K:
        return corpus.fact_tf[lo:hi]
    counts = corpus.fact_count[lo:hi]
    return augmented_tf(counts, counts.max(), K)


def _pair_weight(t: int, d: int, stats: FilteredStats, params: WeightParams, scheme: str) -> float:
    if (d, t) not in stats.tf:
        raise DomainError(f"word {t} does not occur in document row {d} of the subset")
    tf = stats.tf[(d, t)]
    if scheme == "tfidf":
        return tfidf_weight(tf, stats.N, stats.df[t])
    if scheme == "bm25":
        return bm25_weight(tf, stats.N, stats.df[t], stats.doc_length[d], stats.avgdl, params.k1, params.b)
    raise DomainError(f"unknown weighting scheme {scheme!r}")


def tfidf(t: int, d: int, stats: FilteredStats, params: WeightParams = WeightParams()) -> float:
    """TF-IDF of word ``t`` in document row ``d`` relative to the subset."""
    return _pair_weight(t, d, stats, params, "tfidf")


def bm25(t: int, d: int, stats: FilteredStats, params: WeightParams = WeightParams()) -> float:
    """Okapi BM25 of word ``t`` in document row ``d``.

    The numerator carries the full TF-IDF weight and the denominator the
    augmented TF, exactly as the benchmark defines it.
    """
    return _pair_weight(t, d, stats, params, "bm25")


def score_topk_keywords(
    t: int, stats: FilteredStats, params: WeightParams = WeightParams(), scheme: str = "tfidf"
) -> float:
    """Sum of the per-document weights of word ``t`` over the subset (ascending document order)."""
    if t not in stats.df:
        raise DomainError(f"word {t} does not occur in the subset")
    total = 0.0
    for d in sorted(stats.doc_length):
        if (d, t) in stats.tf:
            total += _pair_weight(t, d, stats, params, scheme)
    return total


def score_topk_documents(
    query_terms: Iterable[int],
    d: int,
    stats: FilteredStats,
    params: WeightParams = WeightParams(),
    scheme: str = "tfidf",
) -> float:
    """Sum over the query terms of their weight in document row ``d``; absent terms add 0."""
    terms = sorted(set(query_terms))
    if not terms:
        raise DomainError("the search query must contain at least one term")
    if d not in stats.doc_length:
        raise DomainError(f"document row {d} is not in the subset")
    total = 0.0
    for t in terms:
        if (d, t) in stats.tf:
            total += _pair_weight(t, d, stats, params, scheme)
    return total
