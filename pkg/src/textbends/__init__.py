"""Synthetic text-warehouse benchmark: corpus generation, TF-IDF/BM25 top-k
keyword and document queries, and a timed execution protocol."""

from .bench import ProtocolConfig, ResultEntry, RunReport, emit_report, run_benchmark, sweep_scale
from .engine import RankedResult, execute, plan, selectivity, verify
from .errors import (
    ConfigError,
    DomainError,
    EquivalenceError,
    IngestError,
    IntegrityError,
    NondeterminismError,
    QueryValidationError,
    TextBenDSError,
)
from .gencorpus import CorpusManifest, GeneratorConfig, export_snowflake, generate, ingest_jsonl, load_snowflake
from .model import Corpus, CorpusBuilder, from_nested, to_nested
from .weighting import WeightParams, bm25, idf, score_topk_documents, score_topk_keywords, tf_augmented, tfidf
from .workload import STANDARD_PARAMS, FilterSet, GeoBox, ParamFile, QuerySpec, TimeWindow, build_workload, complexity

__version__ = "0.1.0"

__all__ = [
    "Corpus", "CorpusBuilder", "CorpusManifest", "ConfigError", "DomainError", "EquivalenceError",
    "FilterSet", "GeneratorConfig", "GeoBox", "IngestError", "IntegrityError", "NondeterminismError",
    "ParamFile", "ProtocolConfig", "QuerySpec", "QueryValidationError", "RankedResult", "ResultEntry",
    "RunReport", "STANDARD_PARAMS", "TextBenDSError", "TimeWindow", "WeightParams", "bm25",
    "build_workload", "complexity", "emit_report", "execute", "export_snowflake", "from_nested",
    "generate", "idf", "ingest_jsonl", "load_snowflake", "plan", "run_benchmark", "score_topk_documents",
    "score_topk_keywords", "selectivity", "sweep_scale", "tf_augmented", "tfidf", "to_nested", "verify",
]
