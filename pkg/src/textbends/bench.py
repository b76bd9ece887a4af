"""Execution protocol, timing statistics and report emission.

Each (query, executor) pair runs ``cold_runs`` unmeasured executions and then
``warm_runs`` measured ones, strictly sequentially.  Timing covers the
statistics pass, aggregation and top-k cut, but not corpus loading or plan
construction.  Nothing is cached between runs except the immutable corpus
(and its nested rendering), so every run recomputes all weights.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import engine
from .errors import ConfigError, DomainError, EquivalenceError
from .gencorpus import (
    CorpusManifest,
    GeneratorConfig,
    generate,
    ingest_jsonl,
    manifest_path,
    read_manifest,
    write_jsonl,
    write_manifest,
)
from .model import Corpus
from .workload import QuerySpec, complexity, validate

log = logging.getLogger(__name__)

REPORT_FORMATS = ("json", "csv", "plotdata")
CSV_COLUMNS = [
    "query_id", "gender", "scheme", "engine", "sf", "k", "n_samples", "mean_ms", "stddev_ms",
    "selectivity", "complexity", "result_checksum", "status",
]

ExecuteFn = Callable[[engine.ExecutionPlan, Corpus, QuerySpec], engine.RankedResult]


@dataclass(frozen=True)
class ProtocolConfig:
    warm_runs: int = 10
    cold_runs: int = 1
    engines: tuple[str, ...] = ("columnar", "mapreduce")
    check_equivalence: bool = True
    clock: str = "time.perf_counter_ns"

    def __post_init__(self):
        if self.warm_runs < 1:
            raise ConfigError("warm_runs must be >= 1")
        if self.cold_runs < 0:
            raise ConfigError("cold_runs must be >= 0")
        if not self.engines:
            raise ConfigError("at least one engine is required")
        unknown = set(self.engines) - set(engine.EXECUTORS)
        if unknown:
            raise ConfigError(f"unknown engine(s) {sorted(unknown)}; expected a subset of {engine.EXECUTORS}")

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["engines"] = list(self.engines)
        return d


@dataclass
class ResultEntry:
    query_id: str
    gender: str
    scheme: str
    engine: str
    sf: float | None
    samples_ms: list[float]
    mean_ms: float
    stddev_ms: float
    selectivity: float | None
    complexity: int
    result_checksum: str | None
    k: int = 10
    status: str = "ok"


@dataclass
class RunReport:
    manifest: dict[str, Any] | None
    protocol: dict[str, Any]
    params: dict[str, Any]
    results: list[ResultEntry] = field(default_factory=list)
    timestamp: str = ""
    host: dict[str, Any] = field(default_factory=dict)

    @property
    def sf(self) -> float | None:
        return (self.manifest or {}).get("sf")

    @property
    def ok(self) -> bool:
        return all(r.status == "ok" for r in self.results)

    def to_dict(self) -> dict[str, Any]:
        return {
            "manifest": self.manifest,
            "protocol": self.protocol,
            "params": self.params,
            "results": [asdict(r) for r in self.results],
            "timestamp": self.timestamp,
            "host": self.host,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunReport:
        return cls(
            manifest=data.get("manifest"),
            protocol=data["protocol"],
            params=data["params"],
            results=[ResultEntry(**r) for r in data["results"]],
            timestamp=data.get("timestamp", ""),
            host=data.get("host", {}),
        )


def host_descriptor() -> dict[str, Any]:
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "cpu_count": os.cpu_count(),
    }


def timing_stats(samples_ms: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation."""
    arr = np.asarray(samples_ms, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def run_benchmark(
    corpus: Corpus,
    specs: Iterable[QuerySpec],
    protocol: ProtocolConfig = ProtocolConfig(),
    manifest: CorpusManifest | dict | None = None,
    execute_fn: ExecuteFn = engine.execute_plan,
    clock: Callable[[], int] = time.perf_counter_ns,
) -> RunReport:
    """Run every spec on every engine under the cold/warm protocol.

    A spec whose result checksum changes between runs gets status
    ``"nondeterministic"`` and no timing statistics.  With
    ``check_equivalence``, engines disagreeing on a spec raise
    EquivalenceError.
    """
    specs = [validate(s) for s in specs]
    if isinstance(manifest, CorpusManifest):
        manifest = manifest.to_dict()
    sf = (manifest or {}).get("sf")
    report = RunReport(
        manifest=manifest,
        protocol=protocol.to_dict(),
        params=_params_block(specs),
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        host=host_descriptor(),
    )
    for spec in specs:
        try:
            sel = engine.selectivity(spec, corpus)
        except DomainError:
            sel = None
        cost = complexity(spec)
        first_results: dict[str, engine.RankedResult] = {}
        for name in protocol.engines:
            plan = engine.plan(spec, name)
            checksums = set()
            result = None
            for _ in range(protocol.cold_runs):
                result = execute_fn(plan, corpus, spec)
                checksums.add(result.checksum())
            samples = []
            for _ in range(protocol.warm_runs):
                t0 = clock()
                result = execute_fn(plan, corpus, spec)
                t1 = clock()
                samples.append((t1 - t0) / 1e6)
                checksums.add(result.checksum())
            first_results[name] = result
            entry = ResultEntry(
                query_id=spec.query_id,
                gender=spec.filters.gender,
                scheme=spec.scheme,
                engine=name,
                sf=sf,
                samples_ms=samples,
                mean_ms=0.0,
                stddev_ms=0.0,
                selectivity=sel,
                complexity=cost,
                result_checksum=None,
                k=spec.k,
            )
            if len(checksums) > 1:
                log.error("%s on %s: result changed between runs", spec.label, name)
                entry.status = "nondeterministic"
                entry.samples_ms = []
            else:
                entry.mean_ms, entry.stddev_ms = timing_stats(samples)
                entry.result_checksum = checksums.pop()
            report.results.append(entry)
            log.debug("%s %s mean=%.3fms", spec.label, name, entry.mean_ms)
        if protocol.check_equivalence and len(first_results) > 1:
            names = list(first_results)
            for other in names[1:]:
                diff = engine.compare_results(first_results[names[0]], first_results[other])
                if diff:
                    raise EquivalenceError(f"{spec.label}: {names[0]} and {other} disagree: {diff}")
    return report


def _params_block(specs: Sequence[QuerySpec]) -> dict[str, Any]:
    if not specs:
        return {}
    weights = {s.params for s in specs}
    block: dict[str, Any] = specs[0].params.to_dict() if len(weights) == 1 else {"mixed": True}
    block["k"] = sorted({s.k for s in specs}) if len({s.k for s in specs}) > 1 else specs[0].k
    terms = next((s.filters.search_terms for s in specs if s.filters.search_terms), None)
    block["search_terms"] = list(terms) if terms else None
    tw = next((s.filters.time_window for s in specs if s.filters.time_window), None)
    gb = next((s.filters.geo_box for s in specs if s.filters.geo_box), None)
    block["time_window"] = [tw.start, tw.end] if tw else None
    block["geo_box"] = [gb.x_min, gb.x_max, gb.y_min, gb.y_max] if gb else None
    block["genders"] = sorted({s.filters.gender for s in specs})
    return block


# --------------------------------------------------------------------------
# scale sweeps
# --------------------------------------------------------------------------


def load_or_generate(config: GeneratorConfig, cache_dir: str | Path | None = None) -> tuple[Corpus, CorpusManifest]:
    """Generate a corpus, reusing a cached JSONL copy whose manifest matches."""
    if cache_dir is None:
        return generate(config)
    path = Path(cache_dir) / f"corpus_sf{config.sf:g}_seed{config.seed}.jsonl"
    mpath = manifest_path(path)
    if path.exists() and mpath.exists():
        cached = read_manifest(mpath)
        if (cached.sf, cached.seed, cached.document_count) == (config.sf, config.seed, config.document_count):
            corpus = ingest_jsonl(path, K=config.K)
            if corpus.checksum() == cached.checksum:
                return corpus, cached
            log.warning("cached corpus %s does not match its manifest; regenerating", path)
    corpus, manifest = generate(config)
    write_jsonl(corpus, path)
    write_manifest(manifest, mpath)
    return corpus, manifest


def sweep_scale(
    config_base: GeneratorConfig,
    sf_list: Sequence[float],
    specs: Sequence[QuerySpec],
    protocol: ProtocolConfig = ProtocolConfig(),
    cache_dir: str | Path | None = None,
) -> list[RunReport]:
    """One RunReport per scale factor, each tagged with its corpus manifest."""
    sf_list = list(sf_list)
    if any(sf <= 0 for sf in sf_list) or any(b <= a for a, b in zip(sf_list, sf_list[1:])):
        raise ConfigError(f"sf_list must be strictly increasing positives, got {sf_list}")
    reports = []
    for sf in sf_list:
        corpus, manifest = load_or_generate(replace(config_base, sf=sf), cache_dir)
        log.info("SF=%g: %d documents", sf, manifest.document_count)
        reports.append(run_benchmark(corpus, specs, protocol, manifest))
    return reports


def scaling_violations(reports: Sequence[RunReport], noise: float = 0.2) -> list[str]:
    """Soft check: mean runtime should not drop by more than ``noise`` as SF grows."""
    series: dict[tuple, list[tuple[float, float]]] = {}
    for report in reports:
        for r in report.results:
            if r.status == "ok":
                series.setdefault((r.query_id, r.scheme, r.gender, r.engine), []).append((r.sf, r.mean_ms))
    problems = []
    for key, points in sorted(series.items(), key=lambda kv: str(kv[0])):
        for (sf_a, a), (sf_b, b) in zip(points, points[1:]):
            if b < a * (1 - noise):
                problems.append(f"{'/'.join(map(str, key))}: {a:.3f}ms at SF={sf_a} -> {b:.3f}ms at SF={sf_b}")
    for p in problems:
        log.warning("runtime decreased with scale factor: %s", p)
    return problems


# --------------------------------------------------------------------------
# report emission
# --------------------------------------------------------------------------


def _as_list(reports: RunReport | Sequence[RunReport]) -> list[RunReport]:
    return [reports] if isinstance(reports, RunReport) else list(reports)


def csv_rows(reports: RunReport | Sequence[RunReport]) -> list[dict[str, Any]]:
    rows = []
    for report in _as_list(reports):
        for r in report.results:
            rows.append({
                "query_id": r.query_id, "gender": r.gender, "scheme": r.scheme, "engine": r.engine,
                "sf": r.sf, "k": r.k, "n_samples": len(r.samples_ms), "mean_ms": r.mean_ms,
                "stddev_ms": r.stddev_ms, "selectivity": r.selectivity, "complexity": r.complexity,
                "result_checksum": r.result_checksum, "status": r.status,
            })
    return rows


def plot_series(reports: RunReport | Sequence[RunReport]) -> list[dict[str, Any]]:
    """Per (query, scheme, engine) series with x=SF and y=mean runtime.

    Genders are pooled: y is the mean of the per-gender means and stddev the
    root of the mean per-gender variance.
    """
    acc: dict[tuple, dict[Any, list[tuple[float, float]]]] = {}
    for report in _as_list(reports):
        for r in report.results:
            if r.status != "ok":
                continue
            acc.setdefault((r.query_id, r.scheme, r.engine), {}).setdefault(r.sf, []).append(
                (r.mean_ms, r.stddev_ms)
            )
    series = []
    for (qid, scheme, eng), by_sf in acc.items():
        xs = list(by_sf)
        series.append({
            "query_id": qid,
            "scheme": scheme,
            "engine": eng,
            "x": xs,
            "y": [float(np.mean([m for m, _ in by_sf[x]])) for x in xs],
            "stddev": [float(np.sqrt(np.mean([s * s for _, s in by_sf[x]]))) for x in xs],
        })
    return series


def render_report(reports: RunReport | Sequence[RunReport], fmt: str) -> str:
    if fmt == "json":
        if isinstance(reports, RunReport):
            return json.dumps(reports.to_dict(), indent=2)
        return json.dumps({"reports": [r.to_dict() for r in reports]}, indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(csv_rows(reports))
        return buf.getvalue()
    if fmt == "plotdata":
        return json.dumps({"x_label": "SF", "y_label": "mean_ms", "series": plot_series(reports)}, indent=2)
    raise ConfigError(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")


def emit_report(reports: RunReport | Sequence[RunReport], fmt: str, path: str | Path) -> Path:
    text = render_report(reports, fmt)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def load_report(path: str | Path) -> RunReport | list[RunReport]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if "reports" in data:
        return [RunReport.from_dict(r) for r in data["reports"]]
    return RunReport.from_dict(data)
