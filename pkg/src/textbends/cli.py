"""Command-line entry point: generate, ingest, export, run, sweep, report, verify.

Exit codes: 0 success, 1 usage error, 2 data/integrity error,
3 nondeterminism or executor disagreement.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bench, engine
from .errors import (
    ConfigError,
    DomainError,
    IntegrityError,
    NondeterminismError,
    QueryValidationError,
)
from .gencorpus import (
    CorpusManifest,
    GeneratorConfig,
    export_snowflake,
    generate,
    ingest_jsonl,
    load_snowflake,
    manifest_path,
    read_manifest,
    write_jsonl,
    write_manifest,
)
from .model import TOKENIZER_MODES, Corpus
from .weighting import SCHEMES, WeightParams
from .workload import STANDARD_PARAMS, ParamFile, build_workload

log = logging.getLogger("textbends")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONDETERMINISM = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _float_list(value: str) -> list[float]:
    try:
        return [float(v) for v in _csv_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {value!r}") from None


# -- shared helpers -------------------------------------------------------------------


def load_corpus(path: str | Path, K: float = 0.5) -> tuple[Corpus, dict | None]:
    """Load a JSONL corpus (or a snowflake export directory) plus its manifest if present."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus not found: {path}")
    if path.is_dir():
        corpus = load_snowflake(path, K=K)
        return corpus, CorpusManifest.for_corpus(corpus).to_dict()
    corpus = ingest_jsonl(path, K=K)
    mpath = manifest_path(path)
    if mpath.exists():
        manifest = read_manifest(mpath)
        if manifest.checksum != corpus.checksum():
            raise IntegrityError(f"{path}: checksum does not match {mpath.name}")
        return corpus, manifest.to_dict()
    return corpus, CorpusManifest.for_corpus(corpus).to_dict()


def _weights(args) -> WeightParams:
    return WeightParams(K=args.K, k1=args.k1, b=args.b, doc_length=args.doc_length)


def _workload(args):
    params = ParamFile.load(args.params) if args.params else STANDARD_PARAMS
    k = args.k
    if params.k is not None:
        if args.k is not None and args.k != params.k:
            log.warning("--k %s overridden by k=%s from %s", args.k, params.k, args.params)
        k = params.k
    specs = build_workload(params, schemes=args.schemes, k=k, weights=_weights(args))
    return params, specs


def _add_weight_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", help="ParamFile JSON (default: the benchmark's standard parameter values)")
    p.add_argument("--schemes", type=_csv_list, default=list(SCHEMES), help="comma list of tfidf,bm25")
    p.add_argument("--k", type=int, default=None, help="top-k cut (default 10)")
    p.add_argument("--K", type=float, default=0.5, help="augmented-TF floor")
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--doc-length", choices=("tokens", "distinct"), default="tokens")


def _add_protocol_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--engines", type=_csv_list, default=["columnar", "mapreduce"])
    p.add_argument("--warm-runs", type=int, default=10)
    p.add_argument("--cold-runs", type=int, default=1)


def _protocol(args) -> bench.ProtocolConfig:
    return bench.ProtocolConfig(
        warm_runs=args.warm_runs, cold_runs=args.cold_runs, engines=tuple(args.engines)
    )


def _generator_config(args, sf: float) -> GeneratorConfig:
    kwargs = {"sf": sf, "seed": args.seed}
    if args.docs_per_sf is not None:
        kwargs["docs_per_unit_sf"] = args.docs_per_sf
    if args.vocab is not None:
        kwargs["vocab_size"] = args.vocab
    if args.guaranteed_terms is not None:
        kwargs["guaranteed_terms"] = tuple(args.guaranteed_terms)
    return GeneratorConfig(**kwargs)


def _add_generator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--docs-per-sf", type=int, default=None, help="documents at SF=1 (default 1,000,000)")
    p.add_argument("--vocab", type=int, default=None, help="vocabulary size (default 5000)")
    p.add_argument("--guaranteed-terms", type=_csv_list, default=None,
                   help="terms kept in >= 0.1%% of documents (default think,today,friday)")


# -- subcommands ----------------------------------------------------------------------


def cmd_generate(args) -> int:
    corpus, manifest = generate(_generator_config(args, args.sf))
    out = write_jsonl(corpus, args.out)
    mpath = write_manifest(manifest, manifest_path(out))
    print(f"wrote {manifest.document_count} documents to {out} (manifest {mpath}, checksum {manifest.checksum[:12]})")
    return EXIT_OK


def cmd_ingest(args) -> int:
    corpus = ingest_jsonl(args.input, tokenizer_mode=args.tokenizer, K=args.K)
    out = write_jsonl(corpus, args.out)
    manifest = CorpusManifest.for_corpus(corpus)
    write_manifest(manifest, manifest_path(out))
    print(f"ingested {corpus.n_docs} documents ({corpus.n_words} lemmas) into {out}")
    return EXIT_OK


def cmd_export(args) -> int:
    corpus, _ = load_corpus(args.corpus)
    paths = export_snowflake(corpus, args.out_dir)
    print(f"wrote {len(paths)} tables to {args.out_dir}")
    return EXIT_OK


def cmd_run(args) -> int:
    corpus, manifest = load_corpus(args.corpus)
    params, specs = _workload(args)
    report = bench.run_benchmark(corpus, specs, _protocol(args), manifest)
    report.params["param_file"] = params.to_dict()
    report.params["corpus"] = str(args.corpus)
    bench.emit_report(report, "json", args.out)
    for r in report.results:
        print(f"{r.query_id:4s} {r.scheme:5s} {r.gender:6s} {r.engine:9s} "
              f"mean={r.mean_ms:9.3f}ms sd={r.stddev_ms:8.3f} S={r.selectivity} C={r.complexity} {r.status}")
    if not report.ok:
        return EXIT_NONDETERMINISM
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.sf_list:
        raise ConfigError("--sf-list needs at least one scale factor")
    params, specs = _workload(args)
    reports = bench.sweep_scale(_generator_config(args, args.sf_list[0]), args.sf_list, specs,
                                _protocol(args), cache_dir=args.cache_dir)
    for report in reports:
        report.params["param_file"] = params.to_dict()
    bench.emit_report(reports, "json", args.out)
    for problem in bench.scaling_violations(reports):
        print(f"soft check: {problem}")
    print(f"wrote {len(reports)} reports to {args.out}")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_NONDETERMINISM


def cmd_report(args) -> int:
    reports = bench.load_report(args.input)
    out = bench.emit_report(reports, args.format, args.out)
    print(f"wrote {args.format} report to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    corpus, _ = load_corpus(args.corpus)
    _, specs = _workload(args)
    outcome = engine.verify(corpus, specs, max_docs=args.max_docs)
    failures = 0
    for spec, problem in outcome:
        if problem:
            failures += 1
            print(f"FAIL {spec.label}: {problem}")
        else:
            print(f"PASS {spec.label}")
    print(f"{len(outcome) - failures}/{len(outcome)} specs agree")
    return EXIT_NONDETERMINISM if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="textbends", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="generate a synthetic corpus")
    p.add_argument("--sf", type=float, required=True)
    p.add_argument("--out", required=True)
    _add_generator_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="load an external JSONL corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tokenizer", choices=TOKENIZER_MODES, default="pretokenized")
    p.add_argument("--K", type=float, default=0.5)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("export", help="write the snowflake tables as CSV")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("run", help="run the workload under the benchmark protocol")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    _add_weight_flags(p)
    _add_protocol_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="generate corpora for several scale factors and run each")
    p.add_argument("--sf-list", type=_float_list, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cache-dir", default=None)
    _add_generator_flags(p)
    _add_weight_flags(p)
    _add_protocol_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="convert a JSON report to json, csv or plotdata")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=bench.REPORT_FORMATS, default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify", help="check columnar, map/reduce and oracle executors agree")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-docs", type=int, default=engine.MAX_ORACLE_DOCS)
    _add_weight_flags(p)
    p.set_defaults(func=cmd_verify)
    return parser


def _configure_logging() -> None:
    level = os.environ.get("TEXTBENDS_LOG", "error").upper()
    if level not in ("ERROR", "INFO", "DEBUG"):
        level = "ERROR"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NondeterminismError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONDETERMINISM
    except (ConfigError, QueryValidationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrityError, DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
