import json
import subprocess
import sys

import pytest

from textbends.cli import main
from textbends.gencorpus import ingest_jsonl
from textbends.workload import STANDARD_PARAMS


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "c.jsonl"
    assert main(["generate", "--sf", "0.001", "--seed", "42", "--out", str(out)]) == 0
    return out


def test_generate_writes_corpus_and_manifest(corpus_file):
    manifest = json.loads(corpus_file.with_name("c.manifest.json").read_text())
    assert manifest["document_count"] == 1000
    assert len(corpus_file.read_text().splitlines()) == 1000


def test_generate_is_repeatable(corpus_file, tmp_path):
    again = tmp_path / "c.jsonl"
    assert main(["generate", "--sf", "0.001", "--seed", "42", "--out", str(again)]) == 0
    assert again.read_bytes() == corpus_file.read_bytes()
    assert again.with_name("c.manifest.json").read_bytes() == corpus_file.with_name("c.manifest.json").read_bytes()


@pytest.mark.parametrize("sf", ["0", "-1", "abc"])
def test_bad_scale_factor_exits_1(sf, tmp_path):
    assert_exit(["generate", "--sf", sf, "--out", str(tmp_path / "x.jsonl")], 1)


def assert_exit(argv, code):
    try:
        rc = main(argv)
    except SystemExit as exc:
        rc = exc.code
    assert rc == code


def test_usage_errors_exit_1():
    assert_exit([], 1)
    assert_exit(["run"], 1)
    assert_exit(["frobnicate"], 1)


def test_run_writes_report(corpus_file, tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", "--corpus", str(corpus_file), "--warm-runs", "2", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["results"]) == 64
    assert data["protocol"]["warm_runs"] == 2
    assert data["params"]["param_file"]["pWords"] == ["think", "today", "friday"]
    assert data["manifest"]["document_count"] == 1000


def test_run_default_warm_runs_is_ten(corpus_file, tmp_path):
    out = tmp_path / "r.json"
    argv = ["run", "--corpus", str(corpus_file), "--schemes", "tfidf", "--engines", "columnar", "--out", str(out)]
    assert main(argv) == 0
    assert {len(r["samples_ms"]) for r in json.loads(out.read_text())["results"]} == {10}


def test_run_with_param_file(corpus_file, tmp_path):
    params = STANDARD_PARAMS.to_dict() | {"pGender": ["female"], "k": 3}
    pfile = tmp_path / "p.json"
    pfile.write_text(json.dumps(params))
    out = tmp_path / "r.json"
    argv = ["run", "--corpus", str(corpus_file), "--params", str(pfile), "--k", "5",
            "--warm-runs", "1", "--engines", "columnar", "--out", str(out)]
    assert main(argv) == 0
    results = json.loads(out.read_text())["results"]
    assert len(results) == 16
    assert {r["k"] for r in results} == {3}


def test_missing_corpus_exits_2(tmp_path):
    assert_exit(["run", "--corpus", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "r.json")], 2)


def test_tampered_corpus_exits_2(corpus_file, tmp_path):
    bad = tmp_path / "c.jsonl"
    lines = corpus_file.read_text().splitlines()
    bad.write_text("\n".join(lines[:-1]) + "\n")
    bad.with_name("c.manifest.json").write_text(corpus_file.with_name("c.manifest.json").read_text())
    assert_exit(["verify", "--corpus", str(bad)], 2)


def test_bad_param_file_exits_1(corpus_file, tmp_path):
    pfile = tmp_path / "p.json"
    pfile.write_text(json.dumps({"pGender": ["male"], "pStartDate": "2015-09-18", "pEndDate": "2015-09-17"}))
    assert_exit(["verify", "--corpus", str(corpus_file), "--params", str(pfile)], 1)


def test_verify_passes_all_specs(corpus_file, capsys):
    assert main(["verify", "--corpus", str(corpus_file)]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 32 and "FAIL" not in out


def test_verify_empty_corpus_is_vacuous_pass(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["verify", "--corpus", str(empty)]) == 0
    assert capsys.readouterr().out.count("PASS") == 32


def test_verify_over_guard_exits_1(corpus_file):
    assert_exit(["verify", "--corpus", str(corpus_file), "--max-docs", "999"], 1)


def test_verify_failure_exits_3(corpus_file, monkeypatch, capsys):
    import textbends.engine.oracle as oracle

    real = oracle.execute_oracle

    def off_by_a_bit(corpus, spec, max_docs=oracle.MAX_ORACLE_DOCS):
        r = real(corpus, spec, max_docs)
        if spec.query_id == "Q2":
            r = type(r)(r.task, tuple((k, v * 1.001) for k, v in r.entries), r.total_matching, r.matched_rows)
        return r

    monkeypatch.setattr("textbends.engine.execute_oracle", off_by_a_bit)
    assert main(["verify", "--corpus", str(corpus_file)]) == 3
    out = capsys.readouterr().out
    assert "FAIL Q2/tfidf/male" in out and out.count("FAIL") == 4


def test_report_formats(corpus_file, tmp_path):
    rjson = tmp_path / "r.json"
    main(["run", "--corpus", str(corpus_file), "--warm-runs", "1", "--out", str(rjson)])
    for fmt in ("json", "csv", "plotdata"):
        assert main(["report", "--input", str(rjson), "--format", fmt, "--out", str(tmp_path / f"o.{fmt}")]) == 0
    assert len((tmp_path / "o.csv").read_text().splitlines()) == 65
    assert_exit(["report", "--input", str(rjson), "--format", "xml", "--out", str(tmp_path / "o.xml")], 1)


def test_ingest_and_export(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text(json.dumps({
        "doc_id": 5, "lemma_text": "Think Friday think",
        "author": {"gender": "female"}, "time": {"date": "2015-09-17T10:00:00"},
        "location": {"x": 30, "y": 0},
    }) + "\n")
    out = tmp_path / "out.jsonl"
    assert main(["ingest", "--input", str(src), "--out", str(out), "--tokenizer", "whitespace_lower"]) == 0
    corpus = ingest_jsonl(out)
    assert sorted(corpus.lemmas) == ["friday", "think"]
    assert main(["export", "--corpus", str(out), "--out-dir", str(tmp_path / "snow")]) == 0
    assert len(list((tmp_path / "snow").glob("*.csv"))) == 9
    assert main(["verify", "--corpus", str(tmp_path / "snow")]) == 0


def test_sweep(tmp_path):
    out = tmp_path / "s.json"
    argv = ["sweep", "--sf-list", "0.0005,0.001", "--schemes", "tfidf", "--warm-runs", "1",
            "--cache-dir", str(tmp_path / "cache"), "--out", str(out)]
    assert main(argv) == 0
    reports = json.loads(out.read_text())["reports"]
    assert [r["manifest"]["document_count"] for r in reports] == [500, 1000]
    assert_exit(["sweep", "--sf-list", "0.001,0.0005", "--out", str(out)], 1)


def test_console_entry_point(tmp_path):
    out = tmp_path / "c.jsonl"
    proc = subprocess.run([sys.executable, "-m", "textbends", "generate", "--sf", "0.0001", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(out.read_text().splitlines()) == 100
