import pytest

from textbends.gencorpus import GeneratorConfig, generate
from textbends.model import from_nested

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_VERDICTS, key=lambda v: int(v.split()[2])):
            terminalreporter.write_line(line)


def record(doc_id, lemma_text, gender="male", date="2015-09-17T12:00:00", x=30.0, y=0.0, **extra):
    rec = {
        "doc_id": doc_id,
        "raw_text": lemma_text,
        "clean_text": lemma_text,
        "lemma_text": lemma_text,
        "author": {"gender": gender, "age": 30, "firstname": f"f{doc_id}", "lastname": f"l{doc_id}"},
        "time": {"date": date},
        "location": {"x": x, "y": y},
        "tags": [],
        "named_entities": [],
    }
    rec.update(extra)
    return rec


def corpus_of(*texts_and_genders, **kw):
    """Corpus from (text, gender) pairs with doc_ids 1..n."""
    return from_nested([record(i + 1, t, g) for i, (t, g) in enumerate(texts_and_genders)], **kw)


@pytest.fixture
def hand_corpus():
    # d1="a a b" male, d2="b c" male, d3="a" female
    return corpus_of(("a a b", "male"), ("b c", "male"), ("a", "female"))


@pytest.fixture(scope="session")
def small_generated():
    corpus, manifest = generate(GeneratorConfig(sf=0.001, seed=42))
    return corpus, manifest
