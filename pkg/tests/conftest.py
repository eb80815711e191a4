import numpy as np
import pytest

from etm.corpus import Corpus, ShortText
from etm.embeddings import EmbeddingTable

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Collect one pass/fail line per acceptance criterion for the terminal summary."""

    def record(name, passed, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}".rstrip())
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def write_embeddings(tmp_path):
    def write(lines, name="emb.txt"):
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write


@pytest.fixture
def plane_table():
    """Four words on the unit circle plus one pointing elsewhere."""
    return EmbeddingTable.from_dict(
        {
            "east": [1.0, 0.0, 0.0],
            "north": [0.0, 1.0, 0.0],
            "west": [-1.0, 0.0, 0.0],
            "northeast": [1.0, 1.0, 0.0],
            "up": [0.0, 0.0, 1.0],
        }
    )


def make_corpus(docs, vocabulary, labels=None):
    """Corpus straight from token-id lists, bypassing preprocessing."""
    texts = tuple(
        ShortText(i, tuple(d), None if labels is None else labels[i], i + 1) for i, d in enumerate(docs)
    )
    return Corpus(texts, tuple(vocabulary))


def random_table(rng, words, dim=2):
    vecs = rng.standard_normal((len(words), dim))
    vecs[np.linalg.norm(vecs, axis=1) < 1e-6] += 1.0
    return EmbeddingTable({w: i for i, w in enumerate(words)}, vecs)
