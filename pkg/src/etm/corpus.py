"""Short-text ingestion: cleaning, vocabulary building and nBOW vectors."""
from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

_NON_LATIN = re.compile(r"[^a-z0-9\s]")


class EmptyCorpusError(ValueError):
    """Every document was emptied by preprocessing."""


@dataclass(frozen=True)
class ShortText:
    id: int
    tokens: tuple[int, ...]
    gold_label: int | None = None
    source_line: int | None = None  # 1-based line in the raw input


@dataclass(frozen=True)
class Corpus:
    texts: tuple[ShortText, ...]
    vocabulary: tuple[str, ...]
    dropped_lines: tuple[int, ...] = ()
    word_to_id: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "word_to_id", {w: i for i, w in enumerate(self.vocabulary)})
        if len(self.word_to_id) != len(self.vocabulary):
            raise ValueError("duplicate vocabulary entries")
        V = len(self.vocabulary)
        for pos, text in enumerate(self.texts):
            if text.id != pos:
                raise ValueError(f"text at position {pos} has id {text.id}")
            if not text.tokens:
                raise ValueError(f"text {pos} is empty")
            if any(t < 0 or t >= V for t in text.tokens):
                raise ValueError(f"text {pos} has a token id outside 0..{V - 1}")

    @property
    def n(self) -> int:
        return len(self.texts)

    @property
    def V(self) -> int:
        return len(self.vocabulary)

    def __len__(self):
        return len(self.texts)

    def words(self, text_id: int) -> list[str]:
        return [self.vocabulary[t] for t in self.texts[text_id].tokens]

    def gold_labels(self) -> list[int] | None:
        labels = [t.gold_label for t in self.texts]
        return None if any(lab is None for lab in labels) else labels

    def as_lines(self) -> list[str]:
        """Tokenized texts joined by spaces, one per document."""
        return [" ".join(self.words(i)) for i in range(self.n)]

    def term_frequencies(self) -> Counter:
        freq: Counter = Counter()
        for text in self.texts:
            freq.update(text.tokens)
        return freq


@dataclass(frozen=True)
class NBowVector:
    """Normalized bag of words: token id -> share of the text's tokens."""

    weights: dict[int, float]
    vocabulary: tuple[str, ...] = field(repr=False, compare=False)

    def __len__(self):
        return len(self.weights)

    def words(self) -> list[str]:
        return [self.vocabulary[t] for t in self.weights]


def clean(line: str) -> list[str]:
    """Lowercase, drop characters outside ``[a-z0-9]`` and whitespace, split."""
    return _NON_LATIN.sub("", line.lower()).split()


def preprocess(
    raw_lines: Sequence[str],
    stopwords: Iterable[str] = (),
    min_len: int = 3,
    max_len: int = 20,
    min_freq: int = 3,
    labels: Sequence[int] | None = None,
) -> Corpus:
    if not raw_lines:
        raise ValueError("no input lines")
    if labels is not None and len(labels) != len(raw_lines):
        raise ValueError(f"{len(labels)} labels for {len(raw_lines)} lines")
    stop = {w.lower() for w in stopwords}
    docs = [
        [w for w in clean(line) if w not in stop and min_len <= len(w) <= max_len]
        for line in raw_lines
    ]
    # term frequency, counted once over the whole corpus
    freq = Counter(w for doc in docs for w in doc)
    docs = [[w for w in doc if freq[w] >= min_freq] for doc in docs]

    word_to_id: dict[str, int] = {}
    texts: list[ShortText] = []
    dropped: list[int] = []
    for lineno, doc in enumerate(docs, start=1):
        if not doc:
            dropped.append(lineno)
            continue
        ids = tuple(word_to_id.setdefault(w, len(word_to_id)) for w in doc)
        label = None if labels is None else int(labels[lineno - 1])
        texts.append(ShortText(len(texts), ids, label, lineno))
    if not texts:
        raise EmptyCorpusError("empty corpus: every document is empty after preprocessing")
    if dropped:
        logger.warning(
            "dropped %d empty document(s) at line(s) %s",
            len(dropped),
            ", ".join(map(str, dropped[:20])) + (" ..." if len(dropped) > 20 else ""),
        )
    return Corpus(tuple(texts), tuple(word_to_id), tuple(dropped))


def nbow(corpus: Corpus, text_id: int) -> NBowVector:
    if not 0 <= text_id < corpus.n:
        raise IndexError(f"text id {text_id} outside 0..{corpus.n - 1}")
    tokens = corpus.texts[text_id].tokens
    counts = Counter(tokens)
    total = len(tokens)
    return NBowVector({t: c / total for t, c in counts.items()}, corpus.vocabulary)


def read_lines(path) -> list[str]:
    with Path(path).open(encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def read_labels(path) -> list[int]:
    labels = []
    for lineno, line in enumerate(read_lines(path), start=1):
        try:
            labels.append(int(line.strip()))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: label is not an integer: {line!r}") from None
    return labels


def read_stopwords(path) -> set[str]:
    return {w for line in read_lines(path) for w in line.lower().split()}


def save_corpus(corpus: Corpus, path) -> None:
    payload = {
        "vocabulary": list(corpus.vocabulary),
        "dropped_lines": list(corpus.dropped_lines),
        "texts": [
            {"tokens": list(t.tokens), "gold_label": t.gold_label, "source_line": t.source_line}
            for t in corpus.texts
        ],
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"))
        fh.write("\n")


def load_corpus(path) -> Corpus:
    with Path(path).open(encoding="utf-8") as fh:
        payload = json.load(fh)
    texts = tuple(
        ShortText(i, tuple(t["tokens"]), t.get("gold_label"), t.get("source_line"))
        for i, t in enumerate(payload["texts"])
    )
    return Corpus(texts, tuple(payload["vocabulary"]), tuple(payload.get("dropped_lines", ())))
