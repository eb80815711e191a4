"""Pretrained word vectors and cosine word distances."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

logger = logging.getLogger(__name__)


class EmbeddingLoadError(ValueError):
    """Raised when an embedding file cannot be parsed."""


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable word -> vector map with a cached norm per row."""

    vocab: Mapping[str, int]
    vectors: np.ndarray
    norms: np.ndarray = field(init=False, repr=False)
    unit: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64, order="C", copy=True)
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise ValueError("vectors must be a 2-d array with at least one column")
        if len(self.vocab) != vectors.shape[0]:
            raise ValueError(f"{len(self.vocab)} vocab entries for {vectors.shape[0]} rows")
        if sorted(self.vocab.values()) != list(range(vectors.shape[0])):
            raise ValueError("vocab must map onto rows 0..n-1 exactly once")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(norms <= 0):
            bad = [w for w, i in self.vocab.items() if norms[i] <= 0]
            raise ValueError(f"zero vector for {bad[:5]}")
        vectors.setflags(write=False)
        unit = vectors / norms[:, None]
        unit.setflags(write=False)
        norms.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "unit", unit)

    @classmethod
    def from_dict(cls, words: Mapping[str, Iterable[float]]) -> "EmbeddingTable":
        vocab = {w: i for i, w in enumerate(words)}
        return cls(vocab, np.array([list(v) for v in words.values()], dtype=np.float64))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.vocab)

    def __contains__(self, word):
        return word in self.vocab

    def index(self, word: str) -> int:
        try:
            return self.vocab[word]
        except KeyError:
            raise KeyError(f"word not in embedding vocabulary: {word!r}") from None

    def unit_rows(self, words: Iterable[str]) -> np.ndarray:
        """Unit-normalized vectors for ``words``, stacked in order."""
        return self.unit[[self.index(w) for w in words]]


def load_embeddings(path, restrict_vocab=None) -> EmbeddingTable:
    """Read a text embedding file, one ``word v1 ... vd`` entry per line.

    Only words in ``restrict_vocab`` are kept when it is given. Duplicate
    words keep their first occurrence. Line numbers in errors are 1-based.
    """
    path = Path(path)
    keep = None if restrict_vocab is None else set(restrict_vocab)
    vocab: dict[str, int] = {}
    rows: list[np.ndarray] = []
    dim = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            word, values = parts[0], parts[1:]
            if dim is None:
                if not values:
                    raise EmbeddingLoadError(f"{path}:{lineno}: no vector components")
                dim = len(values)
            if len(values) != dim:
                raise EmbeddingLoadError(
                    f"{path}:{lineno}: expected {dim} components, found {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingLoadError(f"{path}:{lineno}: {exc}") from None
            if not np.all(np.isfinite(vec)):
                raise EmbeddingLoadError(f"{path}:{lineno}: non-finite component")
            if not np.any(vec):
                raise EmbeddingLoadError(f"{path}:{lineno}: zero vector for {word!r}")
            if word in vocab or (keep is not None and word not in keep):
                continue
            vocab[word] = len(rows)
            rows.append(vec)
    if not rows:
        raise EmbeddingLoadError(f"{path}: no usable embeddings (empty file or no overlap with vocabulary)")
    logger.info("loaded %d vectors of dim %d from %s", len(rows), dim, path)
    return EmbeddingTable(vocab, np.vstack(rows))


def word_distance(table: EmbeddingTable, u: str, v: str) -> float:
    """Cosine distance ``1 - cos(u, v)``, clipped to [0, 2]."""
    i, j = table.index(u), table.index(v)
    if i == j:
        return 0.0
    d = 1.0 - float(table.unit[i] @ table.unit[j])
    return min(max(d, 0.0), 2.0)


def distance_matrix(table: EmbeddingTable, left, right) -> np.ndarray:
    """Cosine distances between every word in ``left`` and every word in ``right``."""
    li = np.array([table.index(w) for w in left], dtype=np.intp)
    ri = np.array([table.index(w) for w in right], dtype=np.intp)
    d = np.clip(1.0 - table.unit[li] @ table.unit[ri].T, 0.0, 2.0)
    d[li[:, None] == ri[None, :]] = 0.0
    return d
