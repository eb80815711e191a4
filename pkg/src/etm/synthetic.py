"""Planted short-text datasets with class-clustered word embeddings."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .embeddings import EmbeddingTable
from .inference import ModelParams, generate_synthetic


@dataclass(frozen=True)
class PlantedShortTexts:
    corpus: Corpus
    table: EmbeddingTable
    labels: list[int]
    phi: np.ndarray


def planted_phi(K: int, words_per_topic: int, leak: float = 0.0, zipf: float = 0.0) -> np.ndarray:
    """Block-structured topics: topic k owns words ``k*words_per_topic`` onwards.

    ``1 - leak`` of each topic's mass sits on its own block, weighted by
    rank ``r`` as ``r**-zipf``; ``leak`` is spread uniformly over all words.
    """
    V = K * words_per_topic
    block = np.arange(1, words_per_topic + 1, dtype=np.float64) ** -zipf
    block /= block.sum()
    phi = np.full((K, V), leak / V)
    for k in range(K):
        phi[k, k * words_per_topic:(k + 1) * words_per_topic] += (1.0 - leak) * block
    return phi


def clustered_embeddings(vocabulary, K: int, words_per_topic: int, dim: int = 50,
                         spread: float = 0.5, seed: int = 0) -> EmbeddingTable:
    """One random direction per topic; each word is its topic's direction plus noise."""
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((K, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    noise = rng.standard_normal((len(vocabulary), dim)) * spread / np.sqrt(dim)
    owner = np.arange(len(vocabulary)) // words_per_topic
    return EmbeddingTable({w: i for i, w in enumerate(vocabulary)}, centers[owner] + noise)


def planted_short_texts(n: int = 1000, K: int = 5, words_per_topic: int = 100,
                        max_len: int = 10, min_len: int = 3, dominance: float = 0.9,
                        dim: int = 50, spread: float = 0.5, seed: int = 0) -> PlantedShortTexts:
    """Short texts drawn from one dominant class topic each.

    Text ``i`` has class ``i % K``; its topic mixture puts ``dominance`` on that
    class and spreads the rest evenly over the other topics.
    """
    rng = np.random.default_rng(seed)
    phi = planted_phi(K, words_per_topic)
    labels = [i % K for i in range(n)]
    theta = np.full((n, K), (1.0 - dominance) / max(K - 1, 1))
    theta[np.arange(n), labels] = dominance if K > 1 else 1.0
    lengths = rng.integers(min_len, max_len + 1, size=n)
    _, corpus = generate_synthetic(ModelParams(K=K), n, lengths.tolist(), phi, theta, seed=seed + 1)
    table = clustered_embeddings(corpus.vocabulary, K, words_per_topic, dim, spread, seed + 2)
    return PlantedShortTexts(corpus, table, labels, phi)


def write_dataset(data: PlantedShortTexts, out_dir) -> dict[str, Path]:
    """Write corpus.txt, labels.txt, embeddings.txt and an empty stopwords.txt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / f"{name}.txt" for name in ("corpus", "labels", "embeddings", "stopwords")}
    paths["corpus"].write_text("\n".join(data.corpus.as_lines()) + "\n", encoding="utf-8")
    paths["labels"].write_text("\n".join(map(str, data.labels)) + "\n", encoding="utf-8")
    with paths["embeddings"].open("w", encoding="utf-8") as fh:
        for w, i in data.table.vocab.items():
            fh.write(w + " " + " ".join(repr(float(x)) for x in data.table.vectors[i]) + "\n")
    paths["stopwords"].write_text("", encoding="utf-8")
    return paths
