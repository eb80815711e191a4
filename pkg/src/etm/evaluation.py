"""NMI against gold labels and top-word export for manual coherence rating."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .inference import TopicEstimates, top_words


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # clusters x classes
    clusters: tuple
    classes: tuple

    @classmethod
    def build(cls, pred: Sequence, gold: Sequence) -> "ContingencyTable":
        clusters = tuple(sorted(set(pred), key=repr))
        classes = tuple(sorted(set(gold), key=repr))
        ci = {c: i for i, c in enumerate(clusters)}
        gi = {g: i for i, g in enumerate(classes)}
        counts = np.zeros((len(clusters), len(classes)), dtype=np.int64)
        for p, g in zip(pred, gold):
            counts[ci[p], gi[g]] += 1
        return cls(counts, clusters, classes)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def row_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def _entropy(marginals: np.ndarray, n: int) -> float:
    p = marginals[marginals > 0] / n
    return float(-(p * np.log(p)).sum())


def _aligned(pred, gold):
    if isinstance(pred, Mapping) or isinstance(gold, Mapping):
        if not (isinstance(pred, Mapping) and isinstance(gold, Mapping)):
            raise TypeError("pass two mappings or two sequences")
        if set(pred) != set(gold):
            raise ValueError("pred and gold cover different text ids")
        keys = sorted(pred)
        return [pred[k] for k in keys], [gold[k] for k in keys]
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predictions for {len(gold)} gold labels")
    return list(pred), list(gold)


def nmi(pred, gold) -> float:
    """Mutual information normalized by the geometric mean of the two entropies.

    Accepts two sequences aligned by position or two mappings keyed by text id.
    When either partition has zero entropy the result is 1.0 if the
    partitions coincide and 0.0 otherwise.
    """
    pred, gold = _aligned(pred, gold)
    if not pred:
        raise ValueError("no texts to evaluate")
    table = ContingencyTable.build(pred, gold)
    n = table.n
    h_pred = _entropy(table.row_marginals, n)
    h_gold = _entropy(table.col_marginals, n)
    if h_pred == 0.0 or h_gold == 0.0:
        same = table.counts.shape[0] == table.counts.shape[1] and np.count_nonzero(table.counts) == table.counts.shape[0]
        return 1.0 if same else 0.0
    nz = table.counts > 0
    joint = table.counts[nz] / n
    outer = np.outer(table.row_marginals, table.col_marginals)[nz] / (n * n)
    mi = float((joint * (np.log(joint) - np.log(outer))).sum())
    return min(max(mi / math.sqrt(h_pred * h_gold), 0.0), 1.0)


def export_topics(estimates: TopicEstimates, out, n_words: int = 10, vocabulary=None) -> Path:
    """Write one line per topic: id, then ``word:phi`` pairs, tab-separated."""
    vocab = vocabulary if vocabulary is not None else estimates.vocabulary
    index = {w: i for i, w in enumerate(vocab)}
    out = Path(out)
    with out.open("w", encoding="utf-8") as fh:
        for k in range(estimates.K):
            words = top_words(estimates, k, n_words, vocab)
            cells = [f"{w}:{estimates.phi[k, index[w]]:.6g}" for w in words]
            fh.write("\t".join([str(k), *cells]) + "\n")
    return out


def read_topics(path) -> dict[int, list[str]]:
    topics = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            k, *cells = line.rstrip("\n").split("\t")
            topics[int(k)] = [c.rsplit(":", 1)[0] for c in cells]
    return topics
