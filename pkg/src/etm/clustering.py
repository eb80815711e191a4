"""Aggregate short texts into pseudo-texts by average-distance reassignment."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .corpus import Corpus, nbow
from .distance import DistanceUndefinedError, wmd_exact
from .embeddings import EmbeddingTable

logger = logging.getLogger(__name__)

# cosine-distance maximum; used when a text has no embedded token
MISSING_DISTANCE = 2.0


@dataclass(frozen=True)
class PseudoTextSet:
    assignment: tuple[int, ...]
    L: int

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be positive")
        bad = [p for p in self.assignment if not 0 <= p < self.L]
        if bad:
            raise ValueError(f"pseudo-text id {bad[0]} outside 0..{self.L - 1}")

    @property
    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.L)]
        for text_id, p in enumerate(self.assignment):
            out[p].append(text_id)
        return out

    def __len__(self):
        return len(self.assignment)


def default_L(n: int) -> int:
    """One pseudo-text per 50 short texts, at least one."""
    if n < 1:
        raise ValueError("n must be positive")
    return max(1, n // 50)


def score(text_id: int, pseudo_id: int, distances: np.ndarray, members) -> float:
    """Mean distance from ``text_id`` to the other members of ``pseudo_id``.

    Returns ``inf`` when no other member exists.
    """
    others = [u for u in members[pseudo_id] if u != text_id]
    if not others:
        return float("inf")
    return float(np.mean(distances[text_id, others]))


def relaxed_distance_matrix(
    corpus: Corpus, table: EmbeddingTable, missing: float = MISSING_DISTANCE
) -> np.ndarray:
    """All-pairs symmetric relaxed WMD.

    Equivalent to calling ``symmetric_relaxed`` on every pair, but computed
    one row at a time against the stacked tokens of every text.
    """
    n = corpus.n
    ids_per_text, weights_per_text = [], []
    for i in range(n):
        w = nbow(corpus, i).weights
        ids = sorted(t for t in w if corpus.vocabulary[t] in table)
        r = np.array([w[t] for t in ids], dtype=np.float64)
        ids_per_text.append(ids)
        weights_per_text.append(r / r.sum() if ids else r)
    has = np.array([len(ids) > 0 for ids in ids_per_text])
    emb_row = {t: table.index(w) for t, w in enumerate(corpus.vocabulary) if w in table}

    out = np.full((n, n), float(missing))
    live = np.flatnonzero(has)
    if live.size:
        rows = np.concatenate([[emb_row[t] for t in ids_per_text[i]] for i in live]).astype(np.intp)
        weights = np.concatenate([weights_per_text[i] for i in live])
        lengths = np.array([len(ids_per_text[i]) for i in live])
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
        unit = table.unit[rows]
        for a, i in enumerate(live):
            seg = slice(starts[a], starts[a] + lengths[a])
            d = np.clip(1.0 - unit[seg] @ unit.T, 0.0, 2.0)
            d[rows[seg][:, None] == rows[None, :]] = 0.0
            # i -> j: each word of i to its nearest word of j
            fwd = weights[seg] @ np.minimum.reduceat(d, starts, axis=1)
            # j -> i: each word of j to its nearest word of i
            bwd = np.add.reduceat(weights * d.min(axis=0), starts)
            out[i, live] = np.maximum(fwd, bwd)
    np.fill_diagonal(out, 0.0)
    return out


def exact_distance_matrix(
    corpus: Corpus, table: EmbeddingTable, missing: float = MISSING_DISTANCE
) -> np.ndarray:
    n = corpus.n
    vecs = [nbow(corpus, i) for i in range(n)]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            try:
                d = wmd_exact(vecs[i], vecs[j], table)[0]
            except DistanceUndefinedError:
                d = missing
            out[i, j] = out[j, i] = d
    return out


def initial_assignment(n: int, L: int, rng: np.random.Generator) -> np.ndarray:
    """Round-robin over a seeded shuffle: sizes differ by at most one."""
    assignment = np.empty(n, dtype=np.intp)
    assignment[rng.permutation(n)] = np.arange(n) % L
    return assignment


def _score_matrix(distances: np.ndarray, assignment: np.ndarray, L: int) -> np.ndarray:
    n = len(assignment)
    onehot = np.zeros((n, L))
    onehot[np.arange(n), assignment] = 1.0
    sums = distances @ onehot
    counts = np.broadcast_to(onehot.sum(axis=0), (n, L)).copy()
    counts[np.arange(n), assignment] -= 1  # a text never scores against itself
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.where(counts > 0, sums / np.maximum(counts, 1), np.inf)
    return scores


def reassign(distances: np.ndarray, assignment: np.ndarray, L: int) -> np.ndarray:
    """One sweep against memberships frozen at the start of the sweep."""
    return np.argmin(_score_matrix(distances, assignment, L), axis=1)


def total_score(distances: np.ndarray, assignment: np.ndarray, frozen: np.ndarray, L: int) -> float:
    """Sum over texts of their score for ``assignment`` under ``frozen`` memberships."""
    scores = _score_matrix(distances, frozen, L)
    return float(scores[np.arange(len(assignment)), assignment].sum())


def cluster_distances(
    distances: np.ndarray,
    L: int,
    max_iters: int = 100,
    seed: int = 0,
    on_iteration: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
) -> PseudoTextSet:
    """Cluster from a precomputed symmetric distance matrix."""
    n = distances.shape[0]
    if not 1 <= L <= n:
        raise ValueError(f"L must be in 1..{n}, got {L}")
    rng = np.random.default_rng(seed)
    assignment = initial_assignment(n, L, rng)
    for it in range(max_iters):
        new = reassign(distances, assignment, L)
        moved = int((new != assignment).sum())
        if on_iteration is not None:
            on_iteration(it, assignment, new)
        assignment = new
        logger.debug("clustering iteration %d: %d reassigned", it + 1, moved)
        if moved == 0:
            break
    return PseudoTextSet(tuple(int(p) for p in assignment), L)


def cluster(
    corpus: Corpus,
    table: EmbeddingTable,
    L: int,
    max_iters: int = 100,
    seed: int = 0,
    exact: bool = False,
    missing: float = MISSING_DISTANCE,
) -> PseudoTextSet:
    if not 1 <= L <= corpus.n:
        raise ValueError(f"L must be in 1..{corpus.n}, got {L}")
    build = exact_distance_matrix if exact else relaxed_distance_matrix
    return cluster_distances(build(corpus, table, missing), L, max_iters, seed)


def save_assignment(pseudo: PseudoTextSet, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"# L={pseudo.L}\n")
        for text_id, p in enumerate(pseudo.assignment):
            fh.write(f"{text_id}\t{p}\n")


def load_assignment(path) -> PseudoTextSet:
    L = None
    pairs = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# L="):
                L = int(line[4:])
            elif line and not line.startswith("#"):
                t, p = line.split("\t")
                pairs.append((int(t), int(p)))
    pairs.sort()
    if [t for t, _ in pairs] != list(range(len(pairs))):
        raise ValueError(f"{path}: text ids are not 0..n-1")
    assignment = tuple(p for _, p in pairs)
    return PseudoTextSet(assignment, L if L is not None else max(assignment) + 1)
