"""End-to-end run: cluster short texts, fit topics, label every short text."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .clustering import PseudoTextSet, cluster_distances, default_L, exact_distance_matrix, relaxed_distance_matrix
from .corpus import Corpus
from .embeddings import EmbeddingTable
from .evaluation import nmi
from .inference import (
    ModelParams,
    TopicEstimates,
    TopicModelState,
    assign_short_text,
    build_neighbors,
    estimate,
    run_gibbs,
)

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    pseudo_texts: PseudoTextSet
    state: TopicModelState
    estimates: TopicEstimates
    predictions: list[int]


def distances_for(corpus: Corpus, table: EmbeddingTable, exact: bool = False) -> np.ndarray:
    return (exact_distance_matrix if exact else relaxed_distance_matrix)(corpus, table)


def fit(
    corpus: Corpus,
    table: EmbeddingTable,
    params: ModelParams,
    L: int | None = None,
    cluster_max_iters: int = 100,
    distances: np.ndarray | None = None,
    backend: str | None = None,
) -> RunResult:
    L = default_L(corpus.n) if L is None else L
    if distances is None:
        distances = distances_for(corpus, table)
    pseudo = cluster_distances(distances, L, cluster_max_iters, params.seed)
    neighbors = build_neighbors(pseudo, corpus, table, params.corr_threshold)
    state = run_gibbs(pseudo, corpus, neighbors, params, backend=backend)
    est = estimate(state, params, corpus.vocabulary)
    preds = [assign_short_text(t, est)[0] for t in corpus.texts]
    return RunResult(pseudo, state, est, preds)


def nmi_over_runs(corpus: Corpus, table: EmbeddingTable, params: ModelParams, runs: int,
                  L: int | None = None, cluster_max_iters: int = 100,
                  exact: bool = False) -> list[float]:
    """NMI of ``runs`` independent end-to-end fits seeded ``seed, seed+1, ...``."""
    gold = corpus.gold_labels()
    if gold is None:
        raise ValueError("corpus has no gold labels")
    distances = distances_for(corpus, table, exact)
    scores = []
    for r in range(runs):
        run_params = replace(params, seed=params.seed + r)
        result = fit(corpus, table, run_params, L, cluster_max_iters, distances)
        scores.append(nmi(result.predictions, gold))
        logger.info("run %d (seed %d): NMI %.4f", r + 1, run_params.seed, scores[-1])
    return scores
