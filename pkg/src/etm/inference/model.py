"""MRF-regularized LDA over pseudo-texts, fitted by collapsed Gibbs sampling."""
from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..clustering import PseudoTextSet
from ..corpus import Corpus, ShortText
from ..embeddings import EmbeddingTable
from ._backend import get_kernel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelParams:
    K: int
    alpha: float = 0.1
    beta: float = 0.1
    lam: float = 1.0
    corr_threshold: float = 0.4
    iterations: int = 1000
    burn_in: int = 0
    seed: int = 0
    average_samples: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not self.alpha > 0 or not self.beta > 0:
            raise ValueError("alpha and beta must be positive")
        if not self.lam >= 0:
            raise ValueError("lambda must be non-negative")
        if not 0 <= self.corr_threshold <= 2:
            raise ValueError("corr_threshold must lie in [0, 2]")
        if self.iterations < 0 or self.burn_in < 0:
            raise ValueError("iterations and burn_in must be non-negative")


@dataclass(frozen=True)
class TokenLayout:
    """Tokens of every pseudo-text, concatenated in pseudo-text order."""

    words: np.ndarray  # int64, word id per token
    docs: np.ndarray  # int64, pseudo-text id per token
    offsets: np.ndarray  # L + 1 boundaries into words/docs

    @property
    def L(self) -> int:
        return len(self.offsets) - 1

    def position(self, l: int, i: int) -> int:
        start, stop = self.offsets[l], self.offsets[l + 1]
        if not 0 <= i < stop - start:
            raise IndexError(f"token {i} outside pseudo-text {l} of length {stop - start}")
        return int(start + i)


def token_layout(pseudo_texts: PseudoTextSet, corpus: Corpus) -> TokenLayout:
    if len(pseudo_texts) != corpus.n:
        raise ValueError(f"assignment covers {len(pseudo_texts)} texts, corpus has {corpus.n}")
    words, docs, offsets = [], [], [0]
    for l, members in enumerate(pseudo_texts.members):
        for text_id in members:
            toks = corpus.texts[text_id].tokens
            words.extend(toks)
            docs.extend([l] * len(toks))
        offsets.append(len(words))
    return TokenLayout(
        np.array(words, dtype=np.int64), np.array(docs, dtype=np.int64), np.array(offsets, dtype=np.int64)
    )


@dataclass(frozen=True)
class NeighborSets:
    """Correlation graph over token positions, stored as CSR on global positions."""

    layout: TokenLayout
    indptr: np.ndarray
    indices: np.ndarray
    edge_counts: np.ndarray  # |P_l| per pseudo-text

    def degree(self, l: int, i: int) -> int:
        p = self.layout.position(l, i)
        return int(self.indptr[p + 1] - self.indptr[p])

    def of(self, l: int, i: int) -> set[int]:
        """Local positions in pseudo-text ``l`` correlated with position ``i``."""
        p = self.layout.position(l, i)
        start = self.layout.offsets[l]
        return {int(j - start) for j in self.indices[self.indptr[p]:self.indptr[p + 1]]}


def build_neighbors(
    pseudo_texts: PseudoTextSet, corpus: Corpus, table: EmbeddingTable | None, corr_threshold: float
) -> NeighborSets:
    """Connect token positions whose words lie closer than ``corr_threshold``.

    Words without an embedding get no edges. Repeated occurrences of one
    word are connected to each other (distance 0).
    """
    layout = token_layout(pseudo_texts, corpus)
    N = len(layout.words)
    emb_row = np.full(corpus.V, -1, dtype=np.intp)
    if table is not None:
        for t, w in enumerate(corpus.vocabulary):
            if w in table:
                emb_row[t] = table.index(w)
    rows_per_token: list[np.ndarray] = [np.empty(0, dtype=np.int64)] * N
    edge_counts = np.zeros(layout.L, dtype=np.int64)
    for l in range(layout.L):
        start, stop = int(layout.offsets[l]), int(layout.offsets[l + 1])
        pos = np.arange(start, stop)
        erows = emb_row[layout.words[start:stop]]
        keep = erows >= 0
        pos, erows = pos[keep], erows[keep]
        if len(pos) < 2 or corr_threshold <= 0:
            continue
        unit = table.unit[erows]
        d = np.clip(1.0 - unit @ unit.T, 0.0, 2.0)
        d[erows[:, None] == erows[None, :]] = 0.0
        adj = d < corr_threshold
        np.fill_diagonal(adj, False)
        edge_counts[l] = int(adj.sum()) // 2
        for a, p in enumerate(pos):
            rows_per_token[p] = pos[adj[a]].astype(np.int64)
    degrees = np.array([len(r) for r in rows_per_token], dtype=np.int64)
    indptr = np.concatenate([[0], np.cumsum(degrees)]).astype(np.int64)
    indices = np.concatenate(rows_per_token).astype(np.int64) if N else np.empty(0, dtype=np.int64)
    return NeighborSets(layout, indptr, indices, edge_counts)


def empty_neighbors(layout: TokenLayout) -> NeighborSets:
    N = len(layout.words)
    return NeighborSets(
        layout, np.zeros(N + 1, dtype=np.int64), np.empty(0, dtype=np.int64), np.zeros(layout.L, dtype=np.int64)
    )


@dataclass
class TopicModelState:
    layout: TokenLayout
    z: np.ndarray
    n_lk: np.ndarray
    n_kw: np.ndarray
    n_k: np.ndarray
    phi_sum: np.ndarray | None = field(default=None, repr=False)
    theta_sum: np.ndarray | None = field(default=None, repr=False)
    n_samples: int = 0

    @classmethod
    def from_assignments(cls, layout: TokenLayout, z: np.ndarray, K: int, V: int) -> "TopicModelState":
        z = np.ascontiguousarray(z, dtype=np.int64)
        if z.shape != layout.words.shape:
            raise ValueError("one topic per token required")
        if len(z) and (z.min() < 0 or z.max() >= K):
            raise ValueError(f"topics must lie in 0..{K - 1}")
        state = cls(layout, z, *_tally(layout, z, K, V))
        return state

    @property
    def K(self) -> int:
        return self.n_k.shape[0]

    @property
    def V(self) -> int:
        return self.n_kw.shape[1]

    @property
    def n_l(self) -> np.ndarray:
        return np.diff(self.layout.offsets)

    def topics(self, l: int) -> np.ndarray:
        return self.z[self.layout.offsets[l]:self.layout.offsets[l + 1]]

    def recount(self):
        return _tally(self.layout, self.z, self.K, self.V)

    def is_consistent(self) -> bool:
        n_lk, n_kw, n_k = self.recount()
        return (
            np.array_equal(n_lk, self.n_lk)
            and np.array_equal(n_kw, self.n_kw)
            and np.array_equal(n_k, self.n_k)
        )

    def remove(self, l: int, i: int) -> None:
        p = self.layout.position(l, i)
        k, w = self.z[p], self.layout.words[p]
        self.n_lk[l, k] -= 1
        self.n_kw[k, w] -= 1
        self.n_k[k] -= 1

    def add(self, l: int, i: int, k: int) -> None:
        p = self.layout.position(l, i)
        w = self.layout.words[p]
        self.z[p] = k
        self.n_lk[l, k] += 1
        self.n_kw[k, w] += 1
        self.n_k[k] += 1

    @contextmanager
    def excluded(self, l: int, i: int):
        """Temporarily take token (l, i) out of the counts."""
        k = int(self.z[self.layout.position(l, i)])
        self.remove(l, i)
        try:
            yield self
        finally:
            self.add(l, i, k)


def _tally(layout: TokenLayout, z: np.ndarray, K: int, V: int):
    n_lk = np.zeros((layout.L, K), dtype=np.int64)
    n_kw = np.zeros((K, V), dtype=np.int64)
    np.add.at(n_lk, (layout.docs, z), 1)
    np.add.at(n_kw, (z, layout.words), 1)
    return n_lk, n_kw, n_kw.sum(axis=1)


def gibbs_weights(state: TopicModelState, neighbors: NeighborSets, params: ModelParams, l: int, i: int) -> np.ndarray:
    """Unnormalized conditional weight of every topic for token (l, i).

    The token must already be removed from the counts.
    """
    p = state.layout.position(l, i)
    w = state.layout.words[p]
    V = state.V
    weights = (state.n_lk[l] + params.alpha) * (state.n_kw[:, w] + params.beta) / (state.n_k + V * params.beta)
    nbrs = neighbors.indices[neighbors.indptr[p]:neighbors.indptr[p + 1]]
    if len(nbrs):
        share = np.bincount(state.z[nbrs], minlength=state.K) / len(nbrs)
        weights = weights * np.exp(params.lam * share)
    return weights


def gibbs_conditional(state: TopicModelState, neighbors: NeighborSets, params: ModelParams, l: int, i: int) -> np.ndarray:
    weights = gibbs_weights(state, neighbors, params, l, i)
    return weights / weights.sum()


def init_state(layout: TokenLayout, params: ModelParams, V: int, rng: np.random.Generator) -> TopicModelState:
    z = rng.integers(params.K, size=len(layout.words), dtype=np.int64)
    return TopicModelState.from_assignments(layout, z, params.K, V)


def run_gibbs(
    pseudo_texts: PseudoTextSet,
    corpus: Corpus,
    neighbors: NeighborSets | None,
    params: ModelParams,
    backend: str | None = None,
    on_sweep: Callable[[int, TopicModelState], None] | None = None,
) -> TopicModelState:
    """Run ``params.iterations`` full sweeps from a seeded uniform start."""
    layout = token_layout(pseudo_texts, corpus) if neighbors is None else neighbors.layout
    if neighbors is None:
        neighbors = empty_neighbors(layout)
    kernel = get_kernel(backend)
    rng = np.random.default_rng(params.seed)
    state = init_state(layout, params, corpus.V, rng)
    N = len(layout.words)
    cum = np.zeros(params.K)
    nbr_topic = np.zeros(params.K, dtype=np.int64)
    log_every = max(1, params.iterations // 10)
    for it in range(params.iterations):
        u = rng.random(N)
        kernel.sweep(
            state.z, layout.words, layout.docs, neighbors.indptr, neighbors.indices,
            state.n_lk, state.n_kw, state.n_k, u,
            float(params.alpha), float(params.beta), float(params.lam), cum, nbr_topic,
        )
        if params.average_samples and it >= params.burn_in:
            est = estimate(state, params)
            if state.phi_sum is None:
                state.phi_sum = np.zeros_like(est.phi)
                state.theta_sum = np.zeros_like(est.theta)
            state.phi_sum += est.phi
            state.theta_sum += est.theta
            state.n_samples += 1
        if on_sweep is not None:
            on_sweep(it, state)
        if (it + 1) % log_every == 0:
            logger.info("gibbs sweep %d/%d", it + 1, params.iterations)
    return state


@dataclass(frozen=True)
class TopicEstimates:
    phi: np.ndarray  # K x V
    theta: np.ndarray  # L x K
    vocabulary: tuple[str, ...] | None = None

    @property
    def K(self) -> int:
        return self.phi.shape[0]


def estimate(state: TopicModelState, params: ModelParams, vocabulary: Sequence[str] | None = None) -> TopicEstimates:
    vocab = None if vocabulary is None else tuple(vocabulary)
    if params.average_samples and state.n_samples:
        return TopicEstimates(state.phi_sum / state.n_samples, state.theta_sum / state.n_samples, vocab)
    V, K = state.V, state.K
    phi = (state.n_kw + params.beta) / (state.n_k + V * params.beta)[:, None]
    theta = (state.n_lk + params.alpha) / (state.n_l + K * params.alpha)[:, None]
    return TopicEstimates(phi, theta, vocab)


def assign_short_text(text: ShortText | Sequence[int | None], estimates: TopicEstimates) -> tuple[int, np.ndarray]:
    """Most probable topic of a short text under the product of its word probabilities.

    Token ids that are ``None`` or outside the vocabulary are skipped.
    """
    tokens = text.tokens if isinstance(text, ShortText) else text
    V = estimates.phi.shape[1]
    known = [t for t in tokens if t is not None and 0 <= t < V]
    if not known:
        raise ValueError("text has no in-vocabulary token")
    log_scores = np.log(estimates.phi[:, known]).sum(axis=1)
    scores = np.exp(log_scores - log_scores.max())
    return int(np.argmax(log_scores)), scores / scores.sum()


def top_words(estimates: TopicEstimates, k: int, n: int = 10, vocabulary: Sequence[str] | None = None) -> list[str]:
    vocab = vocabulary if vocabulary is not None else estimates.vocabulary
    if vocab is None:
        raise ValueError("a vocabulary is required")
    if not 0 <= k < estimates.K:
        raise IndexError(f"topic {k} outside 0..{estimates.K - 1}")
    row = estimates.phi[k]
    order = sorted(range(len(vocab)), key=lambda w: (-row[w], vocab[w]))
    return [vocab[w] for w in order[:n]]


def _check_stochastic(name: str, m: np.ndarray) -> None:
    if m.ndim != 2 or np.any(m < 0) or not np.allclose(m.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError(f"{name} must be a non-negative row-stochastic matrix")


def generate_synthetic(
    params: ModelParams,
    L: int,
    doc_len: int | Sequence[int],
    planted_phi: np.ndarray,
    planted_theta: np.ndarray,
    seed: int,
) -> tuple[PseudoTextSet, Corpus]:
    """Sample documents from a planted LDA (no MRF coupling).

    Every document becomes both one short text and its own pseudo-text. Word
    ``w`` is named ``w0000``-style; the vocabulary keeps all ``V`` columns of
    ``planted_phi`` so estimates line up with it column for column. Gold
    labels are each document's dominant planted topic.
    """
    phi = np.asarray(planted_phi, dtype=np.float64)
    theta = np.asarray(planted_theta, dtype=np.float64)
    _check_stochastic("planted_phi", phi)
    _check_stochastic("planted_theta", theta)
    K, V = phi.shape
    if K != params.K or theta.shape != (L, K):
        raise ValueError(f"expected phi K x V with K={params.K} and theta {L} x {params.K}")
    lengths = [doc_len] * L if np.isscalar(doc_len) else list(doc_len)
    if len(lengths) != L or min(lengths) < 1:
        raise ValueError("need one positive length per document")
    rng = np.random.default_rng(seed)
    width = max(4, len(str(V - 1)))
    vocabulary = tuple(f"w{w:0{width}d}" for w in range(V))
    phi_cdf = np.cumsum(phi, axis=1)
    texts = []
    for l in range(L):
        z = rng.choice(K, size=lengths[l], p=theta[l])
        draws = rng.random(lengths[l])
        words = np.minimum(
            np.array([np.searchsorted(phi_cdf[k], x * phi_cdf[k, -1], side="right") for k, x in zip(z, draws)]),
            V - 1,
        )
        texts.append(ShortText(l, tuple(int(w) for w in words), int(np.argmax(theta[l])), l + 1))
    corpus = Corpus(tuple(texts), vocabulary)
    return PseudoTextSet(tuple(range(L)), L), corpus
