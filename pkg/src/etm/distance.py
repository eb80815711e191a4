"""Word Mover's Distance between nBOW texts.

``wmd_exact`` solves the balanced transportation problem with successive
shortest paths; ``wmd_relaxed`` keeps only the outgoing-mass constraint,
whose optimum sends every source word to its nearest target word.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import NBowVector
from .embeddings import EmbeddingTable, distance_matrix

_EPS = 1e-15


class DistanceUndefinedError(ValueError):
    """A text has no token with an embedding."""


@dataclass(frozen=True)
class FlowMatrix:
    entries: dict[tuple[int, int], float]
    total_cost: float

    def row_sums(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for (u, _), f in self.entries.items():
            out[u] = out.get(u, 0.0) + f
        return out

    def col_sums(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for (_, v), f in self.entries.items():
            out[v] = out.get(v, 0.0) + f
        return out


def embedded_part(a: NBowVector, table: EmbeddingTable) -> tuple[list[int], list[str], np.ndarray]:
    """Token ids, words and renormalized weights of the embedded tokens, by token id."""
    ids = sorted(t for t in a.weights if a.vocabulary[t] in table)
    if not ids:
        raise DistanceUndefinedError("text has no token with an embedding")
    w = np.array([a.weights[t] for t in ids], dtype=np.float64)
    return ids, [a.vocabulary[t] for t in ids], w / w.sum()


def transport(supply: np.ndarray, demand: np.ndarray, cost: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimum-cost flow for a balanced transportation problem.

    Successive shortest paths over the residual bipartite graph: every
    augmentation ships mass along a cheapest path from a source with
    remaining supply to a sink with remaining demand. Bellman-Ford handles
    the negative backward arcs. Ties go to the lowest source/sink index.
    """
    supply = np.array(supply, dtype=np.float64)
    demand = np.array(demand, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    m, n = cost.shape
    flow = np.zeros((m, n))
    # 2 * (m + n) relaxation rounds is far more than any simple path needs
    max_rounds = 2 * (m + n) + 2
    for _ in range(4 * (m + n) * (m + n) + 16):
        live = supply > _EPS
        if not live.any() or not (demand > _EPS).any():
            break
        d_src = np.where(live, 0.0, np.inf)
        d_snk = np.full(n, np.inf)
        pred_snk = np.full(n, -1)
        pred_src = np.full(m, -1)
        for _ in range(max_rounds):
            cand = d_src[:, None] + cost
            best_i = np.argmin(cand, axis=0)
            best = cand[best_i, np.arange(n)]
            upd = best < d_snk - 1e-14
            d_snk = np.where(upd, best, d_snk)
            pred_snk = np.where(upd, best_i, pred_snk)
            back = np.where(flow > _EPS, d_snk[None, :] - cost, np.inf)
            best_j = np.argmin(back, axis=1)
            bbest = back[np.arange(m), best_j]
            upd_s = bbest < d_src - 1e-14
            if not upd.any() and not upd_s.any():
                break
            d_src = np.where(upd_s, bbest, d_src)
            pred_src = np.where(upd_s, best_j, pred_src)
        targets = np.where(demand > _EPS, d_snk, np.inf)
        j = int(np.argmin(targets))
        if not np.isfinite(targets[j]):
            break
        # walk back to the originating source
        path = []
        node_j = j
        while True:
            i = int(pred_snk[node_j])
            path.append((i, node_j))
            if pred_src[i] < 0:
                break
            node_j = int(pred_src[i])
            path.append((i, node_j))  # backward arc i <- node_j cancels flow[i, node_j]
        start = path[-1][0]
        # forward arcs at even positions, backward arcs at odd positions
        delta = min(supply[start], demand[j])
        for k in range(1, len(path), 2):
            delta = min(delta, flow[path[k]])
        for k, arc in enumerate(path):
            flow[arc] += delta if k % 2 == 0 else -delta
        supply[start] -= delta
        demand[j] -= delta
        flow[flow < _EPS] = 0.0
    return float((flow * cost).sum()), flow


def wmd_exact(a: NBowVector, b: NBowVector, table: EmbeddingTable) -> tuple[float, FlowMatrix]:
    ia, wa, ra = embedded_part(a, table)
    ib, wb, rb = embedded_part(b, table)
    cost, flow = transport(ra, rb, distance_matrix(table, wa, wb))
    entries = {
        (ia[u], ib[v]): float(flow[u, v]) for u, v in zip(*np.nonzero(flow))
    }
    return cost, FlowMatrix(entries, cost)


def wmd_relaxed(a: NBowVector, b: NBowVector, table: EmbeddingTable) -> float:
    _, wa, ra = embedded_part(a, table)
    _, wb, _ = embedded_part(b, table)
    return float(ra @ distance_matrix(table, wa, wb).min(axis=1))


def relaxed_flow(a: NBowVector, b: NBowVector, table: EmbeddingTable) -> FlowMatrix:
    """Optimal plan of the relaxed problem: each source word to its nearest target."""
    ia, wa, ra = embedded_part(a, table)
    ib, wb, _ = embedded_part(b, table)
    d = distance_matrix(table, wa, wb)
    nearest = d.argmin(axis=1)
    entries: dict[tuple[int, int], float] = {}
    for u, v in enumerate(nearest):
        entries[(ia[u], ib[v])] = entries.get((ia[u], ib[v]), 0.0) + float(ra[u])
    return FlowMatrix(entries, float(ra @ d[np.arange(len(ia)), nearest]))


def symmetric_relaxed(a: NBowVector, b: NBowVector, table: EmbeddingTable) -> float:
    """The tighter of the two one-sided relaxed lower bounds."""
    _, wa, ra = embedded_part(a, table)
    _, wb, rb = embedded_part(b, table)
    d = distance_matrix(table, wa, wb)
    return max(float(ra @ d.min(axis=1)), float(rb @ d.min(axis=0)))
