"""Independent reference computations the package is checked against.

Nothing here imports the code paths under test: conditionals are
evaluated from raw topic/word lists, transport problems go to scipy's LP
solver, and the reference sampler is a plain-Python vanilla LDA.
"""
import math
import random

import numpy as np
from scipy.optimize import linprog


def lda_conditional(z, words, docs, skip, K, V, alpha, beta):
    """Vanilla collapsed-LDA conditional for token ``skip``, counted from scratch."""
    l, w = docs[skip], words[skip]
    out = []
    for k in range(K):
        n_lk = sum(1 for t in range(len(z)) if t != skip and docs[t] == l and z[t] == k)
        n_kw = sum(1 for t in range(len(z)) if t != skip and z[t] == k and words[t] == w)
        n_k = sum(1 for t in range(len(z)) if t != skip and z[t] == k)
        out.append((n_lk + alpha) * (n_kw + beta) / (n_k + V * beta))
    total = sum(out)
    return [x / total for x in out]


def mrf_conditional(z, words, skip, neighbors, K, V, alpha, beta, lam):
    """Term-by-term MRF conditional for one pseudo-text (L = 1).

    ``neighbors`` is the explicit set of positions correlated with ``skip``.
    """
    weights = []
    for k in range(K):
        doc_term = sum(1 for t in range(len(z)) if t != skip and z[t] == k) + alpha
        word_term = sum(1 for t in range(len(z)) if t != skip and z[t] == k and words[t] == words[skip]) + beta
        topic_total = sum(1 for t in range(len(z)) if t != skip and z[t] == k) + V * beta
        if neighbors:
            agree = sum(1 for j in neighbors if z[j] == k)
            mrf = math.exp(lam * agree / len(neighbors))
        else:
            mrf = 1.0
        weights.append(doc_term * word_term / topic_total * mrf)
    total = sum(weights)
    return [x / total for x in weights]


def lda_log_joint(z, words, docs, L, K, V, alpha, beta):
    """log p(w, z) of vanilla LDA with phi and theta integrated out."""
    n_lk = np.zeros((L, K))
    n_kw = np.zeros((K, V))
    for t in range(len(z)):
        n_lk[docs[t], z[t]] += 1
        n_kw[z[t], words[t]] += 1
    lg = math.lgamma
    out = 0.0
    for k in range(K):
        out += sum(lg(n_kw[k, w] + beta) for w in range(V)) - lg(n_kw[k].sum() + V * beta)
    for l in range(L):
        out += sum(lg(n_lk[l, k] + alpha) for k in range(K)) - lg(n_lk[l].sum() + K * alpha)
    return out


def transport_lp(supply, demand, cost):
    """Balanced transportation problem through scipy's HiGHS LP solver."""
    m, n = cost.shape
    rows = []
    for i in range(m):
        r = np.zeros((m, n))
        r[i] = 1
        rows.append(r.ravel())
    for j in range(n):
        r = np.zeros((m, n))
        r[:, j] = 1
        rows.append(r.ravel())
    res = linprog(
        np.asarray(cost).ravel(),
        A_eq=np.array(rows),
        b_eq=np.concatenate([supply, demand]),
        bounds=(0, None),
        method="highs",
    )
    assert res.status == 0, res.message
    return res.fun


def reference_lda(docs, K, V, alpha, beta, sweeps, seed):
    """Plain-Python collapsed Gibbs LDA; returns the final topic per token."""
    rng = random.Random(seed)
    z = [[rng.randrange(K) for _ in d] for d in docs]
    n_dk = [[0] * K for _ in docs]
    n_kw = [[0] * V for _ in range(K)]
    n_k = [0] * K
    for d, doc in enumerate(docs):
        for i, w in enumerate(doc):
            k = z[d][i]
            n_dk[d][k] += 1
            n_kw[k][w] += 1
            n_k[k] += 1
    for _ in range(sweeps):
        for d, doc in enumerate(docs):
            for i, w in enumerate(doc):
                k = z[d][i]
                n_dk[d][k] -= 1
                n_kw[k][w] -= 1
                n_k[k] -= 1
                p = [(n_dk[d][j] + alpha) * (n_kw[j][w] + beta) / (n_k[j] + V * beta) for j in range(K)]
                k = rng.choices(range(K), weights=p)[0]
                z[d][i] = k
                n_dk[d][k] += 1
                n_kw[k][w] += 1
                n_k[k] += 1
    return z, n_kw


def nmi_bruteforce(pred, gold):
    """NMI (geometric normalization) from explicit probability sums."""
    n = len(pred)
    ps, gs = sorted(set(pred)), sorted(set(gold))
    p_a = {a: sum(1 for x in pred if x == a) / n for a in ps}
    p_b = {b: sum(1 for x in gold if x == b) / n for b in gs}
    mi = 0.0
    for a in ps:
        for b in gs:
            p_ab = sum(1 for x, y in zip(pred, gold) if x == a and y == b) / n
            if p_ab > 0:
                mi += p_ab * math.log(p_ab / (p_a[a] * p_b[b]))
    h_a = -sum(p * math.log(p) for p in p_a.values())
    h_b = -sum(p * math.log(p) for p in p_b.values())
    return mi / math.sqrt(h_a * h_b)
