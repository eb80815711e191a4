"""Pure-Python collapsed Gibbs sweep, used when the compiled kernel is absent.

Same arithmetic, in the same order, as ``_gibbs.pyx``; given the same
uniforms both produce the same assignments.
"""
from math import exp


def sweep(z, words, docs, nbr_ptr, nbr_idx, n_lk, n_kw, n_k, u, alpha, beta, lam, cum, nbr_topic):
    K = n_k.shape[0]
    vbeta = n_kw.shape[1] * beta
    zl = z.tolist()
    wl = words.tolist()
    dl = docs.tolist()
    ptr = nbr_ptr.tolist()
    idx = nbr_idx.tolist()
    lk = n_lk.tolist()
    kw = n_kw.tolist()
    nk = n_k.tolist()
    ul = u.tolist()
    c = [0.0] * K
    topics = range(K)
    for t in range(len(zl)):
        l = dl[t]
        w = wl[t]
        k = zl[t]
        row = lk[l]
        row[k] -= 1
        kw[k][w] -= 1
        nk[k] -= 1

        lo, hi = ptr[t], ptr[t + 1]
        deg = hi - lo
        if deg > 0:
            counts = [0] * K
            for p in range(lo, hi):
                counts[zl[idx[p]]] += 1

        total = 0.0
        for k in topics:
            weight = (row[k] + alpha) * (kw[k][w] + beta) / (nk[k] + vbeta)
            if deg > 0:
                weight = weight * exp(lam * counts[k] / deg)
            total = total + weight
            c[k] = total

        target = ul[t] * total
        k_new = K - 1
        for k in topics:
            if target < c[k]:
                k_new = k
                break

        zl[t] = k_new
        row[k_new] += 1
        kw[k_new][w] += 1
        nk[k_new] += 1

    z[:] = zl
    n_lk[:] = lk
    n_kw[:] = kw
    n_k[:] = nk
