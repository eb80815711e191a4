# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled collapsed Gibbs sweep. Mirrors ``_gibbs_py.sweep`` operation for operation."""
from libc.math cimport exp

cimport numpy as cnp

cnp.import_array()


def sweep(
    cnp.int64_t[::1] z,
    const cnp.int64_t[::1] words,
    const cnp.int64_t[::1] docs,
    const cnp.int64_t[::1] nbr_ptr,
    const cnp.int64_t[::1] nbr_idx,
    cnp.int64_t[:, ::1] n_lk,
    cnp.int64_t[:, ::1] n_kw,
    cnp.int64_t[::1] n_k,
    const double[::1] u,
    double alpha,
    double beta,
    double lam,
    double[::1] cum,
    cnp.int64_t[::1] nbr_topic,
):
    cdef Py_ssize_t N = z.shape[0]
    cdef Py_ssize_t K = n_k.shape[0]
    cdef double vbeta = n_kw.shape[1] * beta
    cdef Py_ssize_t t, k, p, l, w, deg, k_new
    cdef double total, weight, target
    with nogil:
        for t in range(N):
            l = docs[t]
            w = words[t]
            k = z[t]
            n_lk[l, k] -= 1
            n_kw[k, w] -= 1
            n_k[k] -= 1

            deg = nbr_ptr[t + 1] - nbr_ptr[t]
            if deg > 0:
                for k in range(K):
                    nbr_topic[k] = 0
                for p in range(nbr_ptr[t], nbr_ptr[t + 1]):
                    nbr_topic[z[nbr_idx[p]]] += 1

            total = 0.0
            for k in range(K):
                weight = (n_lk[l, k] + alpha) * (n_kw[k, w] + beta) / (n_k[k] + vbeta)
                if deg > 0:
                    weight = weight * exp(lam * nbr_topic[k] / deg)
                total = total + weight
                cum[k] = total

            target = u[t] * total
            k_new = K - 1
            for k in range(K):
                if target < cum[k]:
                    k_new = k
                    break

            z[t] = k_new
            n_lk[l, k_new] += 1
            n_kw[k_new, w] += 1
            n_k[k_new] += 1
