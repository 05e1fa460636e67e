# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: check-node density pushforward and the quantized BP decoder."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int16_t, int32_t, uint8_t

cnp.import_array()


def boxplus_magnitudes(const double[::1] mu, const double[::1] mv, const double[::1] corr, Py_ssize_t near):
    """Pairwise pushforward of two |LLR| mass vectors through the box-plus map.

    On a uniform grid box-plus(i*d, j*d) / d = min(i, j) + corr[i + j] - corr[|i - j|]
    with corr[t] = log1p(exp(-t*d)) / d, so no 2-D table is needed.  Each pair's
    mass is split linearly between the two bins around its image.  Pairs with
    |i - j| >= near have corr < 1 bin and always land in bins (min - 1, min), so
    they are summed in registers instead of scattered.  The pair (i, j) and
    (j, i) share an image and are handled together.  Infinite masses are left
    to the caller.
    """
    cdef Py_ssize_t n = mu.shape[0]
    cdef Py_ssize_t i, j, k, jend
    cdef Py_ssize_t top = n - 2
    cdef double ai, bi, w, f, pos, s0, s1
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            ai = mu[i]
            bi = mv[i]
            if ai == 0.0 and bi == 0.0:
                continue
            w = ai * bi
            if w != 0.0:
                pos = i + corr[2 * i] - corr[0]
                k = <Py_ssize_t>pos
                if k > top:
                    k = top
                f = pos - k
                o[k] += w - w * f
                o[k + 1] += w * f
            jend = i + near
            if jend > n:
                jend = n
            for j in range(i + 1, jend):
                w = ai * mv[j] + bi * mu[j]
                if w == 0.0:
                    continue
                pos = i + corr[i + j] - corr[j - i]
                k = <Py_ssize_t>pos
                if k > top:
                    k = top
                f = pos - k
                o[k] += w - w * f
                o[k + 1] += w * f
            s0 = 0.0
            s1 = 0.0
            for j in range(jend, n):
                w = ai * mv[j] + bi * mu[j]
                s0 += w
                s1 += w * (corr[j - i] - corr[i + j])
            if i == 0:
                o[0] += s0
            else:
                o[i - 1] += s1
                o[i] += s0 - s1
    return out


def bp_decode(const int16_t[::1] channel, const int32_t[::1] chk_ptr, const int32_t[::1] edge_var,
              const int32_t[::1] var_ptr, const int32_t[::1] var_edges,
              int max_iter, int max_level, const double[::1] phi_table, const double[::1] bounds,
              uint8_t[::1] decisions):
    """Flooding sum-product on quantized messages.

    Messages are integer levels clipped to +-max_level.  A check output with
    phi-sum y gets the level #{k : bounds[k] >= y} (``bounds`` decreasing).
    Edges are numbered in check order.  Returns (iterations, parity_ok).
    """
    cdef Py_ssize_t n = channel.shape[0]
    cdef Py_ssize_t m = chk_ptr.shape[0] - 1
    cdef Py_ssize_t E = edge_var.shape[0]
    cdef Py_ssize_t c, e, v, s, t
    cdef int it, neg, q, lo, hi, mid
    cdef long total
    cdef double acc, y
    cdef bint ok = False
    v2c_arr = np.empty(E, dtype=np.int16)
    c2v_arr = np.zeros(E, dtype=np.int16)
    cdef int16_t[::1] v2c = v2c_arr
    cdef int16_t[::1] c2v = c2v_arr
    cdef int parity
    with nogil:
        for e in range(E):
            v2c[e] = channel[edge_var[e]]
        it = 0
        while it < max_iter:
            it += 1
            # check nodes
            for c in range(m):
                s = chk_ptr[c]
                t = chk_ptr[c + 1]
                acc = 0.0
                neg = 0
                for e in range(s, t):
                    q = v2c[e]
                    if q < 0:
                        neg ^= 1
                        q = -q
                    acc += phi_table[q]
                for e in range(s, t):
                    q = v2c[e]
                    y = acc - phi_table[q if q >= 0 else -q]
                    lo = 0
                    hi = max_level
                    while lo < hi:
                        mid = (lo + hi) >> 1
                        if bounds[mid] >= y:
                            lo = mid + 1
                        else:
                            hi = mid
                    q = lo
                    if neg ^ (v2c[e] < 0):
                        q = -q
                    c2v[e] = <int16_t>q
            # variable nodes
            for v in range(n):
                total = channel[v]
                for s in range(var_ptr[v], var_ptr[v + 1]):
                    total += c2v[var_edges[s]]
                decisions[v] = 1 if total < 0 else 0
                for s in range(var_ptr[v], var_ptr[v + 1]):
                    e = var_edges[s]
                    t = total - c2v[e]
                    if t > max_level:
                        t = max_level
                    elif t < -max_level:
                        t = -max_level
                    v2c[e] = <int16_t>t
            # syndrome
            ok = True
            for c in range(m):
                parity = 0
                for e in range(chk_ptr[c], chk_ptr[c + 1]):
                    parity ^= decisions[edge_var[e]]
                if parity:
                    ok = False
                    break
            if ok:
                break
    return it, bool(ok)
