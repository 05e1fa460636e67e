"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def boxplus_magnitudes(mu, mv, corr, near):
    n = mu.shape[0]
    rows = np.flatnonzero(mu)
    cols = np.flatnonzero(mv)
    if rows.size == 0 or cols.size == 0:
        return np.zeros(n)
    i = rows[:, None]
    j = cols[None, :]
    pos = np.minimum(i, j) + corr[i + j] - corr[np.abs(i - j)]
    k = np.minimum(pos.astype(np.int64), n - 2)
    f = (pos - k).ravel()
    k = k.ravel()
    w = np.outer(mu[rows], mv[cols]).ravel()
    out = np.bincount(k, weights=w - w * f, minlength=n)
    out += np.bincount(k + 1, weights=w * f, minlength=n + 1)[:n]
    return out
def bp_decode(channel, chk_ptr, edge_var, var_ptr, var_edges, max_iter, max_level, phi_table, bounds, decisions):
    m = chk_ptr.size - 1
    E = edge_var.size
    chk_of_edge = np.repeat(np.arange(m), np.diff(chk_ptr))
    starts = chk_ptr[:-1]
    nonempty_chk = np.diff(chk_ptr) > 0
    # var-ordered view of edges
    var_order = var_edges
    var_starts = var_ptr[:-1]
    var_nonempty = np.diff(var_ptr) > 0
    neg_bounds = -np.asarray(bounds)
    channel = channel.astype(np.int64)
    v2c = channel[edge_var].copy()
    c2v = np.zeros(E, dtype=np.int64)
    ok = False
    it = 0
    while it < max_iter:
        it += 1
        neg = (v2c < 0).astype(np.int64)
        mag = np.abs(v2c)
        ph = phi_table[mag]
        acc = np.zeros(m)
        par = np.zeros(m, dtype=np.int64)
        acc[nonempty_chk] = np.add.reduceat(ph, starts[nonempty_chk])
        par[nonempty_chk] = np.add.reduceat(neg, starts[nonempty_chk]) & 1
        y = acc[chk_of_edge] - ph
        q = np.searchsorted(neg_bounds, -y, side="right").astype(np.int64)
        sign = par[chk_of_edge] ^ neg
        c2v = np.where(sign == 1, -q, q)
        sums = np.zeros(channel.size, dtype=np.int64)
        gathered = c2v[var_order]
        sums[var_nonempty] = np.add.reduceat(gathered, var_starts[var_nonempty])
        total = channel + sums
        decisions[:] = (total < 0).astype(np.uint8)
        edge_total = np.empty(E, dtype=np.int64)
        edge_total[var_order] = np.repeat(total, np.diff(var_ptr))
        v2c = np.clip(edge_total - c2v, -max_level, max_level)
        bits = decisions[edge_var].astype(np.int64)
        syn = np.zeros(m, dtype=np.int64)
        syn[nonempty_chk] = np.add.reduceat(bits, starts[nonempty_chk]) & 1
        ok = not syn.any()
        if ok:
            break
    return it, bool(ok)
