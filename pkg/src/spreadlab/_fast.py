"""Numba kernels for the hot loops of the GIRG sampler.

Optional: :mod:`spreadlab.girg` falls back to its vectorized numpy
implementation when numba is unavailable.  Both paths draw from the same
model distribution (verified against the naive sampler); they are not
stream-identical.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

HAVE_NUMBA = njit is not None

if HAVE_NUMBA:

    @njit(cache=True)
    def _torus_dist1(pa, pb, side, d):
        acc = 0.0
        for a in range(d):
            delta = abs(pa[a] - pb[a])
            if delta > side - delta:
                delta = side - delta
            acc += delta * delta
        return np.sqrt(acc)

    @njit(cache=True)
    def _edge_prob(wu, wv, dist, d, alpha, c):
        if dist <= 0.0:
            return c
        ratio = wu * wv / dist ** d
        if ratio >= 1.0:
            return c
        if alpha == np.inf:
            return 0.0
        return c * ratio ** alpha

    @njit(cache=True)
    def stencil_kernel(ids_i, cells_i, off_i, ids_j, off_j, grid, d, same,
                       deltas, pos, w, side, alpha, c, seed):
        """Exact Bernoulli over pairs in identical or adjacent cells."""
        np.random.seed(seed)
        cap = 1024
        eu = np.empty(cap, dtype=np.int64)
        ev = np.empty(cap, dtype=np.int64)
        cnt_edges = 0
        n_i = ids_i.shape[0]
        axes = np.empty(d, dtype=np.int64)
        for s in range(n_i):
            u = ids_i[s]
            cell = cells_i[s]
            rem = cell
            for a in range(d - 1, -1, -1):
                axes[a] = rem % grid
                rem //= grid
            for k in range(deltas.shape[0]):
                ncell = 0
                for a in range(d):
                    ncell = ncell * grid + (axes[a] + deltas[k, a]) % grid
                if same:
                    if ncell == cell:
                        lo = s + 1  # within-cell pairs, local order
                        hi = off_i[cell + 1]
                    elif cell < ncell:
                        lo = off_j[ncell]
                        hi = off_j[ncell + 1]
                    else:
                        continue
                else:
                    lo = off_j[ncell]
                    hi = off_j[ncell + 1]
                for t in range(lo, hi):
                    v = ids_j[t]
                    dist = _torus_dist1(pos[u], pos[v], side, d)
                    p = _edge_prob(w[u], w[v], dist, d, alpha, c)
                    if np.random.random() < p:
                        if cnt_edges == cap:
                            cap *= 2
                            eu2 = np.empty(cap, dtype=np.int64)
                            ev2 = np.empty(cap, dtype=np.int64)
                            eu2[:cnt_edges] = eu
                            ev2[:cnt_edges] = ev
                            eu = eu2
                            ev = ev2
                        eu[cnt_edges] = u
                        ev[cnt_edges] = v
                        cnt_edges += 1
        return eu[:cnt_edges], ev[:cnt_edges]

    @njit(cache=True)
    def shell_kernel(ids_i, off_i, ids_j, off_j, grid, d, same,
                     dps, d1s, d2s, pbars, pos, w, side, alpha, c, seed):
        """Binomial candidate counts per non-adjacent cell pair under the
        per-displacement bound, thinned with the exact kernel."""
        np.random.seed(seed)
        gp = grid // 2
        n_parents = gp ** d
        cap = 1024
        eu = np.empty(cap, dtype=np.int64)
        ev = np.empty(cap, dtype=np.int64)
        cnt_edges = 0
        p_axes = np.empty(d, dtype=np.int64)
        drawn = np.empty(64, dtype=np.int64)
        for k in range(dps.shape[0]):
            pbar = pbars[k]
            if pbar <= 0.0:
                continue
            for pf in range(n_parents):
                rem = pf
                for a in range(d - 1, -1, -1):
                    p_axes[a] = rem % gp
                    rem //= gp
                c1 = 0
                c2 = 0
                for a in range(d):
                    c1 = c1 * grid + 2 * p_axes[a] + d1s[k, a]
                    c2 = c2 * grid + (2 * (p_axes[a] + dps[k, a])
                                      + d2s[k, a]) % grid
                if same and c1 >= c2:
                    continue
                m_i = off_i[c1 + 1] - off_i[c1]
                m_j = off_j[c2 + 1] - off_j[c2]
                total = m_i * m_j
                if total == 0:
                    continue
                kdraw = np.random.binomial(total, pbar)
                if kdraw == 0:
                    continue
                if kdraw > drawn.shape[0]:
                    drawn = np.empty(int(kdraw) * 2, dtype=np.int64)
                if 4 * kdraw >= total:
                    # dense draw: partial Fisher-Yates over the pair index
                    pool = np.arange(total)
                    for q in range(kdraw):
                        r = q + np.random.randint(0, total - q)
                        tmp = pool[q]
                        pool[q] = pool[r]
                        pool[r] = tmp
                        drawn[q] = pool[q]
                else:
                    nd = 0
                    while nd < kdraw:
                        idx = np.random.randint(0, total)
                        fresh = True
                        for q in range(nd):
                            if drawn[q] == idx:
                                fresh = False
                                break
                        if fresh:
                            drawn[nd] = idx
                            nd += 1
                for q in range(kdraw):
                    idx = drawn[q]
                    u = ids_i[off_i[c1] + idx // m_j]
                    v = ids_j[off_j[c2] + idx % m_j]
                    dist = _torus_dist1(pos[u], pos[v], side, d)
                    p = _edge_prob(w[u], w[v], dist, d, alpha, c)
                    if np.random.random() * pbar < p:
                        if cnt_edges == cap:
                            cap *= 2
                            eu2 = np.empty(cap, dtype=np.int64)
                            ev2 = np.empty(cap, dtype=np.int64)
                            eu2[:cnt_edges] = eu
                            ev2[:cnt_edges] = ev
                            eu = eu2
                            ev = ev2
                        eu[cnt_edges] = u
                        ev[cnt_edges] = v
                        cnt_edges += 1
        return eu[:cnt_edges], ev[:cnt_edges]
