"""Samplers for geometric inhomogeneous random graphs on the torus.

Two samplers are provided: :func:`sample_girg_naive` loops over all node
pairs and serves as the distributional oracle, while :func:`sample_girg`
uses weight octaves and a power-of-two cell hierarchy so that the expected
work is proportional to the number of edges plus the number of nodes.  Both
draw the node set from the same RNG stream, so for a fixed seed they differ
only in how edges are realised.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _fast
from .core_graph import METRIC_TORUS, SpatialGraph
from .errors import ParameterError

_CHUNK = 1 << 22


@dataclass(frozen=True)
class GirgParams:
    """Model parameters: expected size n, dimension d, weight tail tau,
    long-range alpha (math.inf = threshold mode), density constant c."""

    n: float
    d: int
    tau: float
    alpha: float
    c: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.n > 0:
            raise ParameterError("n must be positive")
        if self.d < 1:
            raise ParameterError("d must be at least 1")
        if not self.tau > 2:
            raise ParameterError("tau must exceed 2 (finite mean weight)")
        if not self.alpha > 1:
            raise ParameterError("alpha must exceed 1 (or be inf)")
        if not 0 < self.c <= 1:
            raise ParameterError("c must lie in (0, 1]")

    @property
    def side(self):
        return self.n ** (1.0 / self.d)


def sample_weights(count, tau, rng):
    """I.i.d. Pareto weights with density (tau-1) w^{-tau} on [1, inf),
    via the inverse transform w = U^{-1/(tau-1)}."""
    if not tau > 2:
        raise ParameterError("tau must exceed 2 (infinite mean otherwise)")
    u = 1.0 - rng.random(count)  # uniform on (0, 1]
    return u ** (-1.0 / (tau - 1.0))


def connection_probability(wu, wv, dist, d, alpha, c=1.0):
    """Edge probability c * min(w_u w_v / dist^d, 1)^alpha.

    dist = 0 is taken as the min-clamp limit (probability c); alpha = inf is
    the hard threshold kernel.
    """
    wu = np.asarray(wu, dtype=float)
    wv = np.asarray(wv, dtype=float)
    dist = np.asarray(dist, dtype=float)
    prod = wu * wv
    with np.errstate(divide="ignore", over="ignore"):
        ratio = np.where(dist > 0, prod / dist ** d, np.inf)
    if math.isinf(alpha):
        return np.where(ratio >= 1.0, c, 0.0)
    return c * np.minimum(ratio, 1.0) ** alpha


def _node_stream(params):
    return np.random.default_rng(
        np.random.SeedSequence(params.seed, spawn_key=(0,)))


def _draw_nodes(params, max_nodes):
    rng = _node_stream(params)
    n_nodes = int(rng.poisson(params.n))
    if max_nodes is not None and n_nodes > max_nodes:
        raise ParameterError(
            f"realized node count {n_nodes} exceeds cap {max_nodes}")
    pos = rng.random((n_nodes, params.d)) * params.side
    w = sample_weights(n_nodes, params.tau, rng)
    return pos, w


def _torus_dist(pa, pb, side):
    delta = np.abs(pa - pb)
    delta = np.minimum(delta, side - delta)
    return np.sqrt(np.sum(delta * delta, axis=-1))


def sample_girg_naive(params: GirgParams, max_nodes=None) -> SpatialGraph:
    """O(n^2) reference sampler; refuses n above 10^4."""
    if params.n > 10_000:
        raise ParameterError("naive sampler is limited to n <= 1e4")
    pos, w = _draw_nodes(params, max_nodes)
    n = len(w)
    rng = np.random.default_rng(np.random.SeedSequence(params.seed,
                                                       spawn_key=(3,)))
    side = params.side
    us, vs = [], []
    for u in range(n - 1):
        dist = _torus_dist(pos[u], pos[u + 1:], side)
        p = connection_probability(w[u], w[u + 1:], dist, params.d,
                                   params.alpha, params.c)
        hit = np.flatnonzero(rng.random(n - 1 - u) < p)
        if hit.size:
            us.append(np.full(hit.size, u, dtype=np.int64))
            vs.append(hit + u + 1)
    edges = (np.column_stack((np.concatenate(us), np.concatenate(vs)))
             if us else np.zeros((0, 2), dtype=np.int64))
    return SpatialGraph(pos, edges, w, METRIC_TORUS, side, check=False)


# ---------------------------------------------------------------------------
# grid sampler


class _BucketIndex:
    """Nodes of one weight bucket, indexed by cell at one grid resolution."""

    def __init__(self, ids, axes, grid, d):
        cells = axes[:, 0].copy()
        for a in range(1, d):
            cells = cells * grid + axes[:, a]
        order = np.argsort(cells, kind="stable")
        self.ids = ids[order]
        self.cells = cells[order]
        self.cnt = np.bincount(cells, minlength=grid ** d).astype(np.int64)
        self.off = np.concatenate(([0], np.cumsum(self.cnt)))
        self.grid = grid


def _min_image(delta, grid):
    m = delta % grid
    return np.minimum(m, grid - m)


def _pbar(wtop_prod, r_min, d, alpha, c):
    if r_min <= 0:
        return c
    ratio = wtop_prod / r_min ** d
    if math.isinf(alpha):
        return c if ratio >= 1.0 else 0.0
    return c * min(ratio, 1.0) ** alpha


def _expand_counts(k):
    """Positions 0..k_i-1 for every i, concatenated."""
    tot = int(k.sum())
    if tot == 0:
        return np.zeros(0, dtype=np.int64), 0
    stops = np.cumsum(k)
    starts = stops - k
    return np.arange(tot, dtype=np.int64) - np.repeat(starts, k), tot


def _grid_levels(side, r_clamp):
    """Largest power-of-two cell count per axis whose cell side >= r_clamp."""
    if side <= r_clamp:
        return 1
    return 1 << int(math.floor(math.log2(side / r_clamp)))


class _EdgeSink:
    def __init__(self, cap):
        self.us = []
        self.vs = []
        self.total = 0
        self.cap = cap

    def add(self, u, v):
        if u.size == 0:
            return
        self.total += u.size
        if self.cap is not None and self.total > self.cap:
            raise ParameterError(f"edge count exceeds cap {self.cap}")
        self.us.append(u.astype(np.int64))
        self.vs.append(v.astype(np.int64))

    def edges(self):
        if not self.us:
            return np.zeros((0, 2), dtype=np.int64)
        return np.column_stack((np.concatenate(self.us),
                                np.concatenate(self.vs)))


def _bernoulli_pairs(sink, rng, u_ids, v_ids, pos, w, side, d, alpha, c,
                     pbar=None):
    """Exact Bernoulli trial for explicit candidate pairs, in chunks."""
    for lo in range(0, u_ids.size, _CHUNK):
        u = u_ids[lo:lo + _CHUNK]
        v = v_ids[lo:lo + _CHUNK]
        dist = _torus_dist(pos[u], pos[v], side)
        p = connection_probability(w[u], w[v], dist, d, alpha, c)
        if pbar is not None:
            p = p / pbar
        keep = rng.random(u.size) < p
        sink.add(u[keep], v[keep])


def _process_stencil(sink, rng, bi, bj, same, pos, w, side, d, alpha, c):
    """Exact enumeration of pairs in identical or adjacent cells."""
    grid = bi.grid
    n_i = bi.ids.size
    if n_i == 0 or bj.ids.size == 0:
        return
    axes_i = np.empty((n_i, d), dtype=np.int64)
    rem = bi.cells.copy()
    for a in range(d - 1, -1, -1):
        axes_i[:, a] = rem % grid
        rem //= grid

    if same:
        # within-cell pairs, local order u before v
        rank = np.arange(n_i, dtype=np.int64) - bi.off[bi.cells]
        k = bi.cnt[bi.cells] - rank - 1
        within, tot = _expand_counts(k)
        if tot:
            u_pos = np.repeat(np.arange(n_i, dtype=np.int64), k)
            v_pos = u_pos + 1 + within
            _bernoulli_pairs(sink, rng, bi.ids[u_pos], bi.ids[v_pos],
                             pos, w, side, d, alpha, c)

    if grid == 1:
        if not same:
            u_pos = np.repeat(np.arange(n_i, dtype=np.int64), bj.ids.size)
            v_pos = np.tile(np.arange(bj.ids.size, dtype=np.int64), n_i)
            _bernoulli_pairs(sink, rng, bi.ids[u_pos], bj.ids[v_pos],
                             pos, w, side, d, alpha, c)
        return

    deltas = itertools.product(*[range(-1, 2) if grid >= 3 else range(2)
                                 for _ in range(d)])
    for delta in deltas:
        if same and all(x == 0 for x in delta):
            continue  # handled above
        if not same and all(x == 0 for x in delta):
            ncell = bi.cells
        else:
            axes_n = (axes_i + np.asarray(delta, dtype=np.int64)) % grid
            ncell = axes_n[:, 0].copy()
            for a in range(1, d):
                ncell = ncell * grid + axes_n[:, a]
        if same:
            # each unordered cell pair once
            mask = bi.cells < ncell
            if not np.any(mask):
                continue
            src = np.flatnonzero(mask)
            nc = ncell[mask]
        else:
            src = np.arange(n_i, dtype=np.int64)
            nc = ncell
        k = bj.cnt[nc]
        within, tot = _expand_counts(k)
        if tot == 0:
            continue
        u_pos = np.repeat(src, k)
        v_pos = np.repeat(bj.off[nc], k) + within
        _bernoulli_pairs(sink, rng, bi.ids[u_pos], bj.ids[v_pos],
                         pos, w, side, d, alpha, c)


def _cnt_field(bucket_cnt, grid, d):
    return bucket_cnt.reshape((grid,) * d)


def _process_shells(sink, rng, nodes_i, nodes_j, same, wtop_prod, grid0,
                    pos, w, side, d, alpha, c, ids_i, ids_j):
    """Pairs in non-adjacent cells, handled level by level.

    A pair of cells is processed at the level where they are non-adjacent
    but their parent cells (one level coarser) are adjacent; this partitions
    all non-stencil pairs exactly once.  A Binomial number of candidate
    pairs is drawn under a constant probability bound per displacement class
    and thinned with the exact kernel.
    """
    grid = grid0
    level_idx = {}
    pending = []  # (pbar, u_ids, v_ids) candidate batches, thinned at the end

    def index_at(grid_l, which):
        key = (grid_l, which)
        if key not in level_idx:
            ids = ids_i if which == 0 else ids_j
            nodes = nodes_i if which == 0 else nodes_j
            axes = np.floor(nodes / (side / grid_l)).astype(np.int64)
            np.clip(axes, 0, grid_l - 1, out=axes)
            level_idx[key] = _BucketIndex(ids, axes, grid_l, d)
        return level_idx[key]

    while grid >= 4:
        gp = grid // 2
        cell_side = side / grid
        bi = index_at(grid, 0)
        bj = bi if same else index_at(grid, 1)
        fi = _cnt_field(bi.cnt, grid, d)
        fj = _cnt_field(bj.cnt, grid, d)
        # per-axis downsampled views at parity offsets
        sub_i = {}
        sub_j = {}
        for offs in itertools.product((0, 1), repeat=d):
            sl = tuple(slice(o, None, 2) for o in offs)
            sub_i[offs] = fi[sl]
            sub_j[offs] = fj[sl]
        p_axes = np.indices((gp,) * d).reshape(d, -1)

        dp_range = range(-1, 2) if gp >= 3 else range(2)
        for dp in itertools.product(dp_range, repeat=d):
            for d1 in itertools.product((0, 1), repeat=d):
                for d2 in itertools.product((0, 1), repeat=d):
                    dc = tuple(2 * a + b2 - b1
                               for a, b2, b1 in zip(dp, d2, d1))
                    mi = [int(_min_image(np.int64(x), grid)) for x in dc]
                    if max(mi) < 2:
                        continue  # adjacent at this level: finer levels' job
                    gaps = np.array([max(m - 1, 0) for m in mi], dtype=float)
                    r_min = cell_side * math.sqrt(float(np.sum(gaps ** 2)))
                    pbar = _pbar(wtop_prod, r_min, d, alpha, c)
                    if pbar <= 0.0:
                        continue
                    a_field = sub_i[d1]
                    b_field = np.roll(sub_j[d2], shift=tuple(-x for x in dp),
                                      axis=tuple(range(d)))
                    m_field = (a_field * b_field).ravel()
                    # flat cell ids of both sides for every parent cell
                    c1 = 2 * p_axes[0] + d1[0]
                    c2 = (2 * (p_axes[0] + dp[0]) + d2[0]) % grid
                    for a in range(1, d):
                        c1 = c1 * grid + 2 * p_axes[a] + d1[a]
                        c2 = c2 * grid + (2 * (p_axes[a] + dp[a])
                                          + d2[a]) % grid
                    if same:
                        # keep each unordered cell pair exactly once
                        m_field = np.where(c1 < c2, m_field, 0)
                    nz = np.flatnonzero(m_field)
                    if nz.size == 0:
                        continue
                    kdraw = rng.binomial(m_field[nz], pbar)
                    hot = np.flatnonzero(kdraw)
                    if hot.size == 0:
                        continue
                    hot_nz = nz[hot]
                    kk = kdraw[hot]
                    c1h = c1[hot_nz]
                    c2h = c2[hot_nz]
                    cnt2 = bj.cnt[c2h]
                    # distinct uniform pair indices per cell pair: draw with
                    # replacement, then redraw collisions until none remain
                    tot = bi.cnt[c1h] * cnt2
                    rep_tot = np.repeat(tot, kk)
                    rep_grp = np.repeat(np.arange(hot.size), kk)
                    rep_cnt2 = np.repeat(cnt2, kk)
                    idx = rng.integers(0, rep_tot)
                    if np.any(kk > 1):
                        while True:
                            order = np.lexsort((idx, rep_grp))
                            dup = ((rep_grp[order][1:] == rep_grp[order][:-1])
                                   & (idx[order][1:] == idx[order][:-1]))
                            if not dup.any():
                                break
                            slots = order[1:][dup]
                            idx[slots] = rng.integers(0, rep_tot[slots])
                    off1 = np.repeat(bi.off[c1h], kk)
                    off2 = np.repeat(bj.off[c2h], kk)
                    u_ids = bi.ids[off1 + idx // rep_cnt2]
                    v_ids = bj.ids[off2 + idx % rep_cnt2]
                    pending.append((pbar, u_ids, v_ids))
        grid = gp

    if pending:
        u_all = np.concatenate([u for _, u, _ in pending])
        v_all = np.concatenate([v for _, _, v in pending])
        pb_all = np.concatenate([np.full(u.size, pb)
                                 for pb, u, _ in pending])
        for lo in range(0, u_all.size, _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            u, v, pb = u_all[sl], v_all[sl], pb_all[sl]
            dist = _torus_dist(pos[u], pos[v], side)
            p = connection_probability(w[u], w[v], dist, d, alpha, c)
            keep = rng.random(u.size) * pb < p
            sink.add(u[keep], v[keep])


def _stencil_deltas(grid, d):
    if grid == 1:
        rng = (0,)
    elif grid == 2:
        rng = (0, 1)
    else:
        rng = (-1, 0, 1)
    return np.array(list(itertools.product(rng, repeat=d)), dtype=np.int64)


def _level_combos(grid, d, wtop_prod, cell_side, alpha, c):
    """Displacement classes processed at one level: parent displacement,
    both parity offsets, and the probability bound from the minimal
    possible distance."""
    gp = grid // 2
    dp_range = range(-1, 2) if gp >= 3 else range(2)
    dps, d1s, d2s, pbars = [], [], [], []
    for dp in itertools.product(dp_range, repeat=d):
        for d1 in itertools.product((0, 1), repeat=d):
            for d2 in itertools.product((0, 1), repeat=d):
                dc = tuple(2 * a + b2 - b1
                           for a, b2, b1 in zip(dp, d2, d1))
                mi = [int(_min_image(np.int64(x), grid)) for x in dc]
                if max(mi) < 2:
                    continue
                gaps = np.array([max(m - 1, 0) for m in mi], dtype=float)
                r_min = cell_side * math.sqrt(float(np.sum(gaps ** 2)))
                pbar = _pbar(wtop_prod, r_min, d, alpha, c)
                if pbar <= 0.0:
                    continue
                dps.append(dp)
                d1s.append(d1)
                d2s.append(d2)
                pbars.append(pbar)
    if not dps:
        return None
    return (np.array(dps, dtype=np.int64), np.array(d1s, dtype=np.int64),
            np.array(d2s, dtype=np.int64), np.array(pbars, dtype=float))


def _bucket_index_at(ids, pos, side, grid, d):
    axes = np.clip(np.floor(pos[ids] / (side / grid)).astype(np.int64),
                   0, grid - 1)
    return _BucketIndex(ids, axes, grid, d)


def _pair_fast(sink, seed_seq, bi_ids, bj_ids, same, wtop_prod, grid0,
               pos, w, side, d, alpha, c):
    states = seed_seq.generate_state(32)
    bi = _bucket_index_at(bi_ids, pos, side, grid0, d)
    bj = bi if same else _bucket_index_at(bj_ids, pos, side, grid0, d)
    eu, ev = _fast.stencil_kernel(
        bi.ids, bi.cells, bi.off, bj.ids, bj.off, grid0, d, same,
        _stencil_deltas(grid0, d), pos, w, side, float(alpha), c,
        int(states[0]) & 0x7FFFFFFF)
    sink.add(eu, ev)
    grid = grid0
    lvl = 1
    while grid >= 4:
        combos = _level_combos(grid, d, wtop_prod, side / grid, alpha, c)
        if combos is not None:
            if grid != grid0:
                bi = _bucket_index_at(bi_ids, pos, side, grid, d)
                bj = bi if same else _bucket_index_at(bj_ids, pos, side,
                                                      grid, d)
            dps, d1s, d2s, pbars = combos
            eu, ev = _fast.shell_kernel(
                bi.ids, bi.off, bj.ids, bj.off, grid, d, same,
                dps, d1s, d2s, pbars, pos, w, side, float(alpha), c,
                int(states[lvl]) & 0x7FFFFFFF)
            sink.add(eu, ev)
        grid //= 2
        lvl += 1


def _grid_edges(pos, w, side, d, alpha, c, seed, max_edges, engine="auto"):
    n = len(w)
    sink = _EdgeSink(max_edges)
    if n < 2:
        return sink.edges()
    use_fast = _fast.HAVE_NUMBA and engine != "numpy"

    w_heavy = side ** (d / 2.0)  # clamp radius of two such nodes spans torus
    heavy = np.flatnonzero(w >= w_heavy)
    light = np.flatnonzero(w < w_heavy)

    # heavy nodes: exact kernel against everything
    rng_h = np.random.default_rng(np.random.SeedSequence(seed,
                                                         spawn_key=(1,)))
    heavy_sorted = np.sort(heavy)
    for k, h in enumerate(heavy_sorted):
        targets = np.concatenate((light, heavy_sorted[k + 1:]))
        if targets.size == 0:
            continue
        _bernoulli_pairs(sink, rng_h, np.full(targets.size, h),
                         targets, pos, w, side, d, alpha, c)

    if light.size == 0:
        return sink.edges()

    wl = w[light]
    b_idx = np.floor(np.log2(wl)).astype(np.int64)
    n_buckets = int(b_idx.max()) + 1
    buckets = [light[b_idx == i] for i in range(n_buckets)]
    wtops = [min(2.0 ** (i + 1), w_heavy) for i in range(n_buckets)]

    for i in range(n_buckets):
        if buckets[i].size == 0:
            continue
        for j in range(i, n_buckets):
            if buckets[j].size == 0:
                continue
            same = i == j
            wtop_prod = wtops[i] * wtops[j]
            r_clamp = wtop_prod ** (1.0 / d)
            grid = _grid_levels(side, r_clamp)
            if use_fast:
                ss = np.random.SeedSequence(seed, spawn_key=(2, i, j))
                _pair_fast(sink, ss, buckets[i], buckets[j], same,
                           wtop_prod, grid, pos, w, side, d, alpha, c)
                continue
            rng = np.random.default_rng(
                np.random.SeedSequence(seed, spawn_key=(2, i, j)))
            bi = _bucket_index_at(buckets[i], pos, side, grid, d)
            bj = bi if same else _bucket_index_at(buckets[j], pos, side,
                                                  grid, d)
            _process_stencil(sink, rng, bi, bj, same, pos, w, side, d,
                             alpha, c)
            if grid >= 4:
                _process_shells(sink, rng, pos[buckets[i]],
                                pos[buckets[j]], same, wtop_prod, grid,
                                pos, w, side, d, alpha, c,
                                buckets[i], buckets[j])
    return sink.edges()


def sample_girg(params: GirgParams, max_nodes=20_000_000,
                max_edges=300_000_000, engine="auto") -> SpatialGraph:
    """Sample a GIRG with the cell-hierarchy sampler.

    Distribution-equivalent to :func:`sample_girg_naive`; deterministic for
    a fixed seed and engine ("auto" uses compiled kernels when numba is
    installed, "numpy" forces the vectorized fallback).
    """
    if params.d > 3:
        if params.n > 10_000:
            raise ParameterError("d > 3 sampling falls back to the naive "
                                 "pair loop and is limited to n <= 1e4")
        return sample_girg_naive(params, max_nodes)
    pos, w = _draw_nodes(params, max_nodes)
    edges = _grid_edges(pos, w, params.side, params.d, params.alpha,
                        params.c, params.seed, max_edges, engine=engine)
    return SpatialGraph(pos, edges, w, METRIC_TORUS, params.side, check=False)
