"""One-dependent FPP transmission costs and single-source SI spreading.

Each edge draws an independent unit-mean exponential factor; the transmission
cost multiplies it by degree/weight penalties and a distance penalty with the
edge length floored at 1.  Infection times are exact shortest-path distances
under these costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .core_graph import SpatialGraph
from .errors import AlignmentError, ConfigurationError, ValidationError

BASE_WEIGHT = "weight"
BASE_DEGREE = "degree"


@dataclass(frozen=True)
class PenaltyParams:
    """Transmission-rate penalties: sender exponent mu, receiver exponent nu
    (defaults to mu), distance exponent zeta, rate scale beta."""

    mu: float
    zeta: float
    nu: float | None = None
    beta: float = 1.0
    penalty_base: str = BASE_WEIGHT

    def __post_init__(self):
        if self.nu is None:
            object.__setattr__(self, "nu", self.mu)
        if self.mu < 0 or self.nu < 0 or self.zeta < 0:
            raise ValidationError("penalty exponents must be nonnegative")
        if not self.beta > 0:
            raise ValidationError("beta must be positive")
        if self.penalty_base not in (BASE_WEIGHT, BASE_DEGREE):
            raise ValidationError("penalty_base must be 'weight' or 'degree'")

    @property
    def symmetric(self):
        return self.mu == self.nu


@dataclass
class CostAssignment:
    """Per-edge exponential draws and resulting transmission costs.

    ``cost[k]`` is the cost of edge k from the lower to the higher endpoint;
    ``cost_rev`` (only when mu != nu) is the opposite direction sharing the
    same exponential draw.
    """

    y: np.ndarray
    cost: np.ndarray
    cost_rev: np.ndarray | None
    params: PenaltyParams
    seed: int
    _csr: csr_matrix | None = field(default=None, repr=False)


def assign_costs(g: SpatialGraph, p: PenaltyParams, seed) -> CostAssignment:
    """Draw Exp(1) factors and compute costs
    (Y/beta) * b_u^mu * b_v^nu * max(len, 1)^zeta."""
    if p.penalty_base == BASE_WEIGHT:
        base = g.weights
        if base is None or len(base) != g.n:
            raise ConfigurationError("weight mode requires node weights")
    else:
        base = g.degrees.astype(float)
    rng = np.random.default_rng(seed)
    y = rng.exponential(1.0, g.m)
    lenpen = np.maximum(g.lengths, 1.0) ** p.zeta
    bu = base[g.edges[:, 0]]
    bv = base[g.edges[:, 1]]
    common = (y / p.beta) * lenpen
    cost = common * bu ** p.mu * bv ** p.nu
    cost_rev = None if p.symmetric else common * bv ** p.mu * bu ** p.nu
    return CostAssignment(y, cost, cost_rev, p, seed)


@dataclass(frozen=True)
class SpreadResult:
    """Per-node infection times, infection order and shortest-path tree."""

    source: int
    times: np.ndarray
    order: np.ndarray        # rank among reached nodes, -1 if unreached
    predecessor: np.ndarray  # parent in the tree, -1 for source/unreached
    seed: int

    @property
    def reached(self):
        return np.flatnonzero(np.isfinite(self.times))

    def ranked_nodes(self):
        """Reached nodes sorted by (time, id)."""
        idx = self.reached
        return idx[np.lexsort((idx, self.times[idx]))]


def _cost_csr(g: SpatialGraph, costs: CostAssignment) -> csr_matrix:
    if costs._csr is not None:
        return costs._csr
    u = g.edges[:, 0]
    v = g.edges[:, 1]
    rev = costs.cost if costs.cost_rev is None else costs.cost_rev
    rows = np.concatenate((u, v))
    cols = np.concatenate((v, u))
    data = np.concatenate((costs.cost, rev))
    mat = csr_matrix((data, (rows, cols)), shape=(g.n, g.n))
    costs._csr = mat
    return mat


def spread_from(g: SpatialGraph, costs: CostAssignment, source) -> SpreadResult:
    """Exact single-source shortest-path infection times (Dijkstra)."""
    source = int(source)
    if not 0 <= source < g.n:
        raise ValidationError(f"source {source} not a node id")
    mat = _cost_csr(g, costs)
    times, pred = dijkstra(mat, directed=True, indices=source,
                           return_predecessors=True)
    pred = pred.astype(np.int64)
    pred[pred < 0] = -1
    reached = np.flatnonzero(np.isfinite(times))
    order = np.full(g.n, -1, dtype=np.int64)
    ranked = reached[np.lexsort((reached, times[reached]))]
    order[ranked] = np.arange(ranked.size)
    return SpreadResult(source, times, order, pred, costs.seed)


@dataclass(frozen=True)
class EpidemicCurve:
    """Times at which the number of infected first reaches sampled counts."""

    counts: np.ndarray
    times: np.ndarray
    total: int


def curve_grid(total):
    """Sampled counts: 1..31, then the five-most-significant-bit values
    2^k + m 2^(k-4) for k >= 5, plus the final count."""
    if total < 1:
        raise ValidationError("need at least one reached node")
    pts = set(range(1, min(31, total) + 1))
    k = 5
    while (1 << k) <= total:
        step = 1 << (k - 4)
        for m in range(16):
            val = (1 << k) + m * step
            if val <= total:
                pts.add(val)
        k += 1
    pts.add(total)
    return np.array(sorted(pts), dtype=np.int64)


def epidemic_curve(r: SpreadResult) -> EpidemicCurve:
    """Curve I(t) sampled on the bit-expansion count grid."""
    idx = r.reached
    if idx.size == 0:
        raise ValidationError("no reached nodes")
    t_sorted = np.sort(r.times[idx])
    grid = curve_grid(idx.size)
    return EpidemicCurve(grid, t_sorted[grid - 1], int(idx.size))


def curve_quantiles(curves, q=(0.5, 0.25, 0.75)):
    """Per-count empirical quantiles of the time across runs.

    All curves must share one sampling grid (same graph, same totals).
    Returns (counts, {quantile: times}).
    """
    if not curves:
        raise ValidationError("need at least one curve")
    ref = curves[0].counts
    for c in curves[1:]:
        if c.counts.shape != ref.shape or np.any(c.counts != ref):
            raise AlignmentError("curves sampled on different count grids")
    stack = np.vstack([c.times for c in curves])
    return ref, {qq: np.quantile(stack, qq, axis=0) for qq in q}


def saturation_time(c: EpidemicCurve, frac) -> float:
    """First sampled time at which the count reaches ceil(frac * total)."""
    if not 0 < frac <= 1:
        raise ValidationError("frac must lie in (0, 1]")
    target = math.ceil(frac * c.total)
    if target < 1:
        raise ValidationError("frac * total must reach at least one node")
    pos = np.searchsorted(c.counts, target)
    return float(c.times[pos])


def infection_path(r: SpreadResult, target):
    """Node list from source to target along the tree; None if unreached."""
    target = int(target)
    if not np.isfinite(r.times[target]):
        return None
    path = [target]
    while path[-1] != r.source:
        path.append(int(r.predecessor[path[-1]]))
    return path[::-1]


@dataclass(frozen=True)
class HeatmapGrid:
    """Normalized infection-order rank of the first infected node per box.

    Boxes without any reached node carry NaN."""

    rank: np.ndarray   # (boxes, boxes), NaN = empty
    extent: tuple      # (x0, y0, x1, y1) in position coordinates

    def nonempty(self):
        bx, by = np.nonzero(np.isfinite(self.rank))
        return bx, by, self.rank[bx, by]


def heatmap_grid(r: SpreadResult, g: SpatialGraph, boxes_per_side,
                 crop=None) -> HeatmapGrid:
    """Bin reached nodes into a square grid of boxes; each box takes the
    infection-order rank (within the crop, normalized to [0, 1]) of its
    earliest-infected node."""
    if g.dim != 2:
        raise ValidationError("heatmap requires 2-dimensional positions")
    if boxes_per_side < 1:
        raise ValidationError("boxes_per_side must be positive")
    pos = g.positions
    if crop is None:
        if g.metric == "torus":
            x0 = y0 = 0.0
            x1 = y1 = g.metric_param
        else:
            x0, y0 = pos.min(axis=0)
            x1, y1 = pos.max(axis=0)
            pad = max(x1 - x0, y1 - y0, 1.0) * 1e-9
            x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    else:
        x0, y0, x1, y1 = map(float, crop)
    if not (x1 > x0 and y1 > y0):
        raise ValidationError("degenerate crop box")

    reached = r.reached
    inside = reached[(pos[reached, 0] >= x0) & (pos[reached, 0] <= x1)
                     & (pos[reached, 1] >= y0) & (pos[reached, 1] <= y1)]
    grid = np.full((boxes_per_side, boxes_per_side), np.nan)
    if inside.size == 0:
        return HeatmapGrid(grid, (x0, y0, x1, y1))

    ranked = inside[np.lexsort((inside, r.times[inside]))]
    denom = max(ranked.size - 1, 1)
    bx = np.minimum(((pos[ranked, 0] - x0) / (x1 - x0)
                     * boxes_per_side).astype(np.int64), boxes_per_side - 1)
    by = np.minimum(((pos[ranked, 1] - y0) / (y1 - y0)
                     * boxes_per_side).astype(np.int64), boxes_per_side - 1)
    # iterate in infection order; first write per box wins
    flat = bx * boxes_per_side + by
    first_idx = np.unique(flat, return_index=True)[1]
    ranks = np.arange(ranked.size, dtype=float) / denom
    grid[bx[first_idx], by[first_idx]] = ranks[first_idx]
    return HeatmapGrid(grid, (x0, y0, x1, y1))
