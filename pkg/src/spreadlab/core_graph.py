"""Spatial graph storage, torus/Haversine geometry, components and degree statistics.

The :class:`SpatialGraph` is the substrate shared by the samplers, the
spreading simulator, the rewiring chain and the estimators.  It is immutable
after construction: all arrays are marked read-only so instances can be
shared freely across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .errors import DataError, DimensionError, ValidationError

EARTH_RADIUS_KM = 6371.0088

METRIC_TORUS = "torus"
METRIC_EUCLIDEAN = "euclidean"
METRIC_HAVERSINE = "haversine"

_METRICS = (METRIC_TORUS, METRIC_EUCLIDEAN, METRIC_HAVERSINE)


# ---------------------------------------------------------------------------
# geometry


def torus_distance(a, b, side):
    """Shortest wrap-around Euclidean distance on a torus with the given side.

    Coordinates must lie in [0, side) per axis.  Accepts single points or
    arrays of points broadcast against each other.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(
            f"coordinate dimensions differ: {a.shape[-1]} vs {b.shape[-1]}"
        )
    side = float(side)
    if np.any(a < 0) or np.any(a >= side) or np.any(b < 0) or np.any(b >= side):
        raise ValidationError(f"coordinates must lie in [0, {side}) per axis")
    delta = np.abs(a - b)
    delta = np.minimum(delta, side - delta)
    return np.sqrt(np.sum(delta * delta, axis=-1))


def haversine_km(a, b, radius_km=EARTH_RADIUS_KM):
    """Great-circle distance in km between (lat, lon) points in degrees."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != 2 or b.shape[-1] != 2:
        raise DimensionError("haversine expects (lat, lon) pairs")
    for p in (a, b):
        lat = p[..., 0]
        lon = p[..., 1]
        if np.any(np.abs(lat) > 90.0) or np.any(np.abs(lon) > 180.0):
            raise ValidationError("lat must be in [-90, 90], lon in [-180, 180]")
    lat1, lon1 = np.radians(a[..., 0]), np.radians(a[..., 1])
    lat2, lon2 = np.radians(b[..., 0]), np.radians(b[..., 1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = np.sin(dlat / 2.0) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2.0) ** 2
    return 2.0 * radius_km * np.arcsin(np.minimum(1.0, np.sqrt(h)))


# ---------------------------------------------------------------------------
# graph types


@dataclass(frozen=True)
class NodeRecord:
    """One node: dense integer id, position, weight and degree."""

    id: int
    pos: np.ndarray
    weight: float
    degree: int


@dataclass(frozen=True)
class ComponentLabeling:
    """Partition of the node set into connected components."""

    labels: np.ndarray
    sizes: np.ndarray
    largest_label: int


@dataclass(frozen=True)
class DegreeStats:
    mean: float
    min: int
    max: int
    histogram: np.ndarray  # histogram[k] = number of nodes with degree k


class SpatialGraph:
    """Immutable undirected graph with node positions, weights and edge lengths.

    Edges are stored once with u < v; lengths are precomputed at build time so
    downstream cost assignment never recomputes geometry.
    """

    def __init__(self, positions, edges, weights=None, metric=METRIC_TORUS,
                 metric_param=0.0, check=True):
        positions = np.ascontiguousarray(positions, dtype=float)
        if positions.ndim != 2:
            raise ValidationError("positions must be an (n, d) array")
        n, dim = positions.shape
        edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        if weights is None:
            weights = np.ones(n, dtype=float)
        weights = np.ascontiguousarray(weights, dtype=float)
        if metric not in _METRICS:
            raise ValidationError(f"unknown metric {metric!r}")
        if metric == METRIC_HAVERSINE and dim != 2:
            raise DimensionError("haversine metric requires (lat, lon) positions")

        if check and edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ValidationError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValidationError("self-loops are not allowed")
        # canonical orientation u < v, then lexicographic order
        if edges.size:
            u = np.minimum(edges[:, 0], edges[:, 1])
            v = np.maximum(edges[:, 0], edges[:, 1])
            key = u * n + v
            order = np.argsort(key, kind="stable")
            key = key[order]
            edges = np.empty((len(u), 2), dtype=np.int64)
            edges[:, 0] = u[order]
            edges[:, 1] = v[order]
            if check and np.any(key[1:] == key[:-1]):
                raise ValidationError("duplicate edges are not allowed")

        self.positions = positions
        self.weights = weights
        self.edges = edges
        self.metric = metric
        self.metric_param = float(metric_param)
        self.dim = dim
        self.lengths = self.edge_lengths(edges)
        self.degrees = np.bincount(edges.ravel(), minlength=n).astype(np.int64)
        for arr in (self.positions, self.weights, self.edges, self.lengths,
                    self.degrees):
            arr.setflags(write=False)

    # -- basic accessors ----------------------------------------------------

    @property
    def n(self):
        return self.positions.shape[0]

    @property
    def m(self):
        return self.edges.shape[0]

    def node(self, i):
        return NodeRecord(int(i), self.positions[i], float(self.weights[i]),
                          int(self.degrees[i]))

    def pair_distance(self, a_pos, b_pos):
        """Distance between raw coordinates under this graph's metric."""
        if self.metric == METRIC_TORUS:
            return torus_distance(a_pos, b_pos, self.metric_param)
        if self.metric == METRIC_HAVERSINE:
            return haversine_km(a_pos, b_pos, self.metric_param)
        a = np.asarray(a_pos, dtype=float)
        b = np.asarray(b_pos, dtype=float)
        return np.sqrt(np.sum((a - b) ** 2, axis=-1))

    def edge_lengths(self, edges):
        if len(edges) == 0:
            return np.zeros(0, dtype=float)
        return self.pair_distance(self.positions[edges[:, 0]],
                                  self.positions[edges[:, 1]])

    def with_edges(self, edges):
        """New graph on the same node set with a different edge list."""
        return SpatialGraph(self.positions, edges, self.weights, self.metric,
                            self.metric_param)

    def validate(self, rel_tol=1e-9):
        """Re-check structural invariants, including stored edge lengths."""
        recomputed = self.edge_lengths(self.edges)
        scale = np.maximum(np.abs(recomputed), 1.0)
        if np.any(np.abs(recomputed - self.lengths) > rel_tol * scale):
            raise ValidationError("stored edge length disagrees with metric")
        return True


# ---------------------------------------------------------------------------
# operations


def connected_components(g: SpatialGraph) -> ComponentLabeling:
    """Label connected components; labels are assigned in order of the
    smallest node id they contain, so the result does not depend on edge
    order."""
    n = g.n
    if n == 0:
        return ComponentLabeling(np.zeros(0, dtype=np.int64),
                                 np.zeros(0, dtype=np.int64), -1)
    if g.m == 0:
        labels = np.arange(n, dtype=np.int64)
    else:
        mat = csr_matrix(
            (np.ones(g.m, dtype=np.int8), (g.edges[:, 0], g.edges[:, 1])),
            shape=(n, n),
        )
        _, raw = _cc(mat, directed=False)
        # relabel by first occurrence (node-id order)
        first = np.full(raw.max() + 1, -1, dtype=np.int64)
        nxt = 0
        labels = np.empty(n, dtype=np.int64)
        for i, r in enumerate(raw):
            if first[r] < 0:
                first[r] = nxt
                nxt += 1
            labels[i] = first[r]
    sizes = np.bincount(labels)
    largest = int(np.argmax(sizes))  # ties resolve to the smallest label
    return ComponentLabeling(labels, sizes.astype(np.int64), largest)


def largest_component_subgraph(g: SpatialGraph):
    """Induced subgraph on the largest connected component.

    Returns (subgraph, old_ids) where ``old_ids[new_id] = original id``.
    """
    comp = connected_components(g)
    keep = np.flatnonzero(comp.labels == comp.largest_label)
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[keep] = np.arange(keep.size)
    mask = (comp.labels[g.edges[:, 0]] == comp.largest_label)
    edges = remap[g.edges[mask]]
    sub = SpatialGraph(g.positions[keep], edges, g.weights[keep], g.metric,
                       g.metric_param, check=False)
    return sub, keep


def degree_stats(g: SpatialGraph) -> DegreeStats:
    """Exact degree statistics; mean is 2|E|/n."""
    if g.n == 0:
        return DegreeStats(0.0, 0, 0, np.zeros(1, dtype=np.int64))
    deg = g.degrees
    hist = np.bincount(deg).astype(np.int64)
    return DegreeStats(2.0 * g.m / g.n, int(deg.min()), int(deg.max()), hist)


# ---------------------------------------------------------------------------
# sgraph v1 file format

_FMT = "%.17g"


def save_sgraph(g: SpatialGraph, path):
    """Write the graph as 'sgraph v1' TSV.  Lengths are recomputed on load."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#sgraph 1 {g.n} {g.m} {g.dim} {g.metric} "
                 f"{_FMT % g.metric_param}\n")
        buf = io.StringIO()
        for i in range(g.n):
            coords = "\t".join(_FMT % x for x in g.positions[i])
            buf.write(f"{i}\t{coords}\t{_FMT % g.weights[i]}\n")
        fh.write(buf.getvalue())
        buf = io.StringIO()
        for u, v in g.edges:
            buf.write(f"{u}\t{v}\n")
        fh.write(buf.getvalue())


def load_sgraph(path) -> SpatialGraph:
    """Read an 'sgraph v1' file written by :func:`save_sgraph`."""
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        header = fh.readline().split()
        if len(header) != 7 or header[0] != "#sgraph" or header[1] != "1":
            raise DataError(f"{path}: not an sgraph v1 file")
        n, m, dim = int(header[2]), int(header[3]), int(header[4])
        metric, param = header[5], float(header[6])
        positions = np.empty((n, dim), dtype=float)
        weights = np.empty(n, dtype=float)
        for i in range(n):
            parts = fh.readline().split("\t")
            if len(parts) != dim + 2:
                raise DataError(f"{path}: bad node line {i}")
            if int(parts[0]) != i:
                raise DataError(f"{path}: node ids must be dense 0..n-1")
            positions[i] = [float(x) for x in parts[1:1 + dim]]
            weights[i] = float(parts[dim + 1])
        edges = np.empty((m, 2), dtype=np.int64)
        for j in range(m):
            parts = fh.readline().split()
            if len(parts) != 2:
                raise DataError(f"{path}: bad edge line {j}")
            edges[j] = (int(parts[0]), int(parts[1]))
    return SpatialGraph(positions, edges, weights, metric, param)
