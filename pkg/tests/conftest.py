import json
import os

import numpy as np
import pytest

from spreadlab.core_graph import METRIC_EUCLIDEAN, METRIC_TORUS, SpatialGraph

REPORT_PATH = os.path.join(os.path.dirname(__file__), "_acceptance_report.json")


def pytest_configure(config):
    if os.path.exists(REPORT_PATH):
        os.remove(REPORT_PATH)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not os.path.exists(REPORT_PATH):
        return
    with open(REPORT_PATH) as fh:
        lines = json.load(fh)
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)


@pytest.fixture
def path_graph():
    """0-1-2-3-4 path on a line, unit spacing."""
    pos = np.column_stack((np.arange(5.0), np.zeros(5)))
    edges = [(i, i + 1) for i in range(4)]
    return SpatialGraph(pos, edges, None, METRIC_EUCLIDEAN, 0.0)


@pytest.fixture
def triangle_graph():
    pos = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return SpatialGraph(pos, [(0, 1), (1, 2), (0, 2)], None,
                        METRIC_EUCLIDEAN, 0.0)


def brute_force_times(g, costs, source):
    """Minimum cost over all simple paths; exponential-time oracle."""
    import math

    adj = {i: {} for i in range(g.n)}
    rev = costs.cost if costs.cost_rev is None else costs.cost_rev
    for k, (u, v) in enumerate(g.edges):
        adj[u][v] = min(adj[u].get(v, math.inf), costs.cost[k])
        adj[v][u] = min(adj[v].get(u, math.inf), rev[k])
    best = np.full(g.n, math.inf)
    best[source] = 0.0

    def walk(node, used, acc):
        for nxt, w in adj[node].items():
            if nxt in used:
                continue
            t = acc + w
            if t < best[nxt]:
                best[nxt] = t
            walk(nxt, used | {nxt}, t)

    walk(source, {source}, 0.0)
    return best


def random_connected_graph(rng, n_max=8, metric=METRIC_TORUS, side=10.0):
    """Small random connected graph with random positive edge set."""
    n = int(rng.integers(2, n_max + 1))
    pos = rng.random((n, 2)) * side
    edges = set()
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):  # random spanning tree
        edges.add((min(a, b), max(a, b)))
    extra = rng.integers(0, n * (n - 1) // 2 + 1)
    for _ in range(extra):
        a, b = rng.integers(0, n, 2)
        if a != b:
            edges.add((min(a, b), max(a, b)))
    w = 1.0 + rng.random(n) * 3
    return SpatialGraph(pos, sorted(edges), w, metric, side)
