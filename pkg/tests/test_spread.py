import itertools
import math

import numpy as np
import pytest

from spreadlab.core_graph import METRIC_EUCLIDEAN, METRIC_TORUS, SpatialGraph
from spreadlab.errors import AlignmentError, ValidationError
from spreadlab.spread import (CostAssignment, PenaltyParams, assign_costs,
                              curve_grid, curve_quantiles, epidemic_curve,
                              heatmap_grid, infection_path, saturation_time,
                              spread_from)

from conftest import brute_force_times, random_connected_graph


def two_node_graph(cost_value):
    pos = np.array([[0.0, 0.0], [1.0, 0.0]])
    g = SpatialGraph(pos, [(0, 1)], None, METRIC_EUCLIDEAN, 0.0)
    costs = CostAssignment(np.array([cost_value]), np.array([cost_value]),
                           None, PenaltyParams(0.0, 0.0), 0)
    return g, costs


class TestAssignCosts:
    def test_unit_collapse(self, path_graph):
        # all weights 1, lengths 1 (floored), beta 1: cost equals the draw
        p = PenaltyParams(mu=2.0, zeta=3.0)
        costs = assign_costs(path_graph, p, seed=1)
        assert costs.cost == pytest.approx(costs.y)

    def test_hand_formula(self):
        pos = np.array([[0.0, 0.0], [10.0, 0.0]])
        g = SpatialGraph(pos, [(0, 1)], np.array([2.0, 3.0]),
                         METRIC_EUCLIDEAN, 0.0)
        p = PenaltyParams(mu=1.0, zeta=2.0)
        costs = assign_costs(g, p, seed=4)
        # cost / Y = W_u W_v len^2 = 6 * 100
        assert costs.cost / costs.y == pytest.approx([600.0])

    def test_beta_scale(self, path_graph):
        p = PenaltyParams(mu=0.0, zeta=0.0, beta=2.0)
        costs = assign_costs(path_graph, p, seed=7)
        assert costs.cost == pytest.approx(costs.y / 2.0)
        assert costs.y.mean() == pytest.approx(1.0, abs=1.5)

    def test_degree_base(self, path_graph):
        p = PenaltyParams(mu=1.0, zeta=0.0, penalty_base="degree")
        costs = assign_costs(path_graph, p, seed=2)
        deg = path_graph.degrees
        expect = deg[path_graph.edges[:, 0]] * deg[path_graph.edges[:, 1]]
        assert costs.cost / costs.y == pytest.approx(expect.astype(float))

    def test_asymmetric_costs(self):
        pos = np.array([[0.0, 0.0], [10.0, 0.0]])
        g = SpatialGraph(pos, [(0, 1)], np.array([2.0, 3.0]),
                         METRIC_EUCLIDEAN, 0.0)
        p = PenaltyParams(mu=1.0, zeta=0.0, nu=2.0)
        costs = assign_costs(g, p, seed=4)
        assert costs.cost / costs.y == pytest.approx([2.0 * 9.0])
        assert costs.cost_rev / costs.y == pytest.approx([3.0 * 4.0])

    def test_distance_floor(self):
        pos = np.array([[0.0, 0.0], [0.5, 0.0]])
        g = SpatialGraph(pos, [(0, 1)], None, METRIC_EUCLIDEAN, 0.0)
        costs = assign_costs(g, PenaltyParams(mu=0.0, zeta=5.0), seed=3)
        assert costs.cost == pytest.approx(costs.y)  # max(0.5, 1)^5 = 1


class TestSpreadFrom:
    def test_two_nodes(self):
        g, costs = two_node_graph(3.2)
        r = spread_from(g, costs, 0)
        assert r.times == pytest.approx([0.0, 3.2])
        assert r.order.tolist() == [0, 1]
        assert r.predecessor.tolist() == [-1, 0]

    def test_chain_additivity(self):
        pos = np.column_stack((np.arange(3.0), np.zeros(3)))
        g = SpatialGraph(pos, [(0, 1), (1, 2)], None, METRIC_EUCLIDEAN, 0.0)
        costs = CostAssignment(np.array([1.0, 2.0]), np.array([1.0, 2.0]),
                               None, PenaltyParams(0.0, 0.0), 0)
        r = spread_from(g, costs, 0)
        assert r.times == pytest.approx([0.0, 1.0, 3.0])

    def test_unreachable_is_inf(self):
        pos = np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]])
        g = SpatialGraph(pos, [(0, 1)], None, METRIC_EUCLIDEAN, 0.0)
        costs = assign_costs(g, PenaltyParams(0.0, 0.0), seed=1)
        r = spread_from(g, costs, 0)
        assert math.isinf(r.times[2])
        assert r.order[2] == -1

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(99)
        for _ in range(60):
            g = random_connected_graph(rng)
            costs = assign_costs(g, PenaltyParams(mu=1.0, zeta=1.0), seed=5)
            src = int(rng.integers(g.n))
            r = spread_from(g, costs, src)
            oracle = brute_force_times(g, costs, src)
            assert r.times == pytest.approx(oracle)

    def test_brute_force_oracle_asymmetric(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            g = random_connected_graph(rng)
            costs = assign_costs(g, PenaltyParams(mu=0.5, zeta=1.0, nu=1.5),
                                 seed=3)
            src = int(rng.integers(g.n))
            r = spread_from(g, costs, src)
            oracle = brute_force_times(g, costs, src)
            assert r.times == pytest.approx(oracle)

    def test_determinism(self):
        rng = np.random.default_rng(11)
        g = random_connected_graph(rng)
        c1 = assign_costs(g, PenaltyParams(1.0, 1.0), seed=9)
        c2 = assign_costs(g, PenaltyParams(1.0, 1.0), seed=9)
        r1 = spread_from(g, c1, 0)
        r2 = spread_from(g, c2, 0)
        assert np.array_equal(r1.times, r2.times)
        assert np.array_equal(r1.order, r2.order)
        assert np.array_equal(r1.predecessor, r2.predecessor)

    def test_beta_scaling_invariance(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            g = random_connected_graph(rng)
            r1 = spread_from(g, assign_costs(g, PenaltyParams(1.0, 2.0),
                                             seed=5), 0)
            r2 = spread_from(g, assign_costs(
                g, PenaltyParams(1.0, 2.0, beta=2.0), seed=5), 0)
            finite = np.isfinite(r1.times)
            assert np.array_equal(r1.order, r2.order)
            assert r2.times[finite] == pytest.approx(r1.times[finite] / 2,
                                                     rel=1e-15)

    def test_monotonicity_in_zeta(self):
        """With draws fixed and lengths >= 1, raising zeta cannot speed any
        node up (coupling)."""
        rng = np.random.default_rng(17)
        pos = rng.random((12, 2)) * 5 + np.array([1.0, 1.0])
        edges = [(i, j) for i in range(12) for j in range(i + 1, 12)
                 if rng.random() < 0.4]
        pos = pos * 2
        g = SpatialGraph(pos, edges, 1 + rng.random(12), METRIC_EUCLIDEAN,
                         0.0)
        # the floor max(len, 1) makes every edge penalty nondecreasing in
        # zeta even for sub-unit lengths
        t_prev = None
        for zeta in (0.0, 1.0, 2.0):
            costs = assign_costs(g, PenaltyParams(mu=1.0, zeta=zeta), seed=23)
            t = spread_from(g, costs, 0).times
            if t_prev is not None:
                assert np.all(t >= t_prev - 1e-12)
            t_prev = t


class TestCurves:
    def test_grid_below_32(self):
        assert curve_grid(10).tolist() == list(range(1, 11))

    def test_grid_100(self):
        grid = curve_grid(100)
        for v in (64, 68, 72, 76, 80, 84, 88, 92, 96, 100):
            assert v in grid
        assert 65 not in grid
        assert grid[-1] == 100

    def test_grid_bit_pattern(self):
        grid = set(curve_grid(4000).tolist())
        # five most significant bits: steps of 2^(k-4) in octave k
        assert {2048 + m * 128 for m in range(16)} <= grid
        assert 2048 + 64 not in grid

    def test_curve_times(self):
        times = np.array([0.0, 1.0, 2.0, 5.0, 9.0])
        order = np.array([0, 1, 2, 3, 4])
        from spreadlab.spread import SpreadResult
        r = SpreadResult(0, times, order, np.array([-1, 0, 1, 2, 3]), 0)
        c = epidemic_curve(r)
        assert c.counts.tolist() == [1, 2, 3, 4, 5]
        assert c.times == pytest.approx([0.0, 1.0, 2.0, 5.0, 9.0])

    def test_quantiles_single_curve(self):
        from spreadlab.spread import EpidemicCurve
        c = EpidemicCurve(np.array([1, 2, 3]), np.array([0.0, 1.0, 2.0]), 3)
        counts, q = curve_quantiles([c])
        assert counts.tolist() == [1, 2, 3]
        for arr in q.values():
            assert arr == pytest.approx([0.0, 1.0, 2.0])

    def test_quantiles_median_of_two(self):
        from spreadlab.spread import EpidemicCurve
        t = np.array([1.0, 2.0, 4.0])
        c1 = EpidemicCurve(np.array([1, 2, 3]), t, 3)
        c2 = EpidemicCurve(np.array([1, 2, 3]), 3 * t, 3)
        _, q = curve_quantiles([c1, c2], q=(0.5,))
        assert q[0.5] == pytest.approx(2 * t)

    def test_quantiles_grid_mismatch(self):
        from spreadlab.spread import EpidemicCurve
        c1 = EpidemicCurve(np.array([1, 2]), np.zeros(2), 2)
        c2 = EpidemicCurve(np.array([1, 3]), np.zeros(2), 3)
        with pytest.raises(AlignmentError):
            curve_quantiles([c1, c2])

    def test_saturation(self):
        from spreadlab.spread import EpidemicCurve
        c = EpidemicCurve(np.array([1, 2, 3, 4]),
                          np.array([0.0, 1.0, 2.0, 3.0]), 4)
        assert saturation_time(c, 1.0) == 3.0
        assert saturation_time(c, 0.25) == 0.0  # target = 1 -> the source
        assert saturation_time(c, 0.5) == 1.0


class TestPathsAndHeatmap:
    def test_path_to_source(self, path_graph):
        costs = assign_costs(path_graph, PenaltyParams(0.0, 0.0), seed=2)
        r = spread_from(path_graph, costs, 2)
        assert infection_path(r, 2) == [2]
        assert infection_path(r, 0) == [2, 1, 0]

    def test_path_cost_resums(self):
        rng = np.random.default_rng(31)
        g = random_connected_graph(rng)
        costs = assign_costs(g, PenaltyParams(1.0, 1.0), seed=8)
        r = spread_from(g, costs, 0)
        lut = {}
        rev = costs.cost if costs.cost_rev is None else costs.cost_rev
        for k, (u, v) in enumerate(g.edges):
            lut[(u, v)] = costs.cost[k]
            lut[(v, u)] = rev[k]
        for target in range(g.n):
            pathway = infection_path(r, target)
            if pathway is None:
                continue
            acc = sum(lut[(a, b)] for a, b in zip(pathway, pathway[1:]))
            assert acc == pytest.approx(r.times[target], abs=1e-12)

    def test_unreachable_path_absent(self):
        pos = np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]])
        g = SpatialGraph(pos, [(0, 1)], None, METRIC_EUCLIDEAN, 0.0)
        costs = assign_costs(g, PenaltyParams(0.0, 0.0), seed=1)
        r = spread_from(g, costs, 0)
        assert infection_path(r, 2) is None

    def test_single_node_single_box(self):
        pos = np.array([[0.5, 0.5]])
        g = SpatialGraph(pos, np.zeros((0, 2)), None, METRIC_TORUS, 1.0)
        from spreadlab.spread import SpreadResult
        r = SpreadResult(0, np.array([0.0]), np.array([0]),
                         np.array([-1]), 0)
        grid = heatmap_grid(r, g, 1)
        assert grid.rank[0, 0] == 0.0

    def test_two_boxes_ranks(self):
        pos = np.array([[0.2, 0.5], [0.8, 0.5]])
        g = SpatialGraph(pos, [(0, 1)], None, METRIC_TORUS, 1.0)
        from spreadlab.spread import SpreadResult
        r = SpreadResult(0, np.array([0.0, 1.0]), np.array([0, 1]),
                         np.array([-1, 0]), 0)
        grid = heatmap_grid(r, g, 2, crop=(0.0, 0.0, 1.0, 1.0))
        vals = sorted(grid.nonempty()[2].tolist())
        assert vals == [0.0, 1.0]

    def test_degenerate_crop(self):
        pos = np.array([[0.2, 0.5]])
        g = SpatialGraph(pos, np.zeros((0, 2)), None, METRIC_TORUS, 1.0)
        from spreadlab.spread import SpreadResult
        r = SpreadResult(0, np.array([0.0]), np.array([0]), np.array([-1]), 0)
        with pytest.raises(ValidationError):
            heatmap_grid(r, g, 4, crop=(0.5, 0.0, 0.5, 1.0))


@pytest.mark.slow
def test_explosive_kickoff_band_wider_than_late():
    """Without penalties the random kick-off shift dominates early times:
    the relative 25-75% band is wider at I = 100 than at I = 10^4."""
    from spreadlab.girg import GirgParams, sample_girg

    g = sample_girg(GirgParams(n=3e4, d=2, tau=2.78, alpha=1.2, seed=45))
    src = int(np.argsort(g.degrees)[g.n // 2])  # a typical node
    curves = []
    for k in range(25):
        costs = assign_costs(g, PenaltyParams(mu=0.0, zeta=0.0), seed=70 + k)
        curves.append(epidemic_curve(spread_from(g, costs, src)))
    counts, q = curve_quantiles(curves, q=(0.25, 0.5, 0.75))
    early = np.searchsorted(counts, 100)
    late = np.searchsorted(counts, 10_000)
    rel_band = (q[0.75] - q[0.25]) / q[0.5]
    assert rel_band[early] > rel_band[late]


@pytest.mark.slow
def test_geometric_run_rank_tracks_distance():
    """Strongly geometric spread: box rank correlates with distance from
    the source box (Spearman rho > 0.9)."""
    from scipy.stats import spearmanr

    from spreadlab.girg import GirgParams, sample_girg

    g = sample_girg(GirgParams(n=20_000, d=2, tau=2.78, alpha=6.0, seed=3))
    costs = assign_costs(g, PenaltyParams(mu=1.0, zeta=3.0), seed=4)
    # source near the torus centre to dodge crop-edge wrap effects
    centre = np.array([g.metric_param / 2] * 2)
    src = int(np.argmin(np.sum((g.positions - centre) ** 2, axis=1)))
    r = spread_from(g, costs, src)
    grid = heatmap_grid(r, g, 40)
    bx, by, rank = grid.nonempty()
    sx, sy = bx[np.argmin(rank)], by[np.argmin(rank)]
    dist = np.hypot(bx - sx, by - sy)
    rho = spearmanr(dist, rank).statistic
    assert rho > 0.9
