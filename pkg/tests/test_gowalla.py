import numpy as np
import pytest

from spreadlab.errors import DataError, ValidationError
from spreadlab.gowalla import (build_gowalla_graph, find_seed_node,
                               modal_home_location, parse_checkins)

CHECKINS = """\
0\t2010-10-19T23:55:27Z\t30.26\t-97.74\t22847
0\t2010-10-18T22:17:43Z\t30.26\t-97.74\t420315
0\t2010-10-17T23:42:03Z\t30.27\t-97.74\t316637
1\t2010-10-19T23:55:27Z\t50.10\t10.20\t1
2\t2010-10-12T23:55:27Z\t-33.90\t151.20\t7
2\t2010-10-13T23:55:27Z\t-33.91\t151.21\t8
"""

EDGES = """\
0\t1
1\t0
0\t2
1\t3
3\t1
"""


@pytest.fixture
def dataset(tmp_path):
    cpath = tmp_path / "checkins.txt"
    cpath.write_text(CHECKINS)
    epath = tmp_path / "edges.txt"
    epath.write_text(EDGES)
    return epath, cpath


class TestParseCheckins:
    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.txt"
        p.write_text("")
        assert parse_checkins(p) == {}

    def test_grouping(self, dataset):
        _, cpath = dataset
        logins = parse_checkins(cpath)
        assert set(logins) == {0, 1, 2}
        assert len(logins[0]) == 3
        assert logins[1] == [(50.10, 10.20)]

    def test_malformed_fraction(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("0\tx\tnotanumber\t1.0\t5\n" * 10)
        with pytest.raises(DataError):
            parse_checkins(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            parse_checkins(tmp_path / "absent.txt")


class TestModalHome:
    def test_single_login(self):
        rng = np.random.default_rng(0)
        assert modal_home_location([(10.0, 20.0)], rng) == (10.0, 20.0)

    def test_majority_box(self):
        rng = np.random.default_rng(0)
        logins = [(10.1, 10.1)] * 3 + [(50.0, 50.0)] * 2
        assert modal_home_location(logins, rng) == (10.1, 10.1)

    def test_mode_within_box(self):
        rng = np.random.default_rng(0)
        # same quarter-degree box, different exact coordinates
        logins = [(10.10, 10.10), (10.10, 10.10), (10.12, 10.12)]
        assert modal_home_location(logins, rng) == (10.10, 10.10)

    def test_tie_is_seeded(self):
        logins = [(0.0, 0.0), (40.0, 40.0)]
        picks = {modal_home_location(logins, np.random.default_rng(s))
                 for s in range(20)}
        assert picks == {(0.0, 0.0), (40.0, 40.0)}
        # reproducible for a fixed seed
        a = modal_home_location(logins, np.random.default_rng(5))
        b = modal_home_location(logins, np.random.default_rng(5))
        assert a == b


class TestBuildGraph:
    def test_fixture_graph(self, dataset):
        epath, cpath = dataset
        res = build_gowalla_graph(epath, cpath, tie_seed=1)
        g = res.graph
        # user 3 has no check-ins: dropped along with its edges; the
        # duplicate orientations of (0,1) collapse
        assert g.n == 3
        assert g.m == 2
        assert res.external_ids.tolist() == [0, 1, 2]
        assert g.metric == "haversine"
        assert g.degrees.tolist() == [2, 1, 1]

    def test_topology_independent_of_tie_seed(self, dataset):
        epath, cpath = dataset
        g1 = build_gowalla_graph(epath, cpath, tie_seed=1).graph
        g2 = build_gowalla_graph(epath, cpath, tie_seed=99).graph
        assert np.array_equal(g1.edges, g2.edges)

    def test_deterministic(self, dataset):
        epath, cpath = dataset
        g1 = build_gowalla_graph(epath, cpath, tie_seed=7).graph
        g2 = build_gowalla_graph(epath, cpath, tie_seed=7).graph
        assert np.array_equal(g1.positions, g2.positions)


class TestSeedNode:
    def test_exact_position(self, dataset):
        epath, cpath = dataset
        g = build_gowalla_graph(epath, cpath, tie_seed=1).graph
        nid = find_seed_node(g, 50.10, 10.20)
        assert g.positions[nid].tolist() == [50.10, 10.20]

    def test_nearest(self, dataset):
        epath, cpath = dataset
        g = build_gowalla_graph(epath, cpath, tie_seed=1).graph
        assert find_seed_node(g, 49.5, 11.44) == 1  # the European user

    def test_empty_graph(self):
        from spreadlab.core_graph import METRIC_HAVERSINE, SpatialGraph
        g = SpatialGraph(np.zeros((0, 2)), np.zeros((0, 2)), None,
                         METRIC_HAVERSINE, 6371.0088)
        with pytest.raises(ValidationError):
            find_seed_node(g, 0.0, 0.0)
