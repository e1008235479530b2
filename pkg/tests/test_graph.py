import io
import random
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anonet.graph import (
    EdgeListError,
    Graph,
    average_clustering,
    average_distance,
    connected_components,
    diameter,
    load_edge_list,
    local_clustering,
    write_id_map,
)

import oracles


def K(n):
    return Graph(n, combinations(range(n), 2))


def two_triangles():
    return Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    pairs = list(combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return Graph(n, chosen)


def test_load_edge_list_dedup_and_self_loops():
    g = load_edge_list(b"1 2\n2 1\n2 2\n1 3\n")
    assert g.node_count == 3
    assert g.edges.tolist() == [[0, 1], [0, 2]]
    assert g.labels == ("1", "2", "3")


def test_load_edge_list_comments_commas_and_extra_columns():
    data = "% header\n# comment\na,b,0.5\nb c 1700000000 extra\n\nc,a\n"
    g = load_edge_list(io.StringIO(data))
    assert g.node_count == 3 and g.edge_count == 3


def test_load_edge_list_errors(tmp_path):
    with pytest.raises(EdgeListError, match="line 2"):
        load_edge_list(b"1 2\n3\n")
    with pytest.raises(EdgeListError, match="empty"):
        load_edge_list(b"# nothing here\n")
    with pytest.raises(EdgeListError, match="cannot read"):
        load_edge_list(tmp_path / "missing.txt")


def test_id_map_roundtrip(tmp_path):
    g = load_edge_list(b"x y\ny z\n")
    write_id_map(g, tmp_path / "ids.txt")
    assert (tmp_path / "ids.txt").read_text().split("\n")[:3] == ["x 0", "y 1", "z 2"]


def test_degree_examples():
    assert all(K(3).degree(v) == 2 for v in range(3))
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    assert star.degree(0) == 3
    assert Graph(3, [(0, 1)]).degree(2) == 0


def test_common_neighbors_examples():
    assert K(3).common_neighbors(0, 1) == {2}
    assert Graph(3, [(0, 1), (1, 2)]).common_neighbors(0, 2) == {1}
    assert Graph(4, [(0, 1), (2, 3)]).common_neighbors(0, 2) == set()


def test_triangle_count_examples():
    assert [K(4).triangle_count(v) for v in range(4)] == [3, 3, 3, 3]
    assert Graph(4, [(0, 1), (1, 2), (2, 3)]).triangle_counts.tolist() == [0, 0, 0, 0]


def test_delete_edges_examples():
    g = K(5)
    assert g.delete_edges(np.zeros(g.m, bool)) == g
    empty = g.delete_edges(np.ones(g.m, bool))
    assert empty.edge_count == 0 and empty.node_count == 5
    with pytest.raises(ValueError):
        g.delete_edges(np.zeros(3, bool))


def test_components_examples():
    cc = connected_components(K(4))
    assert cc.count == 1 and cc.largest == 4
    cc = connected_components(two_triangles())
    assert sorted(cc.sizes.tolist()) == [3, 3]


def test_clustering_examples():
    # deg 3, two triangles
    g = Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)])
    assert local_clustering(g, 0) == pytest.approx(2 / 3)
    assert local_clustering(K(4), 0) == 1.0
    assert local_clustering(g, 1) == 1.0
    assert local_clustering(Graph(2, [(0, 1)]), 0) == 0.0
    assert average_clustering(K(3)) == 1.0
    with pytest.raises(ValueError):
        average_clustering(Graph(0))


def test_average_distance_examples():
    assert average_distance(Graph(3, [(0, 1), (1, 2)])) == pytest.approx(4 / 3)
    assert diameter(Graph(3, [(0, 1), (1, 2)])) == 2
    with pytest.raises(ValueError):
        average_distance(Graph(4))


def test_edge_index_roundtrip():
    g = Graph(6, [(5, 0), (2, 1), (3, 4), (1, 5), (0, 2)])
    assert g.edges.tolist() == sorted(g.edges.tolist())
    for i in range(g.m):
        u, v = g.edge(i)
        assert u < v
        assert g.edge_index(u, v) == i == g.edge_index(v, u)


@pytest.mark.parametrize("seed", range(3))
def test_metrics_match_brute_force(seed):
    rng = random.Random(seed)
    for _ in range(100):
        n = rng.randint(1, 25)
        edges = oracles.random_edges(rng, n, rng.uniform(0.05, 0.5))
        g = Graph(n, edges)
        tri, _ = oracles.triangles_by_triples(n, edges)
        assert g.triangle_counts.tolist() == tri
        cc = oracles.clustering(n, edges)
        assert [Fraction(local_clustering(g, v)).limit_denominator(10**6) for v in range(n)] == cc
        comps = connected_components(g)
        mine = {frozenset(np.flatnonzero(comps.labels == c).tolist()) for c in range(comps.count)}
        assert mine == oracles.components(n, edges)
        want = oracles.average_distance(n, edges)
        if want is None:
            with pytest.raises(ValueError):
                average_distance(g)
        else:
            assert Fraction(average_distance(g)).limit_denominator(10**6) == want


@settings(max_examples=150, deadline=None)
@given(graphs())
def test_degree_and_triangle_handshake(g):
    assert g.degrees.sum() == 2 * g.m
    tri_nodes, tri_edges = g.triangles
    assert g.triangle_counts.sum() == 3 * len(tri_nodes)
    for (a, b, c), (ea, eb, ec) in zip(tri_nodes.tolist(), tri_edges.tolist()):
        assert g.edge(ea) == (b, c) and g.edge(eb) == (a, c) and g.edge(ec) == (a, b)
    for v in range(g.n):
        for w in g.neighbors(v).tolist():
            assert g.has_edge(w, v)


@settings(max_examples=100, deadline=None)
@given(graphs(), st.data())
def test_deletion_monotone(g, data):
    sub = np.array(data.draw(st.lists(st.booleans(), min_size=g.m, max_size=g.m)), dtype=bool)
    extra = np.array(data.draw(st.lists(st.booleans(), min_size=g.m, max_size=g.m)), dtype=bool)
    small, big = g.delete_edges(sub), g.delete_edges(sub | extra)
    assert {tuple(e) for e in big.edges.tolist()} <= {tuple(e) for e in small.edges.tolist()}
    assert small.degrees.sum() == 2 * small.m
