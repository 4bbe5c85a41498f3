import numpy as np
import pytest

from pyssrp.core.graph import (COMPACT_INFINITY, INFINITY, EdgeSet, Graph, WeightFunction, bfs, compact,
                               dijkstra_weighted_view, expand, ext_add, ext_sub, format_graph,
                               induced_subgraph, load_graph, parse_graph,
                               random_reachable_graph, reverse)
from pyssrp.errors import GraphError, GraphParseError, WeightRequirementError


def test_ext_arithmetic_saturates():
    assert ext_add(INFINITY, 3) == INFINITY
    assert ext_add(2, 3) == 5
    assert list(ext_add(np.array([1, INFINITY]), 4)) == [5, INFINITY]
    assert list(ext_sub(np.array([7, INFINITY]), 2)) == [5, INFINITY]


def test_compact_distances():
    small = compact(np.array([[0, 3], [INFINITY, 12]]))
    assert small.dtype == np.int32
    assert small.tolist() == [[0, 3], [COMPACT_INFINITY, 12]]
    wide = expand(small)
    assert wide.dtype == np.int64
    assert wide.tolist() == [[0, 3], [INFINITY, 12]]


def test_parse_graph_triangle():
    g = parse_graph("3 3\n0 1\n1 2\n0 2")
    assert g.n == 3
    assert g == Graph(3, [(0, 1), (1, 2), (0, 2)])


def test_parse_graph_ignores_comments_and_blank_lines():
    g = parse_graph("# header\n\n2 1\n# edge\n0 1\n")
    assert g.m == 1 and g.has_edge(0, 1)


def test_parse_single_vertex():
    g = parse_graph("1 0")
    assert g.n == 1 and g.m == 0


@pytest.mark.parametrize('text, line', [
    ("2 1\n0 0", 2),
    ("2 2\n0 1\n0 1", 3),
    ("2 1\n0 2", 2),
    ("2 1\n0 x", 2),
    ("2 2\n0 1", 2),
    ("2 1\n0 1\n1 0", 3),
])
def test_parse_graph_errors_name_the_line(text, line):
    with pytest.raises(GraphParseError) as info:
        parse_graph(text)
    assert info.value.line == line


def test_self_loop_message():
    with pytest.raises(GraphParseError, match="line 2: self-loop"):
        parse_graph("2 1\n0 0")


def test_graph_rejects_duplicates():
    with pytest.raises(GraphError):
        Graph(2, [(0, 1), (0, 1)])


def test_format_and_load_graph(tmp_path, triangle):
    path = tmp_path / 'g.txt'
    path.write_text(format_graph(triangle, comment='triangle'), encoding='utf-8')
    assert load_graph(path) == triangle


def test_bfs_examples(triangle):
    assert list(bfs(triangle, 0).dist) == [0, 1, 1]
    assert list(bfs(triangle, 0, EdgeSet([(0, 2)])).dist) == [0, 1, 2]
    isolated = Graph(3, [(1, 2)])
    assert list(bfs(isolated, 0).dist) == [0, INFINITY, INFINITY]


def test_bfs_limit_and_parents():
    path = Graph(4, [(0, 1), (1, 2), (2, 3)])
    traversal = bfs(path, 0, limit=2)
    assert list(traversal.dist) == [0, 1, 2, INFINITY]
    assert list(traversal.parent) == [-1, 0, 1, -1]


def test_dijkstra_with_infinite_weights_is_bfs(make_random_graph):
    for seed in range(5):
        g = make_random_graph(50, 3, seed)
        w = WeightFunction.infinite(g.n, 0)
        rng = np.random.default_rng(seed)
        picks = rng.choice(g.m, size=5, replace=False)
        forbidden = EdgeSet(map(tuple, g.edges[picks].tolist()))
        assert np.array_equal(dijkstra_weighted_view(g, w, forbidden), bfs(g, 0, forbidden).dist)


def test_dijkstra_uses_virtual_edge():
    g = Graph(3, [(0, 1), (1, 2)])
    w = WeightFunction(0, [INFINITY, INFINITY, 1])
    assert dijkstra_weighted_view(g, w, EdgeSet([(1, 2)]))[2] == 1


def test_dijkstra_real_edge_beats_virtual(triangle):
    w = WeightFunction(0, [INFINITY, 5, INFINITY])
    assert dijkstra_weighted_view(triangle, w)[1] == 1


def test_forbidding_more_never_shortens(make_random_graph):
    g = make_random_graph(40, 3, 7)
    edges = list(map(tuple, g.edges.tolist()))
    small = EdgeSet(edges[:3])
    large = EdgeSet(edges[:10])
    assert np.all(bfs(g, 0, large).dist >= bfs(g, 0, small).dist)


def test_weight_requirement():
    g = Graph(3, [(0, 1), (1, 2)])
    WeightFunction(0, [0, 1, 2]).check_requirement(g)
    with pytest.raises(WeightRequirementError):
        WeightFunction(0, [0, 1, 1]).check_requirement(g)


def test_reverse():
    g = Graph(2, [(0, 1)])
    assert reverse(g) == Graph(2, [(1, 0)])
    assert reverse(reverse(g)) == g
    assert reverse(Graph(0)) == Graph(0)


def test_induced_subgraph(triangle):
    sub, to_parent, to_local = induced_subgraph(triangle, {0, 2})
    assert sub.n == 2
    assert sub == Graph(2, [(0, 1)])
    assert list(to_parent) == [0, 2]
    assert list(to_local) == [0, -1, 1]
    copy, identity, _ = induced_subgraph(triangle, [0, 1, 2])
    assert copy == triangle and list(identity) == [0, 1, 2]
    with pytest.raises(GraphError):
        induced_subgraph(triangle, [])


def test_random_reachable_graph():
    rng = np.random.default_rng(3)
    g = random_reachable_graph(30, 90, rng)
    assert g.m == 90
    assert np.all(bfs(g, 0).dist < INFINITY)
    dense = random_reachable_graph(5, 18, np.random.default_rng(1))
    assert dense.m == 18
    with pytest.raises(GraphError):
        random_reachable_graph(4, 13, rng)
    with pytest.raises(GraphError):
        random_reachable_graph(4, 2, rng)
