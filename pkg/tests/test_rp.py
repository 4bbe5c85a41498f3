import numpy as np
import pytest

from pyssrp.core.graph import INFINITY, EdgeSet, Graph
from pyssrp.core.rp import (replacement_paths, replacement_paths_exact,
                            replacement_paths_rz, short_detours)
from pyssrp.core.tree import build_bfs_tree
from pyssrp.errors import PathError

S, A, T, X, Y = range(5)
TWO_ROUTES = Graph(5, [(S, A), (A, T), (S, X), (X, Y), (Y, T)])


def test_exact_two_routes():
    estimates = replacement_paths_exact(TWO_ROUTES, [S, A, T])
    assert estimates[(A, T)] == 3
    assert estimates[(S, A)] == 3


def test_exact_without_alternative():
    estimates = replacement_paths_exact(Graph(3, [(0, 1), (1, 2)]), [0, 1, 2])
    assert list(estimates.lengths) == [INFINITY, INFINITY]


@pytest.mark.parametrize('backend', ['exact', 'sampled'])
def test_empty_path(backend):
    rng = np.random.default_rng(0)
    assert len(replacement_paths(TWO_ROUTES, [S], rng, backend=backend)) == 0
    assert len(replacement_paths_rz(TWO_ROUTES, [S], rng)) == 0


def test_not_a_path():
    with pytest.raises(PathError):
        replacement_paths_exact(TWO_ROUTES, [S, T])


def test_sampled_two_routes_over_seeds():
    exact = replacement_paths_exact(TWO_ROUTES, [S, A, T]).lengths
    hits = sum(np.array_equal(replacement_paths_rz(TWO_ROUTES, [S, A, T], np.random.default_rng(seed)).lengths,
                              exact)
               for seed in range(100))
    assert hits >= 99


def longest_tree_path(graph):
    tree = build_bfs_tree(graph, 0)
    return tree.path_from_root(int(np.argmax(tree.depth)))


@pytest.mark.parametrize('seed', range(30))
def test_sampled_is_one_sided_and_mostly_exact(seed, make_deep_graph):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 120))
    graph = make_deep_graph(n, int(rng.integers(n // 2, 2 * n)), seed)
    path = longest_tree_path(graph)
    exact = replacement_paths_exact(graph, path).lengths
    sampled = replacement_paths_rz(graph, path, rng).lengths
    assert np.all(sampled >= exact)
    assert np.mean(sampled == exact) >= 0.95


def test_dispatcher_uses_exact_on_short_paths():
    estimates = replacement_paths(TWO_ROUTES, [S, A, T], np.random.default_rng(0), backend='sampled')
    assert estimates.traversals == 2
    with pytest.raises(ValueError):
        replacement_paths(TWO_ROUTES, [S, A, T], np.random.default_rng(0), backend='fast')


def test_short_detours_two_routes():
    path = np.array([S, A, T])
    lengths, scanned = short_detours(TWO_ROUTES, path, EdgeSet.from_path(path), ell=4)
    assert list(lengths) == [3, 3]
    assert scanned > 0


def hub_graph(length, side, seed):
    """A long path whose every vertex feeds a hub leading into a dense side component."""
    rng = np.random.default_rng(seed)
    hub = length + 1
    first = hub + 1
    edges = [(a, a + 1) for a in range(length)]
    edges += [(a, hub) for a in range(length)]
    edges.append((hub, first))
    side_edges = 0
    for i in range(side):
        others = np.delete(np.arange(side), i)
        for j in rng.choice(others, size=5, replace=False).tolist():
            edges.append((first + i, first + j))
            side_edges += 1
    return Graph(first + side, edges), side_edges


def test_short_detours_work_does_not_grow_with_path_length():
    length = 600
    graph, side_edges = hub_graph(length, 300, seed=4)
    path = np.arange(length + 1)
    ell = int(np.sqrt(graph.n))
    lengths, scanned = short_detours(graph, path, EdgeSet.from_path(path), ell)
    assert np.all(lengths == INFINITY)
    assert scanned <= 2 * ell * graph.m
    # one depth-limited search per path vertex would scan the side component every time
    assert scanned < length * side_edges // 8


def test_sampled_traversals_follow_samples():
    length = 600
    graph, _ = hub_graph(length, 300, seed=5)
    estimates = replacement_paths_rz(graph, np.arange(length + 1), np.random.default_rng(5))
    assert estimates.traversals == 1 + 2 * estimates.n_samples
    assert estimates.n_samples < graph.n
    assert np.all(estimates.lengths == INFINITY)


@pytest.mark.slow
def test_sampled_sweep(make_deep_graph):
    rng = np.random.default_rng(17)
    exact_pairs = total = 0
    for instance in range(500):
        n = int(rng.integers(10, 301))
        graph = make_deep_graph(n, int(rng.integers(n // 4, 2 * n)), instance)
        path = longest_tree_path(graph)
        exact = replacement_paths_exact(graph, path).lengths
        sampled = replacement_paths_rz(graph, path, rng).lengths
        assert np.all(sampled >= exact), instance
        exact_pairs += int((sampled == exact).sum())
        total += exact.size
    assert exact_pairs >= 0.999 * total
