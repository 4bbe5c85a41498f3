import numpy as np
import pytest

from pyssrp.core.graph import EdgeSet, Graph, bfs, random_reachable_graph


@pytest.fixture
def triangle():
    return Graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def make_random_graph():
    """G(n, m) with every vertex reachable from 0, m = avg_degree * n."""

    def make(n, avg_degree, seed):
        m = min(n * (n - 1), max(n - 1, int(avg_degree * n)))
        return random_reachable_graph(n, m, np.random.default_rng(seed))

    return make


@pytest.fixture
def make_deep_graph():
    """A long path 0 -> 1 -> ... -> n-1 with random backward edges and 2-hop skips.

    BFS trees of these graphs are deep, so separator paths are long enough
    for pivots to be sampled.
    """

    def make(n, extra, seed):
        rng = np.random.default_rng(seed)
        edges = {(v, v + 1) for v in range(n - 1)}
        while len(edges) < n - 1 + extra:
            u = int(rng.integers(n))
            if rng.random() < 0.2 and u + 2 < n:
                edges.add((u, u + 2))
            else:
                v = int(rng.integers(n))
                if v < u:
                    edges.add((u, v))
        return Graph(n, sorted(edges))

    return make


@pytest.fixture
def brute_force():
    """d(s, x, G - e) for every tree edge e, one BFS each."""

    def solve(graph, tree):
        return {e: bfs(graph, tree.root, EdgeSet([e])).dist for e in tree.tree_edges()}

    return solve
