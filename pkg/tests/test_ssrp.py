import numpy as np
import pytest

from pyssrp.algorithms.metrics import CallMetrics, MetricsRecorder
from pyssrp.algorithms.queries import QuerySet, full_rows
from pyssrp.algorithms.ssrp import SolveContext, _Recursion, generalized_ssrp, solve_ssrp
from pyssrp.config import RunConfig
from pyssrp.core.graph import (COMPACT_INFINITY, INFINITY, EdgeSet, Graph, WeightFunction, bfs,
                               dijkstra_weighted_view)
from pyssrp.core.tree import build_bfs_tree
from pyssrp.errors import UnreachableVertexError, WeightRequirementError

# C = 6 makes every pivot probability 1 on these sizes, so answers are deterministic
EXACT = RunConfig(c=6.0, rp_backend='exact', debug_checks=True)


def compare(graph, table, brute_force):
    """(underestimates, mismatches, total) against per-edge BFS."""
    tree = build_bfs_tree(graph, 0)
    under = mismatched = total = 0
    for e, want in brute_force(graph, tree).items():
        got = table.row(e)
        under += int((got < want).sum())
        mismatched += int((got != want).sum())
        total += want.size
    return under, mismatched, total


def test_triangle(triangle):
    table = solve_ssrp(triangle, 0)
    assert table.edges() == [(0, 1), (0, 2)]
    assert table.get((0, 2), 2) == 2
    assert table.get((0, 1), 1) == INFINITY
    assert table.get((0, 1), 2) == 1


def test_directed_cycle():
    table = solve_ssrp(Graph(3, [(0, 1), (1, 2), (2, 0)]), 0)
    assert table.get((0, 1), 1) == INFINITY
    assert table.get((0, 1), 2) == INFINITY
    assert table.get((1, 2), 1) == 1
    assert table.get((1, 2), 0) == 0


def test_unreachable_vertex_is_rejected():
    with pytest.raises(UnreachableVertexError):
        solve_ssrp(Graph(3, [(0, 1)]), 0)


def test_single_vertex():
    table = solve_ssrp(Graph(1), 0)
    assert table.edges() == [] and len(table) == 0


def test_off_path_queries_get_plain_distance(make_random_graph):
    graph = make_random_graph(30, 3, 4)
    tree = build_bfs_tree(graph, 0)
    table = solve_ssrp(graph, 0, EXACT)
    cut_below = {v: set() for v in tree.edge_heads().tolist()}
    for x in range(graph.n):
        for v in tree.path_from_root(x)[1:].tolist():
            cut_below[v].add(x)
    for v, below in cut_below.items():
        row = table.row((int(tree.parent[v]), v))
        for x in set(range(graph.n)) - below:
            assert row[x] == tree.depth[x]


@pytest.mark.parametrize('seed', range(10))
def test_small_graphs_match_oracle(seed, make_random_graph, brute_force):
    rng = np.random.default_rng(seed)
    graph = make_random_graph(int(rng.integers(2, 7)), 2, seed)
    under, mismatched, _ = compare(graph, solve_ssrp(graph, 0, EXACT), brute_force)
    assert under == 0 and mismatched == 0


@pytest.mark.parametrize('seed', range(12))
def test_random_graphs_match_oracle(seed, make_random_graph, brute_force):
    rng = np.random.default_rng(100 + seed)
    graph = make_random_graph(int(rng.integers(7, 60)), float(rng.uniform(1.2, 3.5)), seed)
    table = solve_ssrp(graph, 0, EXACT.with_changes(seed=seed))
    under, mismatched, _ = compare(graph, table, brute_force)
    assert under == 0
    assert mismatched == 0


@pytest.mark.parametrize('seed', range(8))
def test_deep_graphs_are_complete_and_mostly_exact(seed, make_deep_graph, brute_force):
    rng = np.random.default_rng(200 + seed)
    n = int(rng.integers(40, 90))
    graph = make_deep_graph(n, n // 2, seed)
    recorder = MetricsRecorder()
    table = solve_ssrp(graph, 0, RunConfig(seed=seed, debug_checks=True), recorder)
    under, mismatched, total = compare(graph, table, brute_force)
    assert under == 0
    assert mismatched <= 0.01 * total
    assert recorder.check_budgets(graph.n, graph.m, 3.0) == []


def test_pivots_are_sampled_on_deep_graphs(make_deep_graph):
    graph = make_deep_graph(80, 20, 1)
    recorder = MetricsRecorder()
    solve_ssrp(graph, 0, RunConfig(seed=1), recorder)
    assert max(call.n_pivots for call in recorder.calls) > 0


def test_star_separates_at_the_root(brute_force):
    graph = Graph(9, [(0, v) for v in range(1, 9)] + [(1, 2), (3, 4), (5, 6), (7, 8)])
    recorder = MetricsRecorder()
    table = solve_ssrp(graph, 0, EXACT, recorder)
    assert recorder.calls[-1].path_length == 0
    assert compare(graph, table, brute_force)[1] == 0


def test_fixed_seed_is_reproducible(make_deep_graph):
    graph = make_deep_graph(60, 30, 9)
    first = solve_ssrp(graph, 0, RunConfig(seed=17)).to_tsv()
    second = solve_ssrp(graph, 0, RunConfig(seed=17)).to_tsv()
    assert first == second


def random_weights(graph, rng):
    """Weight function meeting w(v) >= d(0, v): distance plus slack, or infinity."""
    depth = bfs(graph, 0).dist
    weights = depth + rng.integers(0, 3, size=graph.n)
    weights[rng.random(graph.n) < 0.5] = INFINITY
    return weights


@pytest.mark.parametrize('seed', range(6))
def test_generalized_with_weight_functions(seed, make_random_graph):
    rng = np.random.default_rng(300 + seed)
    graph = make_random_graph(int(rng.integers(8, 40)), 2.5, seed)
    tree = build_bfs_tree(graph, 0)
    weights = [random_weights(graph, rng) for _ in range(3)]
    queries = QuerySet(graph.n)
    for _ in weights:
        mask = full_rows(graph.n, 0) & (rng.random((graph.n, graph.n)) < 0.7)
        queries.add(mask)
    context = SolveContext(EXACT, graph.n)
    answers = generalized_ssrp(graph, tree, weights, queries, np.random.SeedSequence(seed), context)
    for j, w in enumerate(weights):
        view = WeightFunction(0, w)
        for v in tree.edge_heads().tolist():
            want = dijkstra_weighted_view(graph, view, EdgeSet([(int(tree.parent[v]), v)]))
            asked = queries.masks[j][v]
            assert np.array_equal(answers[j][v][asked], want[asked])
            assert np.all(answers[j][v][~asked] == INFINITY)


def test_generalized_without_queries(make_random_graph):
    graph = make_random_graph(20, 2, 0)
    tree = build_bfs_tree(graph, 0)
    queries = QuerySet(graph.n)
    queries.add(np.zeros((graph.n, graph.n), dtype=bool))
    context = SolveContext(RunConfig(), graph.n)
    weights = [WeightFunction.infinite(graph.n, 0).weights]
    answers = generalized_ssrp(graph, tree, weights, queries, np.random.SeedSequence(0), context)
    assert np.all(answers[0] == INFINITY)


def test_debug_checks_catch_bad_weights(triangle):
    tree = build_bfs_tree(triangle, 0)
    context = SolveContext(RunConfig(debug_checks=True), triangle.n)
    with pytest.raises(WeightRequirementError):
        generalized_ssrp(triangle, tree, [np.array([0, 0, 1])], QuerySet.full(3, 0),
                         np.random.SeedSequence(0), context)


def test_recorder_counts_every_call(make_random_graph):
    graph = make_random_graph(50, 3, 2)
    recorder = MetricsRecorder()
    solve_ssrp(graph, 0, RunConfig(), recorder)
    top = [call for call in recorder.calls if call.level == 0]
    assert len(top) == 1
    assert top[0].n_queries == (graph.n - 1) * graph.n
    assert top[0].n_weights_t == 2
    assert top[0].n_weights_s == 2 + top[0].n_pivots
    assert recorder.check_budgets(graph.n, graph.m, 3.0) == []


class RecordingRecursion(_Recursion):
    """Keeps the candidate rows of every path-edge combine."""

    def __init__(self, *args):
        super().__init__(*args)
        self.terms = []

    def combine(self, i, j, cols, terms):
        self.terms.append((i, cols, terms))
        return super().combine(i, j, cols, terms)


def top_level(graph, config, seed=0):
    tree = build_bfs_tree(graph, 0)
    queries = QuerySet.full(graph.n, 0)
    metrics = CallMetrics(level=0, n_vertices=graph.n, n_edges=graph.m, n_weights=1, n_queries=queries.count())
    recursion = RecordingRecursion(graph, tree, [WeightFunction.infinite(graph.n, 0).weights], queries,
                                   np.random.SeedSequence(seed), SolveContext(config, graph.n), 0, metrics)
    return tree, recursion, recursion.solve()


@pytest.mark.parametrize('seed', range(8))
def test_every_path_candidate_is_a_real_walk(seed, make_deep_graph, brute_force):
    rng = np.random.default_rng(400 + seed)
    n = int(rng.integers(40, 90))
    graph = make_deep_graph(n, n // 2, seed)
    tree, recursion, _ = top_level(graph, EXACT.with_changes(seed=seed), seed)
    truth = brute_force(graph, tree)
    names = set()
    exact = total = 0
    assert recursion.terms
    for i, cols, terms in recursion.terms:
        want = truth[(int(recursion.path[i]), int(recursion.path[i + 1]))][cols]
        for name, row in terms.items():
            assert np.all(row >= want), name
            names.add(name)
        best = np.minimum.reduce(list(terms.values()))
        exact += int((best == want).sum())
        total += want.size
    assert names == {'recursive', 'avoid_path', 'depart', 'pivot', 'via_t'}
    assert exact >= 0.99 * total


def test_recursion_answers_are_compact(make_random_graph):
    graph = make_random_graph(30, 3, 8)
    _, _, answers = top_level(graph, EXACT)
    assert answers[0].dtype == np.int32
    assert answers[0][0].max() == COMPACT_INFINITY


# desk-scale sweeps

SWEEP_SIZES = [10, 20, 50, 100, 200]


@pytest.mark.slow
@pytest.mark.parametrize('n', SWEEP_SIZES)
def test_sweep_is_complete_and_sound(n, make_random_graph, brute_force):
    under = mismatched = total = 0
    for seed in range(20):
        graph = make_random_graph(n, 4, seed)
        recorder = MetricsRecorder()
        table = solve_ssrp(graph, 0, RunConfig(seed=seed, debug_checks=True), recorder)
        assert recorder.check_budgets(graph.n, graph.m, 3.0) == []
        result = compare(graph, table, brute_force)
        under += result[0]
        mismatched += result[1]
        total += result[2]
        if result[1]:
            rerun = solve_ssrp(graph, 0, RunConfig(c=6.0, seed=seed))
            assert compare(graph, rerun, brute_force)[1] == 0, seed
    assert under == 0
    assert mismatched <= 0.001 * total


@pytest.mark.slow
@pytest.mark.parametrize('n', SWEEP_SIZES)
def test_sweep_at_higher_sampling_constant(n, make_random_graph, brute_force):
    for seed in range(20):
        graph = make_random_graph(n, 4, seed)
        recorder = MetricsRecorder()
        table = solve_ssrp(graph, 0, RunConfig(c=6.0, seed=seed), recorder)
        assert recorder.check_budgets(graph.n, graph.m, 6.0) == []
        under, mismatched, _ = compare(graph, table, brute_force)
        assert under == 0 and mismatched == 0, seed


@pytest.mark.slow
def test_base_case_sweep(make_random_graph, brute_force):
    rng = np.random.default_rng(7)
    for instance in range(500):
        n = int(rng.integers(2, 7))
        graph = make_random_graph(n, float(rng.uniform(1, 4)), instance)
        under, mismatched, _ = compare(graph, solve_ssrp(graph, 0, RunConfig(seed=instance)), brute_force)
        assert under == 0 and mismatched == 0, instance
