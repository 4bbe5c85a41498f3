"""
Single-source replacement paths in unweighted directed graphs.

``solve_ssrp`` answers d(s, x, G - e) for every edge e of a BFS tree of G and
every vertex x. It runs the generalized problem, where queries also name a
weight function w and are asked in the virtual graph H_w, recursively on
the two sides of a balanced tree separator. Estimates are never below the
true distance and equal it with high probability.

Answers of one call are dense: for weight function j, ``answers[j][v, x]``
is the estimate for the tree edge with head v and destination x. Cells that
were not queried hold INFINITY. Inside the recursion the matrices are kept
in compact int32 form (see ``pyssrp.core.graph.compact``).
"""
from dataclasses import dataclass, field
import time
from typing import Dict, List, Optional, Sequence

import numpy as np
from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.algorithms.metrics import CallMetrics, MetricsRecorder
from pyssrp.algorithms.pivots import (PivotSets, compute_depart, compute_dste,
                                      partition_path, sample_pivots)
from pyssrp.algorithms.queries import QuerySet, full_rows
from pyssrp.config import RunConfig
from pyssrp.core.estimates import EstimateTable
from pyssrp.core.graph import (COMPACT_INFINITY, EdgeSet, Graph, INFINITY, WeightFunction, bfs, compact,
                               dijkstra_weighted_view, expand, ext_add, ext_sub, induced_subgraph)
from pyssrp.core.rp import replacement_paths
from pyssrp.core.tree import BfsTree, balanced_separator, build_bfs_tree, build_lca, on_path_mask
from pyssrp.errors import InternalError

logger = set_logger(get_module_name(__file__))

BASE_CASE_SIZE = 6
UNANSWERED = -1


@dataclass
class SolveContext:
    """State shared by every call of one run."""
    config: RunConfig
    global_n: int
    recorder: MetricsRecorder = field(default_factory=MetricsRecorder)


def solve_ssrp(graph: Graph, source: int, config: Optional[RunConfig] = None,
               recorder: Optional[MetricsRecorder] = None) -> EstimateTable:
    """Replacement distances for every BFS-tree edge and every destination.

    Parameters
    ----------
    graph: Graph
        Every vertex must be reachable from source.
    source: int
    config: RunConfig, optional
    recorder: MetricsRecorder, optional
        Receives the counters of every recursion node.

    Returns
    -------
    EstimateTable: one row per tree edge (parent[v], v), for weight id 0.
    """
    config = config if config is not None else RunConfig()
    tree = build_bfs_tree(graph, source)
    context = SolveContext(config, graph.n, recorder if recorder is not None else MetricsRecorder())
    weights = [WeightFunction.infinite(graph.n, source).weights]
    queries = QuerySet.full(graph.n, source)
    logger.info(f"Solving SSRP on {graph} from {source} with seed {config.seed}")
    answers = _solve_node(graph, tree, weights, queries, np.random.SeedSequence(config.seed), context)
    table = EstimateTable(graph.n)
    for v in tree.edge_heads().tolist():
        table.set_row((int(tree.parent[v]), v), 0, expand(answers[0][v]))
    return table


def generalized_ssrp(graph: Graph, tree: BfsTree, weights: Sequence[np.ndarray], queries: QuerySet,
                     seed: np.random.SeedSequence, context: SolveContext, level: int = 0) -> List[np.ndarray]:
    """Answer the queries of one recursion node.

    Parameters
    ----------
    graph: Graph
        H, with local vertex ids.
    tree: BfsTree
        BFS tree K of H rooted at s.
    weights: sequence of np.ndarray
        Weight functions of W, each satisfying w(v) >= d(s, v, H).
    queries: QuerySet
        One mask per weight function.
    seed: np.random.SeedSequence
    context: SolveContext
    level: int
        Recursion depth.

    Returns
    -------
    list of np.ndarray: one (n_H, n_H) int64 answer matrix per weight function.
    """
    return [expand(answer) for answer in _solve_node(graph, tree, weights, queries, seed, context, level)]


def _solve_node(graph, tree, weights, queries, seed, context, level=0) -> List[np.ndarray]:
    started = time.perf_counter()
    metrics = CallMetrics(level=level, n_vertices=graph.n, n_edges=graph.m,
                          n_weights=len(weights), n_queries=queries.count())
    logger.debug(f"level {level}: n_H={graph.n} |W|={len(weights)} |Q|={metrics.n_queries}")
    if context.config.debug_checks:
        for w in weights:
            WeightFunction(tree.root, w).check_requirement(graph)
    if graph.n <= BASE_CASE_SIZE:
        answers = _solve_base_case(graph, tree, weights, queries, metrics)
    else:
        answers = _Recursion(graph, tree, weights, queries, seed, context, level, metrics).solve()
    metrics.seconds = time.perf_counter() - started
    context.recorder.record(metrics)
    return answers


def _solve_base_case(graph, tree, weights, queries, metrics) -> List[np.ndarray]:
    metrics.base_case = True
    answers = []
    for j, w in enumerate(weights):
        view = WeightFunction(tree.root, w)
        out = np.full((graph.n, graph.n), COMPACT_INFINITY, dtype=np.int32)
        for v in np.flatnonzero(queries.masks[j].any(axis=1)).tolist():
            failed = EdgeSet([(int(tree.parent[v]), v)])
            out[v] = compact(dijkstra_weighted_view(graph, view, failed))
            metrics.traversals += 1
        out[~queries.masks[j]] = COMPACT_INFINITY
        answers.append(out)
    return answers


class _Recursion:
    """One call on a graph with more than BASE_CASE_SIZE vertices."""

    def __init__(self, graph, tree, weights, queries, seed, context, level, metrics):
        self.graph = graph
        self.tree = tree
        self.weights = list(weights)
        self.queries = queries
        self.context = context
        self.config = context.config
        self.level = level
        self.metrics = metrics
        self.n = graph.n
        self.source = tree.root
        self.depth = tree.depth
        self.rng = np.random.default_rng(seed)
        self.seed_s, self.seed_t = seed.spawn(2)
        self.answers = [np.full((self.n, self.n), UNANSWERED, dtype=np.int32) for _ in self.weights]
        self.forwarded = 0
        self.child_queries = 0

    def solve(self) -> List[np.ndarray]:
        self.separate()
        self.avoid_path_distances()
        self.sample_and_partition()
        self.compute_dste()
        self.combine_pt()
        self.recurse_t()
        self.recurse_s()
        self.metrics.traversals += self.depart.traversals
        self.metrics.n_new_queries = self.child_queries - self.forwarded
        return self.finalize()

    def separate(self):
        self.sep = balanced_separator(self.tree)
        self.t = self.sep.t
        self.path = self.sep.path
        self.plen = self.sep.path_length
        self.path_edges = EdgeSet.from_path(self.path)
        self.from_t = bfs(self.graph, self.t).dist
        self.to_t = bfs(self.graph.reverse(), self.t).dist
        self.metrics.traversals += 2
        self.metrics.path_length = self.plen

    def avoid_path_distances(self):
        """d(s, ., H_w - P) for every w."""
        self.avoid_path = []
        if self.plen == 0:
            return
        for w in self.weights:
            self.avoid_path.append(
                dijkstra_weighted_view(self.graph, WeightFunction(self.source, w), self.path_edges))
        self.metrics.traversals += len(self.weights)

    def sample_and_partition(self):
        self.pivots = partition_path(self.path, self.to_t[self.path], self.n)
        self.from_pivot, self.to_pivot = {}, {}
        if self.plen > 0:
            self.pivots.pivots = sample_pivots(self.n, self.context.global_n, self.config.c, self.rng,
                                               scales=self.pivots.scales)
            reverse = self.graph.reverse()
            reverse_edges = self.path_edges.reversed()
            for b in self.pivots.union.tolist():
                self.from_pivot[b] = bfs(self.graph, b, self.path_edges).dist
                self.to_pivot[b] = bfs(reverse, b, reverse_edges).dist
            self.metrics.traversals += 2 * len(self.from_pivot)
            self.metrics.max_band_product = max((self.pivots.product(k) for k in self.pivots.scales), default=0)
        self.metrics.n_pivots = len(self.from_pivot)
        self.depart = compute_depart(self.graph, self.path, self.pivots, self.from_pivot, self.to_pivot)

    def compute_dste(self):
        """d^_w(s, t, e) for e on P, which also answers the queries (e, t, w)."""
        self.dste = np.zeros((len(self.weights), 0), dtype=np.int64)
        if self.plen == 0:
            return
        estimates = replacement_paths(self.graph, self.path, self.rng, c=self.config.c,
                                      backend=self.config.rp_backend, global_n=self.context.global_n)
        self.metrics.traversals += estimates.traversals
        self.dste = compute_dste(self.path, self.avoid_path, self.to_t, estimates.lengths)
        if self.config.debug_checks:
            finite = self.dste[self.dste < INFINITY]
            if finite.size and finite.min() < self.plen:
                raise InternalError(f"s-t replacement estimate {finite.min()} below d(s, t) = {self.plen}")
        heads = self.path[1:]
        for j, answer in enumerate(self.answers):
            answer[heads, self.t] = compact(self.dste[j])

    def combine_pt(self):
        """e on P, x in V(T) - {t}."""
        if self.plen == 0:
            return
        cols = np.flatnonzero(self.sep.in_t)
        cols = cols[cols != self.t]
        for i in range(self.plen):
            head = int(self.path[i + 1])
            asked = [j for j, mask in enumerate(self.queries.masks) if mask[head, cols].any()]
            if not asked:
                continue
            depart = self.depart.row(i)[cols]
            for j in asked:
                terms = {
                    'avoid_path': self.avoid_path[j][cols],
                    'via_t': ext_add(self.dste[j, i], self.from_t[cols]),
                    'depart': depart,
                }
                self.answers[j][head, cols] = self.combine(i, j, cols, terms)

    def combine(self, i: int, j: int, cols: np.ndarray, terms: Dict[str, np.ndarray]) -> np.ndarray:
        """Entrywise minimum of the candidate rows for edge i of P and weight j, in compact form."""
        return compact(np.minimum.reduce(list(terms.values())))

    def crossing_weights(self, tails, to_local, size, offset) -> np.ndarray:
        """min over edges (u, v), u in tails and v kept, of d(s, u) + 1 - offset, per local v."""
        edges = self.graph.edges
        u, v = edges[:, 0], edges[:, 1]
        inside = tails[u] & (to_local[v] >= 0)
        out = np.full(size, INFINITY, dtype=np.int64)
        np.minimum.at(out, to_local[v[inside]], self.depth[u[inside]] + 1)
        return ext_sub(out, offset)

    def _descend(self, keep, root, weights, masks, seed):
        sub, to_parent, to_local = induced_subgraph(self.graph, keep)
        sub_tree = self.tree.restrict(to_parent, to_local, root)
        queries = QuerySet(sub.n)
        for j in range(len(self.weights)):
            queries.add(self.queries.restricted(j, to_parent, sub_tree.root))
        self.forwarded += queries.count()
        for mask in masks(sub, sub_tree, to_local):
            queries.add(mask)
        self.child_queries += queries.count()
        answers = _solve_node(sub, sub_tree, weights(sub, to_parent, to_local), queries, seed,
                                   self.context, self.level + 1)
        return sub, sub_tree, to_parent, to_local, answers

    def recurse_t(self):
        """Recurse into H[T] and answer e in E(T), x in V(T) - {t}."""
        others = self.sep.in_s.copy()
        others[self.t] = False

        def weights(sub, to_parent, to_local):
            restricted = [ext_sub(w[to_parent], self.plen) for w in self.weights]
            return restricted + [self.crossing_weights(others, to_local, sub.n, self.plen)]

        def masks(sub, sub_tree, to_local):
            return [full_rows(sub.n, sub_tree.root)]

        sub, sub_tree, to_parent, _, child = self._descend(
            self.sep.in_t, self.t, weights, masks, self.seed_t)
        help_t = child[-1]
        local = np.flatnonzero(np.arange(sub.n) != sub_tree.root)
        block = np.ix_(local, local)
        rows = cols = to_parent[local]
        for j, answer in enumerate(self.answers):
            combined = child[j][block]
            np.minimum(combined, help_t[block], out=combined)
            np.add(combined, self.plen, out=combined, where=combined < COMPACT_INFINITY)
            answer[np.ix_(rows, cols)] = combined
        self.metrics.n_weights_t = len(child)

    def recurse_s(self):
        """Recurse into H[S] and answer e in E(S), x in V(S) - {t}."""
        others = self.sep.in_t.copy()
        others[self.t] = False
        union = self.pivots.union.tolist()

        def weights(sub, to_parent, to_local):
            restricted = []
            for j, w in enumerate(self.weights):
                ws = w[to_parent].copy()
                if self.plen > 0:
                    ws[to_local[self.path]] = self.avoid_path[j][self.path]
                restricted.append(ws)
            restricted.append(self.crossing_weights(others, to_local, sub.n, 0))
            for b in union:
                restricted.append(ext_add(self.depth[b], self.from_pivot[b][to_parent]))
            return restricted

        def masks(sub, sub_tree, to_local):
            heads = to_local[self.path[1:]]
            by_pivot = {b: np.zeros((sub.n, sub.n), dtype=bool) for b in union}
            for k in self.pivots.scales:
                rows = heads[self.pivots.edges_in(k)]
                for b in self.pivots.pivots_of(k).tolist():
                    by_pivot[b][rows] = True
            return [full_rows(sub.n, sub_tree.root)] + [by_pivot[b] for b in union]

        sub, sub_tree, to_parent, to_local, child = self._descend(
            self.sep.in_s, self.source, weights, masks, self.seed_s)
        self.metrics.n_weights_s = len(child)
        base = len(self.weights)
        help_s = child[base]
        pivot_index = {b: base + 1 + n for n, b in enumerate(union)}

        t_local = int(to_local[self.t])
        cols_l = np.flatnonzero(np.arange(sub.n) != t_local)
        cols = to_parent[cols_l]
        path_local = to_local[self.path]
        off_path = np.ones(sub.n, dtype=bool)
        off_path[path_local] = False
        rows_l = np.flatnonzero(off_path)
        block = np.ix_(rows_l, cols_l)
        for j, answer in enumerate(self.answers):
            combined = child[j][block]
            np.minimum(combined, help_s[block], out=combined)
            answer[np.ix_(to_parent[rows_l], cols)] = combined

        for i in range(self.plen):
            head = int(self.path[i + 1])
            head_l = int(path_local[i + 1])
            asked = [j for j, mask in enumerate(self.queries.masks) if mask[head, cols].any()]
            if not asked:
                continue
            depart = self.depart.row(i)[cols]
            pivot = self.pivot_row(i, head_l, child, pivot_index, to_parent)[cols_l]
            help_row = expand(help_s[head_l, cols_l])
            for j in asked:
                terms = {
                    'recursive': expand(child[j][head_l, cols_l]),
                    'avoid_path': self.avoid_path[j][cols],
                    'depart': depart,
                    'pivot': pivot,
                    'via_t': ext_sub(ext_add(help_row, self.dste[j, i]), self.plen),
                }
                self.answers[j][head, cols] = self.combine(i, j, cols, terms)

    def pivot_row(self, i, head_l, child, pivot_index, to_parent) -> np.ndarray:
        """pivot(e_i, x) over the local vertices of S."""
        k = int(self.pivots.bands[i])
        if k == 0:
            return self.depart.row(i)[to_parent]
        bk = self.pivots.pivots_of(k)
        if bk.size == 0:
            return np.full(to_parent.size, INFINITY, dtype=np.int64)
        offsets = ext_sub(self.depart.at_pivots(i), self.depth[bk])
        rows = expand(np.stack([child[pivot_index[b]][head_l] for b in bk.tolist()]))
        return ext_add(rows, offsets[:, None]).min(axis=0)

    def finalize(self) -> List[np.ndarray]:
        """Off-path queries get d(s, x); on-path ones keep their case answer."""
        on_path = on_path_mask(build_lca(self.tree), self.tree)
        trivial = np.broadcast_to(compact(self.depth), (self.n, self.n))
        for j, answer in enumerate(self.answers):
            mask = self.queries.masks[j]
            gap = mask & on_path & (answer == UNANSWERED)
            if gap.any():
                v, x = (int(a[0]) for a in np.nonzero(gap))
                raise InternalError(f"query (edge into {v}, x={x}, w={j}) left unanswered at level {self.level}")
            np.copyto(answer, trivial, where=~on_path)
            answer[~mask] = COMPACT_INFINITY
        return self.answers
