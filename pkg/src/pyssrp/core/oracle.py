"""
Brute-force SSRP referees: one shortest-path computation per failed edge.
"""
from dataclasses import dataclass, field
import heapq
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.core.estimates import EstimateTable, check_coverage
from pyssrp.core.graph import (EdgeSet, Graph, INFINITY, WeightFunction,
                               dijkstra_weighted_view)
from pyssrp.core.tree import build_bfs_tree
from pyssrp.errors import GraphError

logger = set_logger(get_module_name(__file__))

Edge = Tuple[int, int]


class WeightedGraph:
    """Graph with positive integer edge lengths.

    Lengths are raw integers; the reduction stores fixed-point values there.
    An undirected graph keeps each edge once and traverses it both ways.

    Parameters
    ----------
    n: int
    edges: iterable of (int, int, int)
        (u, v, length) triples.
    directed: bool
    """

    def __init__(self, n: int, edges: Iterable[Tuple[int, int, int]], directed: bool = True):
        self.n = int(n)
        self.directed = directed
        self._lengths: Dict[Edge, int] = {}
        self._adjacency: List[List[Tuple[int, int]]] = [[] for _ in range(self.n)]
        for u, v, length in edges:
            u, v, length = int(u), int(v), int(length)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) out of range")
            if length <= 0:
                raise GraphError(f"edge ({u}, {v}) has non-positive length {length}")
            key = self._key(u, v)
            if key in self._lengths:
                raise GraphError(f"duplicate edge ({u}, {v})")
            self._lengths[key] = length
            self._adjacency[u].append((v, length))
            if not directed:
                self._adjacency[v].append((u, length))

    def _key(self, u: int, v: int) -> Edge:
        return (u, v) if self.directed or u < v else (v, u)

    @property
    def m(self) -> int:
        return len(self._lengths)

    def has_edge(self, u: int, v: int) -> bool:
        return self._key(u, v) in self._lengths

    def length(self, u: int, v: int) -> int:
        return self._lengths[self._key(u, v)]

    def neighbors(self, u: int) -> Sequence[Tuple[int, int]]:
        return self._adjacency[u]

    def __repr__(self):
        kind = 'directed' if self.directed else 'undirected'
        return f"WeightedGraph(n={self.n}, m={self.m}, {kind})"


def weighted_distances(g: WeightedGraph, s: int, failed: Edge = None) -> np.ndarray:
    """Dijkstra from s in g, skipping the failed edge in either direction if undirected."""
    blocked = g._key(*failed) if failed is not None else None
    dist = [INFINITY] * g.n
    dist[s] = 0
    heap = [(0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, length in g.neighbors(u):
            if blocked is not None and g._key(u, v) == blocked:
                continue
            nd = d + length
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return np.array(dist, dtype=np.int64)


def weighted_ssrp_oracle(g: WeightedGraph, s: int, failed_edges) -> Dict[Edge, np.ndarray]:
    """Exact distances from s for every failed edge, one Dijkstra each."""
    out = {}
    for u, v in failed_edges:
        if not g.has_edge(u, v):
            raise GraphError(f"failed edge ({u}, {v}) is not an edge of the graph")
        out[(int(u), int(v))] = weighted_distances(g, s, (int(u), int(v)))
    return out


def ssrp_oracle(g: Graph, w: WeightFunction, tree_edges) -> EstimateTable:
    """Exact d(s, x, H_w - e) for every given edge e and every x."""
    table = EstimateTable(g.n)
    for e in tree_edges:
        table.set_row(e, 0, dijkstra_weighted_view(g, w, EdgeSet([e], graph=g)))
    return table


@dataclass
class VerificationReport:
    exact: int = 0
    over: int = 0
    under: int = 0
    underestimates: List[Tuple[Edge, int, int, int]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.exact + self.over + self.under

    @property
    def ok(self) -> bool:
        return self.under == 0

    def summary(self) -> str:
        return f"queries={self.total} exact={self.exact} overestimate={self.over} underestimate={self.under}"


def verify_estimates(g: Graph, source: int, table: EstimateTable) -> VerificationReport:
    """Compare a table over E(K) x V against the exact oracle.

    Raises CoverageError when a tree edge or destination is missing.
    """
    tree = build_bfs_tree(g, source)
    edges = tree.tree_edges()
    check_coverage(table, edges)
    exact = ssrp_oracle(g, WeightFunction.infinite(g.n, source), edges)
    report = VerificationReport()
    for e in edges:
        got = table.row(e)
        want = exact.row(e)
        report.exact += int((got == want).sum())
        report.over += int((got > want).sum())
        low = np.flatnonzero(got < want)
        report.under += low.size
        report.underestimates.extend((e, int(x), int(got[x]), int(want[x])) for x in low)
    if report.under:
        logger.error(f"{report.under} underestimated queries")
    return report
