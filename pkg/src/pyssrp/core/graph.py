"""
Directed unweighted graphs in adjacency-array form, and the traversals the
replacement-path machinery is built from.

Distances are ``int64`` values; unreachable vertices carry the reserved
``INFINITY`` sentinel, and every sum involving it saturates back to it.
Failed edges are never removed from a graph: traversals receive an
``EdgeSet`` and skip its members on the fly.
"""
from collections import deque
from dataclasses import dataclass, field
import heapq
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.errors import GraphError, GraphParseError, WeightRequirementError

logger = set_logger(get_module_name(__file__))

INFINITY = 1 << 60
COMPACT_INFINITY = np.iinfo(np.int32).max

Edge = Tuple[int, int]


def ext_add(a, b):
    """Saturating sum of extended distances, for scalars or arrays."""
    if np.isscalar(a) and np.isscalar(b):
        if a >= INFINITY or b >= INFINITY:
            return INFINITY
        return int(min(a + b, INFINITY))
    return np.minimum(np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64), INFINITY)


def ext_sub(a, k):
    """Subtract a finite offset from extended distances; INFINITY is kept."""
    if np.isscalar(a):
        return INFINITY if a >= INFINITY else int(a - k)
    a = np.asarray(a, dtype=np.int64)
    return np.where(a >= INFINITY, INFINITY, a - k)


def compact(values) -> np.ndarray:
    """int32 copy of extended distances, INFINITY stored as COMPACT_INFINITY."""
    return np.minimum(values, COMPACT_INFINITY).astype(np.int32)


def expand(values) -> np.ndarray:
    """int64 copy of compact distances, back on the INFINITY convention."""
    out = np.asarray(values).astype(np.int64)
    out[out >= COMPACT_INFINITY] = INFINITY
    return out


def format_dist(value) -> str:
    return 'inf' if value >= INFINITY else str(int(value))


def parse_dist(text: str) -> int:
    text = text.strip()
    if text.lower() == 'inf':
        return INFINITY
    value = int(text)
    if value < 0:
        raise ValueError(f"negative distance {text}")
    return value


def _adjacency(n, tails, heads):
    order = np.lexsort((heads, tails))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(tails, minlength=n), out=indptr[1:])
    return indptr, heads[order]


class Graph:
    """Immutable simple directed graph with unit-length edges.

    Parameters
    ----------
    n: int
        Number of vertices, identified by 0..n-1.
    edges: sequence of (int, int)
        Directed edges. Self-loops and duplicates are rejected.
    """

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        n = int(n)
        if n < 0:
            raise GraphError(f"negative vertex count {n}")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size:
            if arr.min() < 0 or arr.max() >= n:
                raise GraphError(f"edge endpoint out of range for a graph with {n} vertices")
            loops = np.flatnonzero(arr[:, 0] == arr[:, 1])
            if loops.size:
                raise GraphError(f"self-loop at vertex {arr[loops[0], 0]}")
            keys = arr[:, 0] * n + arr[:, 1]
            if np.unique(keys).size != keys.size:
                raise GraphError("duplicate edge")
        arr = arr.copy()
        arr.setflags(write=False)
        self._n = n
        self._edges = arr
        self.out_ptr, self.out_idx = _adjacency(n, arr[:, 0], arr[:, 1])
        self.in_ptr, self.in_idx = _adjacency(n, arr[:, 1], arr[:, 0])
        # python lists keep the traversal inner loops free of numpy scalars
        self._succ = [self.out_idx[self.out_ptr[u]:self.out_ptr[u + 1]].tolist() for u in range(n)]
        self._pred = [self.in_idx[self.in_ptr[v]:self.in_ptr[v + 1]].tolist() for v in range(n)]
        self._edge_set = frozenset(map(tuple, arr.tolist()))
        self._reverse = None

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> np.ndarray:
        """(m, 2) array of directed edges in construction order."""
        return self._edges

    def successors(self, u: int) -> Sequence[int]:
        return self._succ[u]

    def predecessors(self, v: int) -> Sequence[int]:
        return self._pred[v]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edge_set

    def reverse(self) -> 'Graph':
        """The graph with every edge flipped, built once and cached."""
        if self._reverse is None:
            self._reverse = Graph(self._n, self._edges[:, ::-1])
            self._reverse._reverse = self
        return self._reverse

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and self._edge_set == other._edge_set

    __hash__ = None

    def __repr__(self):
        return f"Graph(n={self._n}, m={self.m})"


class EdgeSet:
    """Membership view over edges, used to express H - A during traversals."""

    __slots__ = ('_edges',)

    def __init__(self, edges: Iterable[Edge] = (), graph: Optional[Graph] = None):
        self._edges = frozenset((int(u), int(v)) for u, v in edges)
        if graph is not None:
            for u, v in self._edges:
                if not graph.has_edge(u, v):
                    raise GraphError(f"edge ({u}, {v}) is not an edge of the host graph")

    @classmethod
    def from_path(cls, path: Sequence[int]) -> 'EdgeSet':
        path = [int(v) for v in path]
        return cls(zip(path[:-1], path[1:]))

    def reversed(self) -> 'EdgeSet':
        return EdgeSet((v, u) for u, v in self._edges)

    def __contains__(self, edge) -> bool:
        return edge in self._edges

    def __iter__(self):
        return iter(sorted(self._edges))

    def __len__(self):
        return len(self._edges)

    def __repr__(self):
        return f"EdgeSet({sorted(self._edges)})"


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """Per-vertex weights w describing the virtual graph H_w.

    H_w is H plus a virtual edge (source, v) of length w(v) for every v.
    Virtual edges are never failed.
    """
    source: int
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.int64).copy()
        if weights.ndim != 1:
            raise GraphError("weights must be one value per vertex")
        if weights.size and weights.min() < 0:
            raise GraphError("weights must be non-negative")
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def infinite(cls, n: int, source: int) -> 'WeightFunction':
        """w ≡ ∞: H_w has no usable virtual edge."""
        return cls(source, np.full(n, INFINITY, dtype=np.int64))

    def violations(self, graph: Graph) -> np.ndarray:
        """Vertices v with w(v) < d(source, v, graph)."""
        dist = bfs(graph, self.source).dist
        return np.flatnonzero(self.weights < dist)

    def check_requirement(self, graph: Graph) -> None:
        bad = self.violations(graph)
        if bad.size:
            v = int(bad[0])
            raise WeightRequirementError(
                f"w({v}) = {format_dist(self.weights[v])} is below d({self.source}, {v})")


class Traversal(NamedTuple):
    dist: np.ndarray
    parent: np.ndarray


def bfs(g: Graph, src: int, forbidden: Optional[EdgeSet] = None,
        limit: Optional[int] = None) -> Traversal:
    """Breadth-first search from src in g - forbidden.

    Parameters
    ----------
    g: Graph
    src: int
        Start vertex.
    forbidden: EdgeSet, optional
        Edges the search may not use.
    limit: int, optional
        Only vertices at distance at most ``limit`` are labelled.

    Returns
    -------
    Traversal: distances (INFINITY when unreachable) and BFS parents (-1 for
        src and unreachable vertices).
    """
    n = g.n
    if not 0 <= src < n:
        raise GraphError(f"source {src} out of range for a graph with {n} vertices")
    blocked = forbidden if forbidden else None
    succ = g._succ
    dist = [INFINITY] * n
    parent = [-1] * n
    dist[src] = 0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        if limit is not None and du > limit:
            continue
        for v in succ[u]:
            if dist[v] != INFINITY:
                continue
            if blocked is not None and (u, v) in blocked:
                continue
            dist[v] = du
            parent[v] = u
            queue.append(v)
    return Traversal(np.array(dist, dtype=np.int64), np.array(parent, dtype=np.int64))


def dijkstra_weighted_view(g: Graph, w: WeightFunction,
                           forbidden: Optional[EdgeSet] = None) -> np.ndarray:
    """Distances from w.source in H_w - forbidden.

    Real edges have unit length; the virtual edge (source, v) has length w(v).
    """
    n = g.n
    s = w.source
    if not 0 <= s < n:
        raise GraphError(f"source {s} out of range for a graph with {n} vertices")
    blocked = forbidden if forbidden else None
    succ = g._succ
    dist = [INFINITY] * n
    dist[s] = 0
    heap = [(0, s)]
    finite = np.flatnonzero(w.weights < INFINITY)
    for v, length in zip(finite.tolist(), w.weights[finite].tolist()):
        if length < dist[v]:
            dist[v] = length
            heap.append((length, v))
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        nd = d + 1
        for v in succ[u]:
            if nd < dist[v] and (blocked is None or (u, v) not in blocked):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return np.array(dist, dtype=np.int64)


def reverse(g: Graph) -> Graph:
    return g.reverse()


def induced_subgraph(g: Graph, keep) -> Tuple[Graph, np.ndarray, np.ndarray]:
    """Sub-graph induced by ``keep``, with local ids ordered like parent ids.

    Returns
    -------
    Graph: the local graph.
    np.ndarray: to_parent, local id -> parent id.
    np.ndarray: to_local, parent id -> local id, -1 outside ``keep``.
    """
    if isinstance(keep, (set, frozenset)):
        keep = sorted(keep)
    keep = np.asarray(keep)
    ids = np.flatnonzero(keep) if keep.dtype == bool else np.unique(keep.astype(np.int64))
    if ids.size == 0:
        raise GraphError("empty vertex set")
    if ids[0] < 0 or ids[-1] >= g.n:
        raise GraphError("kept vertex out of range")
    to_local = np.full(g.n, -1, dtype=np.int64)
    to_local[ids] = np.arange(ids.size)
    edges = g.edges
    inside = (to_local[edges[:, 0]] >= 0) & (to_local[edges[:, 1]] >= 0)
    return Graph(ids.size, to_local[edges[inside]]), ids, to_local


def _parse_ints(fields, lineno):
    try:
        return [int(f) for f in fields]
    except ValueError:
        logger.error(f"Not an integer on line {lineno}: {' '.join(fields)}")
        raise GraphParseError(lineno, f"expected integers, got {' '.join(fields)!r}") from None


def parse_graph(text: str) -> Graph:
    """Read the edge-list format.

    Lines starting with '#' and blank lines are ignored. The first data line
    is ``<n> <m>``, followed by exactly m lines ``<u> <v>``.
    """
    header = None
    edges = []
    seen = set()
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise GraphParseError(lineno, f"expected two fields, got {len(fields)}")
        a, b = _parse_ints(fields, lineno)
        if header is None:
            if a < 0 or b < 0:
                raise GraphParseError(lineno, "negative vertex or edge count")
            header = (a, b)
            continue
        n, m = header
        if len(edges) == m:
            raise GraphParseError(lineno, f"more than the {m} announced edges")
        if not (0 <= a < n and 0 <= b < n):
            raise GraphParseError(lineno, f"vertex id out of range 0..{n - 1}")
        if a == b:
            raise GraphParseError(lineno, f"self-loop at vertex {a}")
        if (a, b) in seen:
            raise GraphParseError(lineno, f"duplicate edge ({a}, {b})")
        seen.add((a, b))
        edges.append((a, b))
    if header is None:
        raise GraphParseError(max(lineno, 1), "missing '<n> <m>' header")
    if len(edges) != header[1]:
        raise GraphParseError(max(lineno, 1), f"expected {header[1]} edges, found {len(edges)}")
    return Graph(header[0], edges)


def format_graph(g: Graph, comment: Optional[str] = None) -> str:
    lines = [f"# {comment}"] if comment else []
    lines.append(f"{g.n} {g.m}")
    lines.extend(f"{u} {v}" for u, v in g.edges.tolist())
    return '\n'.join(lines) + '\n'


def load_graph(path) -> Graph:
    graph = parse_graph(Path(path).read_text(encoding='utf-8'))
    logger.info(f"Loaded {graph} from {path}")
    return graph


def random_reachable_graph(n: int, m: int, rng: np.random.Generator) -> Graph:
    """Uniform random simple digraph in which every vertex is reachable from 0.

    A random spanning arborescence rooted at 0 is drawn first, then the
    remaining m - (n - 1) edges are drawn uniformly among the absent pairs.
    """
    if n < 1:
        raise GraphError("a graph needs at least one vertex")
    max_m = n * (n - 1)
    if m > max_m or m < n - 1:
        raise GraphError(f"cannot build a reachable simple digraph with n={n}, m={m}")
    edges = []
    present = set()
    attached = [0]
    for v in rng.permutation(np.arange(1, n)).tolist():
        u = attached[int(rng.integers(len(attached)))]
        edges.append((u, v))
        present.add((u, v))
        attached.append(v)
    extra = m - (n - 1)
    if 2 * extra <= max_m - (n - 1):
        while len(edges) < m:
            u, v = (int(x) for x in rng.integers(n, size=2))
            if u == v or (u, v) in present:
                continue
            edges.append((u, v))
            present.add((u, v))
    else:
        absent = [(u, v) for u in range(n) for v in range(n) if u != v and (u, v) not in present]
        for index in sorted(rng.choice(len(absent), size=extra, replace=False).tolist()):
            edges.append(absent[index])
    return Graph(n, edges)
