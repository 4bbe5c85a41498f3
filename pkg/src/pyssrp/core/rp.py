"""
Replacement paths from s to t along one shortest path P.

Two backends share the ``RpEstimates`` contract: every estimate is at least
the true replacement distance. ``exact`` runs one BFS per edge of P;
``sampled`` splits detours by length, finding short ones with BFS balls
pruned by the distance from s and covering long ones with randomly sampled
vertices.
"""
from collections import deque
from dataclasses import dataclass
import math
from typing import Dict, Optional, Tuple

import numpy as np
from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.core.graph import EdgeSet, Graph, INFINITY, bfs, ext_add
from pyssrp.errors import PathError

logger = set_logger(get_module_name(__file__))

BACKENDS = ('exact', 'sampled')


@dataclass(frozen=True, eq=False)
class RpEstimates:
    """lengths[i] estimates d(s, t, g - e_i) for e_i = (path[i], path[i + 1]).

    Attributes
    ----------
    traversals: int
        Full breadth-first searches of the graph.
    scanned: int
        Edges examined by the pruned short-detour searches.
    n_samples: int
        Vertices sampled for long detours.
    """
    path: np.ndarray
    lengths: np.ndarray
    traversals: int = 0
    scanned: int = 0
    n_samples: int = 0

    def __len__(self):
        return self.lengths.size

    def edges(self):
        return [(int(u), int(v)) for u, v in zip(self.path[:-1], self.path[1:])]

    def as_dict(self) -> Dict[Tuple[int, int], int]:
        return dict(zip(self.edges(), self.lengths.tolist()))

    def __getitem__(self, edge) -> int:
        return self.as_dict()[tuple(edge)]


def _as_path(g: Graph, path) -> np.ndarray:
    path = np.asarray(path, dtype=np.int64).ravel()
    if path.size == 0:
        raise PathError("a path needs at least one vertex")
    if path.min() < 0 or path.max() >= g.n:
        raise PathError("path vertex out of range")
    for u, v in zip(path[:-1].tolist(), path[1:].tolist()):
        if not g.has_edge(u, v):
            raise PathError(f"({u}, {v}) is not an edge of the graph")
    return path


def replacement_paths_exact(g: Graph, path) -> RpEstimates:
    path = _as_path(g, path)
    s, t = int(path[0]), int(path[-1])
    lengths = [int(bfs(g, s, EdgeSet([e])).dist[t])
               for e in zip(path[:-1].tolist(), path[1:].tolist())]
    return RpEstimates(path, np.array(lengths, dtype=np.int64), traversals=len(lengths))


def short_detours(g: Graph, path: np.ndarray, on_path: EdgeSet, ell: int) -> Tuple[np.ndarray, int]:
    """Replacement lengths through detours of fewer than ell edges.

    A detour leaving P at p_a and first returning at p_b only visits vertices
    x with a - ell < d(s, x) < a + ell, since P is a shortest path. The search
    from p_a is restricted to those vertices, so every vertex is expanded by
    fewer than 2 ell sources and the whole phase scans O(ell m) edges.

    Returns
    -------
    tuple: (estimates per path edge, edges scanned)
    """
    length = path.size - 1
    best = np.full(length, INFINITY, dtype=np.int64)
    from_s = bfs(g, int(path[0])).dist.tolist()
    position = dict(zip(path.tolist(), range(length + 1)))
    succ = g._succ
    seen = [-1] * g.n
    depth = [0] * g.n
    scanned = 0
    for a in range(length):
        hi = min(length, a + ell - 1)
        if hi <= a:
            break
        src = int(path[a])
        seen[src] = a
        depth[src] = 0
        arrivals = np.full(hi - a, INFINITY, dtype=np.int64)
        queue = deque([src])
        while queue:
            u = queue.popleft()
            du = depth[u] + 1
            if du > ell - 1:
                continue
            for v in succ[u]:
                scanned += 1
                if seen[v] == a or (u, v) in on_path or not a - ell < from_s[v] < a + ell:
                    continue
                seen[v] = a
                depth[v] = du
                queue.append(v)
                b = position.get(v, -1)
                if a < b <= hi:
                    arrivals[b - a - 1] = du + length - b
        suffix = np.minimum.accumulate(arrivals[::-1])[::-1]
        best[a:hi] = np.minimum(best[a:hi], ext_add(suffix, a))
    return best, scanned


def replacement_paths_rz(g: Graph, path, rng: np.random.Generator, c: float = 3.0,
                         global_n: Optional[int] = None) -> RpEstimates:
    """Sampled replacement paths.

    A replacement path for e_i leaves P at some p_a (a <= i) and first
    returns at some p_b (b > i) through a detour avoiding E(P). Detours
    shorter than ell = floor(sqrt(n)) are found by pruned BFS balls around
    every p_a; longer ones contain a sampled vertex w.h.p.

    Parameters
    ----------
    g: Graph
    path: sequence of int
        A shortest s-t path of g.
    rng: np.random.Generator
    c: float
        Sampling constant.
    global_n: int, optional
        Vertex count used in the sampling logarithm, defaults to g.n.
    """
    path = _as_path(g, path)
    length = path.size - 1
    if length == 0:
        return RpEstimates(path, np.zeros(0, dtype=np.int64))
    n = g.n
    ell = max(1, math.isqrt(n))
    on_path = EdgeSet.from_path(path)
    best, scanned = short_detours(g, path, on_path, ell)
    traversals = 1

    log_n = math.log(global_n if global_n else n)
    probability = min(1.0, c * log_n / ell)
    samples = np.flatnonzero(rng.random(n) < probability)
    reverse = g.reverse()
    reverse_path = on_path.reversed()
    positions = np.arange(length + 1)
    for r in samples.tolist():
        to_r = bfs(reverse, r, reverse_path).dist
        from_r = bfs(g, r, on_path).dist
        traversals += 2
        head = np.minimum.accumulate(ext_add(to_r[path], positions))
        tail = np.minimum.accumulate(ext_add(from_r[path], length - positions)[::-1])[::-1]
        best = np.minimum(best, ext_add(head[:-1], tail[1:]))
    logger.debug(f"sampled replacement paths: |P|={length}, {samples.size} samples, {scanned} edges scanned")
    return RpEstimates(path, best, traversals=traversals, scanned=scanned, n_samples=int(samples.size))


def replacement_paths(g: Graph, path, rng: np.random.Generator, c: float = 3.0,
                      backend: str = 'sampled', global_n: Optional[int] = None) -> RpEstimates:
    """Dispatch to a backend; short paths (|P| <= sqrt(n)) always run exact."""
    if backend not in BACKENDS:
        raise ValueError(f"unknown replacement-path backend {backend!r}")
    if backend == 'exact' or len(path) - 1 <= math.isqrt(g.n):
        return replacement_paths_exact(g, path)
    return replacement_paths_rz(g, path, rng, c=c, global_n=global_n)
