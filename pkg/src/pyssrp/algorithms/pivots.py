"""
Pivot sampling, the banding of the separator path and the tables built on
them: depart(e, x) and the s-t replacement distances per weight function.

Edges of the path P = (p_0 = s, ..., p_L = t) are addressed by position:
edge i is (p_i, p_{i+1}).
"""
from dataclasses import dataclass, field
import math
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.core.graph import EdgeSet, Graph, INFINITY, bfs, ext_add
from pyssrp.errors import PivotSamplingError

logger = set_logger(get_module_name(__file__))

MAX_RETRIES = 64


@dataclass(eq=False)
class PivotSets:
    """Bands of the path edges and the pivot sample of each band.

    Attributes
    ----------
    scale: int
        floor(sqrt(n_H)).
    bands: np.ndarray
        bands[i] = k such that edge i is in P_k.
    pivots: dict
        k -> sorted vertex ids of B_k, for k >= 1.
    """
    scale: int
    bands: np.ndarray
    pivots: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def scales(self):
        """Bands k >= 1 holding at least one edge."""
        return sorted(int(k) for k in np.unique(self.bands) if k >= 1)

    def edges_in(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.bands == k)

    def pivots_of(self, k: int) -> np.ndarray:
        return self.pivots.get(k, np.zeros(0, dtype=np.int64))

    @property
    def union(self) -> np.ndarray:
        if not self.pivots:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(list(self.pivots.values())))

    def product(self, k: int) -> int:
        return int(self.edges_in(k).size * self.pivots_of(k).size)


def partition_path(path: Sequence[int], dist_to_t, n_h: int) -> PivotSets:
    """Band every edge of P by the distance of its head to t.

    Band 0 holds edges whose head is closer than 2r to t, band k >= 1 those
    with 2^k r <= d(head, t) < 2^(k+1) r, where r = floor(sqrt(n_h)).
    """
    scale = max(1, math.isqrt(n_h))
    heads = np.asarray(dist_to_t, dtype=np.int64)[1:]
    bands = np.array([max(0, (int(d) // scale).bit_length() - 1) for d in heads], dtype=np.int64)
    return PivotSets(scale=scale, bands=bands)


def sample_pivots(n_h: int, global_n: int, c: float, rng: np.random.Generator,
                  scales: Optional[Sequence[int]] = None,
                  max_retries: int = MAX_RETRIES) -> Dict[int, np.ndarray]:
    """Sample B_k for each scale k.

    Every vertex joins B_k independently with probability
    min(1, c ln(global_n) / (2^k r)); a B_k larger than
    3 c ln(global_n) r / 2^k is drawn again.

    Parameters
    ----------
    n_h: int
        Vertex count of the current graph, r = floor(sqrt(n_h)).
    global_n: int
        Vertex count of the input graph.
    c: float
    rng: np.random.Generator
    scales: sequence of int, optional
        Defaults to 1..floor(log2(n_h)).
    """
    if n_h < 2:
        raise PivotSamplingError(f"pivot sampling needs at least 2 vertices, got {n_h}")
    scale = math.isqrt(n_h)
    log_n = math.log(max(global_n, 2))
    if scales is None:
        scales = range(1, n_h.bit_length())
    pivots = {}
    for k in scales:
        probability = c * log_n / (2 ** k * scale)
        if probability >= 1:
            pivots[k] = np.arange(n_h, dtype=np.int64)
            continue
        cap = 3 * c * log_n * scale / 2 ** k
        for attempt in range(max_retries):
            chosen = np.flatnonzero(rng.random(n_h) < probability)
            if chosen.size <= cap:
                break
            logger.warning(f"B_{k} has {chosen.size} pivots, above {cap:.1f}: resampling")
        else:
            raise PivotSamplingError(f"B_{k} exceeded {cap:.1f} pivots {max_retries} times")
        if chosen.size == 0:
            logger.warning(f"B_{k} is empty, pivot estimates of band {k} stay infinite")
        pivots[k] = chosen
    return pivots


class DepartTable:
    """depart(e_i, x), materialized one path edge at a time.

    For band 0 edges it is d(s, x, H - e_i). For band k it is
    min over b in B_k of depart(e_i, b) + d(b, x, H - P), with
    depart(e_i, b) = min over j <= i of j + d(p_j, b, H - P).
    """

    def __init__(self, graph: Graph, path: np.ndarray, pivot_sets: PivotSets,
                 from_pivot: Mapping[int, np.ndarray], to_pivot: Mapping[int, np.ndarray]):
        self.graph = graph
        self.path = np.asarray(path, dtype=np.int64)
        self.pivot_sets = pivot_sets
        self.from_pivot = from_pivot
        self.to_pivot = to_pivot
        self.traversals = 0
        self._rows: Dict[int, np.ndarray] = {}
        self._prefix: Dict[int, np.ndarray] = {}
        self._spread: Dict[int, np.ndarray] = {}

    def _prefix_minima(self, k: int) -> np.ndarray:
        if k not in self._prefix:
            bk = self.pivot_sets.pivots_of(k)
            positions = np.arange(self.path.size)
            if bk.size:
                reach = np.stack([self.to_pivot[b][self.path] for b in bk.tolist()])
                table = np.minimum.accumulate(ext_add(reach, positions[None, :]), axis=1)
            else:
                table = np.zeros((0, self.path.size), dtype=np.int64)
            self._prefix[k] = table
        return self._prefix[k]

    def at_pivots(self, i: int) -> np.ndarray:
        """depart(e_i, b) for every b in B_k, k the band of edge i."""
        k = int(self.pivot_sets.bands[i])
        if k == 0:
            raise ValueError("band 0 edges have no pivots")
        return self._prefix_minima(k)[:, i]

    def row(self, i: int) -> np.ndarray:
        if i in self._rows:
            return self._rows[i]
        k = int(self.pivot_sets.bands[i])
        if k == 0:
            failed = EdgeSet([(int(self.path[i]), int(self.path[i + 1]))])
            row = bfs(self.graph, int(self.path[0]), failed).dist
            self.traversals += 1
        else:
            bk = self.pivot_sets.pivots_of(k)
            if bk.size == 0:
                logger.warning(f"no pivots in band {k} of a path with {self.path.size - 1} edges")
                row = np.full(self.graph.n, INFINITY, dtype=np.int64)
            else:
                if k not in self._spread:
                    self._spread[k] = np.stack([self.from_pivot[b] for b in bk.tolist()])
                row = ext_add(self.at_pivots(i)[:, None], self._spread[k]).min(axis=0)
        self._rows[i] = row
        return row


def compute_depart(graph: Graph, path, pivot_sets: PivotSets,
                   from_pivot: Mapping[int, np.ndarray], to_pivot: Mapping[int, np.ndarray]) -> DepartTable:
    return DepartTable(graph, path, pivot_sets, from_pivot, to_pivot)


def compute_dste(path, avoid_path: Sequence[np.ndarray], to_t: np.ndarray, rp_lengths) -> np.ndarray:
    """Replacement distance from s to t in H_w - e for every edge of P and every w.

    Parameters
    ----------
    path: sequence of int
        P from s to t.
    avoid_path: sequence of np.ndarray
        d(s, ., H_w - P), one array per weight function.
    to_t: np.ndarray
        d(., t, H).
    rp_lengths: np.ndarray
        Unweighted replacement lengths d^(s, t, H - e_i).

    Returns
    -------
    np.ndarray: (|W|, |P|) estimates.
    """
    path = np.asarray(path, dtype=np.int64)
    length = path.size - 1
    out = np.zeros((len(avoid_path), length), dtype=np.int64)
    if length == 0:
        return out
    rp_lengths = np.asarray(rp_lengths, dtype=np.int64)
    for j, dist in enumerate(avoid_path):
        through = ext_add(dist[path], to_t[path])
        after = np.minimum.accumulate(through[::-1])[::-1]
        out[j] = np.minimum(rp_lengths, after[1:])
    return out
