"""
Min-plus products computed by replacement-path queries on a layered gadget,
and all-pairs shortest paths by repeated squaring on top of them.

Gadget for a block of rows of X (entries in [1, 2) or inf) and for Y, with
L = floor(sqrt(n)) + 1:

- layers a_1..a_L, b_1..b_n, c_1..c_n; edge (a_i, b_k) of length X[i, k]
  and (b_k, c_j) of length Y[k, j] when finite;
- a spine x_1 - x_2 - ... - x_L of unit edges;
- for every i a path of 8(L - i) + 2 unit edges from x_i to a_i.

With the spine edge (x_i, x_{i+1}) failed, the shortest route from x_1 to
c_j descends to a_i, so its length is 8L - 7i + 1 + (X * Y)[i, j]; a length
of at least 8L - 7i + 5 means the product entry is infinite.
"""
from dataclasses import dataclass
import math
from typing import List, Tuple

import numpy as np
from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.core.graph import INFINITY, ext_add
from pyssrp.core.oracle import WeightedGraph, weighted_distances, weighted_ssrp_oracle
from pyssrp.errors import ReductionError
from pyssrp.reduction.fixed import ONE, SCALE_BITS
from pyssrp.reduction.matrix import MinPlusMatrix, minplus_direct

logger = set_logger(get_module_name(__file__))

METHODS = ('ssrp', 'direct')


def normalize_matrices(a: MinPlusMatrix, b: MinPlusMatrix) -> Tuple[MinPlusMatrix, MinPlusMatrix, int]:
    """Map integer matrices into [1, 2): entry / M + 1, M the least power of two above every entry.

    Returns
    -------
    MinPlusMatrix, MinPlusMatrix: the fixed-point images of a and b.
    int: M.
    """
    if a.scale_bits or b.scale_bits:
        raise ReductionError("normalization expects integer matrices")
    finite = np.concatenate([a.values[a.values < INFINITY], b.values[b.values < INFINITY]])
    if finite.size == 0:
        raise ReductionError("both matrices are entirely infinite")
    if finite.min() < 0:
        raise ReductionError("negative entries are outside the reduction")
    power = int(finite.max()).bit_length()
    if power > SCALE_BITS:
        raise ReductionError(f"entries above 2^{SCALE_BITS} cannot be normalized exactly")

    def scaled(m):
        return MinPlusMatrix(np.where(m.values < INFINITY, (m.values << (SCALE_BITS - power)) + ONE, INFINITY),
                             SCALE_BITS)

    return scaled(a), scaled(b), 1 << power


def denormalize(c_bar: MinPlusMatrix, m_bar: int) -> MinPlusMatrix:
    """Undo normalization on a product: (entry - 2) * M."""
    if not c_bar.is_fixed:
        raise ReductionError("denormalization expects a fixed-point matrix")
    power = m_bar.bit_length() - 1
    values = c_bar.values
    return MinPlusMatrix(np.where(values < INFINITY, (values - 2 * ONE) >> (SCALE_BITS - power), INFINITY), 0)


@dataclass(eq=False)
class Gadget:
    """Undirected gadget graph and the ids of its named vertices."""
    graph: WeightedGraph
    size: int
    rows: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    x: np.ndarray

    @property
    def spine_length(self) -> int:
        return self.x.size

    def spine_edges(self) -> List[Tuple[int, int]]:
        return [(int(u), int(v)) for u, v in zip(self.x[:-1], self.x[1:])]

    def calibration(self, i: int) -> int:
        """Raw d(x_1, a_i), for 1-based i."""
        return (8 * self.spine_length - 7 * i + 1) * ONE

    def threshold(self, i: int) -> int:
        return (8 * self.spine_length - 7 * i + 5) * ONE


def spine_size(n: int) -> int:
    return math.isqrt(n) + 1


def build_gadget(x_block: np.ndarray, y: MinPlusMatrix) -> Gadget:
    """Gadget for up to L - 1 rows of X (raw fixed-point values) against Y."""
    if not y.is_fixed or not y.in_unit_interval():
        raise ReductionError("Y must hold values in [1, 2) or inf")
    x_block = np.asarray(x_block, dtype=np.int64)
    n = y.size
    spine = spine_size(n)
    if x_block.ndim != 2 or x_block.shape[1] != n or x_block.shape[0] > spine - 1:
        raise ReductionError(f"a block holds at most {spine - 1} rows of length {n}")
    finite = x_block[x_block < INFINITY]
    if finite.size and (finite.min() < ONE or finite.max() >= 2 * ONE):
        raise ReductionError("X must hold values in [1, 2) or inf")

    a = np.arange(spine)
    b = spine + np.arange(n)
    c = spine + n + np.arange(n)
    x = spine + 2 * n + np.arange(spine)
    next_id = spine * 2 + 2 * n
    edges = []
    for i, k in zip(*np.nonzero(x_block < INFINITY)):
        edges.append((a[i], b[k], x_block[i, k]))
    for k, j in zip(*np.nonzero(y.values < INFINITY)):
        edges.append((b[k], c[j], y.values[k, j]))
    for i in range(spine - 1):
        edges.append((x[i], x[i + 1], ONE))
    for i in range(1, spine + 1):
        hops = 8 * (spine - i) + 2
        chain = [int(x[i - 1])] + list(range(next_id, next_id + hops - 1)) + [int(a[i - 1])]
        next_id += hops - 1
        edges.extend((u, v, ONE) for u, v in zip(chain[:-1], chain[1:]))
    graph = WeightedGraph(next_id, edges, directed=False)
    return Gadget(graph=graph, size=n, rows=x_block.shape[0], a=a, b=b, c=c, x=x)


def minplus_via_ssrp(x: MinPlusMatrix, y: MinPlusMatrix) -> MinPlusMatrix:
    """X * Y for [1, 2) matrices, read off replacement distances in gadgets.

    Rows are handled in blocks of L - 1; every block is one SSRP instance
    from x_1 failing each spine edge.
    """
    if x.size != y.size:
        raise ReductionError("operands differ in size")
    if not (x.is_fixed and y.is_fixed and x.in_unit_interval() and y.in_unit_interval()):
        raise ReductionError("operands must hold values in [1, 2) or inf")
    n = x.size
    batch = spine_size(n) - 1
    z = np.full((n, n), INFINITY, dtype=np.int64)
    for offset in range(0, n, batch):
        gadget = build_gadget(x.values[offset:offset + batch], y)
        failures = gadget.spine_edges()
        distances = weighted_ssrp_oracle(gadget.graph, int(gadget.x[0]), failures)
        for i in range(1, gadget.rows + 1):
            alpha = distances[failures[i - 1]][gadget.c]
            z[offset + i - 1] = np.where(alpha < gadget.threshold(i), alpha - gadget.calibration(i), INFINITY)
        logger.debug(f"min-plus rows {offset}..{offset + gadget.rows - 1} done on {gadget.graph}")
    return MinPlusMatrix(z, SCALE_BITS)


def check_calibration(gadget: Gadget) -> bool:
    """d(x_1, a_i) = 8L - 7i + 1 for every i, with the spine edge after x_i failed."""
    failures = gadget.spine_edges() + [None]
    for i in range(1, gadget.spine_length + 1):
        dist = weighted_distances(gadget.graph, int(gadget.x[0]), failures[i - 1])
        if dist[gadget.a[i - 1]] != gadget.calibration(i):
            logger.warning(f"calibration off at row {i}: {dist[gadget.a[i - 1]]} != {gadget.calibration(i)}")
            return False
    return True


def floyd_warshall(w0: MinPlusMatrix) -> MinPlusMatrix:
    d = w0.values.copy()
    for k in range(w0.size):
        np.minimum(d, ext_add(d[:, k, None], d[None, k, :]), out=d)
    return MinPlusMatrix(d, w0.scale_bits)


def apsp_via_minplus(w0: MinPlusMatrix, method: str = 'ssrp') -> MinPlusMatrix:
    """Distances by ceil(log2 n) squarings, each through normalization.

    Parameters
    ----------
    w0: MinPlusMatrix
        Non-negative integer lengths, inf for non-edges, zero diagonal.
    method: str
        'ssrp' for the gadget product, 'direct' for the textbook one.
    """
    if method not in METHODS:
        raise ReductionError(f"unknown min-plus method {method!r}")
    if w0.scale_bits:
        raise ReductionError("APSP expects an integer matrix")
    finite = w0.values[w0.values < INFINITY]
    if finite.size and finite.min() < 0:
        raise ReductionError("negative lengths are outside the reduction")
    if np.any(np.diag(w0.values) != 0):
        raise ReductionError("the diagonal must be zero")
    product = minplus_via_ssrp if method == 'ssrp' else minplus_direct
    d = w0
    for step in range((w0.size - 1).bit_length()):
        a_bar, b_bar, m_bar = normalize_matrices(d, d)
        squared = denormalize(product(a_bar, b_bar), m_bar)
        d = MinPlusMatrix(np.minimum(d.values, squared.values), 0)
        logger.debug(f"squaring {step + 1}: M={m_bar}")
    return d
