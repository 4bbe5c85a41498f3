"""
BFS trees, the balanced tree separator and lowest-common-ancestor queries.

A tree edge is identified by its head vertex v: the edge (parent[v], v).
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.core.graph import Graph, INFINITY, bfs
from pyssrp.errors import SeparatorError, TreeError, UnreachableVertexError

logger = set_logger(get_module_name(__file__))


class BfsTree:
    """Rooted spanning tree given by a parent array.

    Parameters
    ----------
    root: int
        Root vertex, the only vertex with parent -1.
    parent: array of int
        parent[v] for every vertex.
    """

    def __init__(self, root: int, parent):
        parent = np.asarray(parent, dtype=np.int64).copy()
        n = parent.size
        if not 0 <= root < n:
            raise TreeError(f"root {root} out of range for {n} vertices")
        if parent[root] != -1:
            raise TreeError("the root must not have a parent")
        children: List[List[int]] = [[] for _ in range(n)]
        for v, p in enumerate(parent.tolist()):
            if v == root:
                continue
            if not 0 <= p < n:
                raise TreeError(f"vertex {v} has no parent")
            children[p].append(v)
        depth = np.full(n, -1, dtype=np.int64)
        depth[root] = 0
        order = [root]
        for u in order:
            for v in children[u]:
                depth[v] = depth[u] + 1
                order.append(v)
        if len(order) != n:
            raise TreeError("parent array does not describe a tree spanning every vertex")
        parent.setflags(write=False)
        depth.setflags(write=False)
        self.root = int(root)
        self.parent = parent
        self.depth = depth
        self.children = children
        self.order = np.array(order, dtype=np.int64)

    @property
    def n(self) -> int:
        return self.parent.size

    def edge_heads(self) -> np.ndarray:
        """Heads of the tree edges, ascending."""
        return np.flatnonzero(self.parent >= 0)

    def tree_edges(self) -> List[Tuple[int, int]]:
        return [(int(self.parent[v]), int(v)) for v in self.edge_heads()]

    def is_tree_edge(self, u: int, v: int) -> bool:
        return 0 <= v < self.n and u >= 0 and self.parent[v] == u

    def path_from_root(self, v: int) -> np.ndarray:
        path = [int(v)]
        while path[-1] != self.root:
            path.append(int(self.parent[path[-1]]))
        return np.array(path[::-1], dtype=np.int64)

    def subtree_sizes(self) -> np.ndarray:
        sizes = np.ones(self.n, dtype=np.int64)
        for v in self.order[:0:-1].tolist():
            sizes[self.parent[v]] += sizes[v]
        return sizes

    def restrict(self, to_parent: np.ndarray, to_local: np.ndarray, root: int) -> 'BfsTree':
        """The sub-tree spanned by the kept vertices, in local ids.

        Parameters
        ----------
        to_parent: np.ndarray
            local id -> id in this tree.
        to_local: np.ndarray
            id in this tree -> local id, -1 when not kept.
        root: int
            Root of the sub-tree, as an id in this tree.
        """
        local_parent = np.where(self.parent[to_parent] >= 0,
                                to_local[np.maximum(self.parent[to_parent], 0)], -1)
        local_root = int(to_local[root])
        if local_root < 0:
            raise TreeError(f"root {root} is not kept")
        local_parent[local_root] = -1
        return BfsTree(local_root, local_parent)

    def validate(self, graph: Graph) -> None:
        """Check tree edges exist in graph and depths are BFS distances."""
        for u, v in self.tree_edges():
            if not graph.has_edge(u, v):
                raise TreeError(f"tree edge ({u}, {v}) is not an edge of the graph")
        if not np.array_equal(bfs(graph, self.root).dist, self.depth):
            raise TreeError("depths differ from BFS distances")

    def __repr__(self):
        return f"BfsTree(root={self.root}, n={self.n})"


def build_bfs_tree(g: Graph, root: int) -> BfsTree:
    traversal = bfs(g, root)
    unreachable = np.flatnonzero(traversal.dist >= INFINITY)
    if unreachable.size:
        logger.error(f"{unreachable.size} vertices unreachable from {root}")
        raise UnreachableVertexError(int(unreachable[0]), root)
    return BfsTree(root, traversal.parent)


@dataclass(frozen=True, eq=False)
class Separation:
    """Split of a tree into two edge-disjoint sub-trees S and T sharing t.

    S contains the root and the root-to-t path ``path``; T is rooted at t.
    """
    t: int
    path: np.ndarray
    in_s: np.ndarray
    in_t: np.ndarray
    root: int

    @property
    def s_edges(self) -> np.ndarray:
        """Heads of the tree edges of S."""
        heads = self.in_s.copy()
        heads[self.root] = False
        return np.flatnonzero(heads)

    @property
    def t_edges(self) -> np.ndarray:
        heads = self.in_t.copy()
        heads[self.t] = False
        return np.flatnonzero(heads)

    @property
    def path_length(self) -> int:
        return len(self.path) - 1


def balanced_separator(tree: BfsTree) -> Separation:
    """Pick t and a set of its child sub-trees forming T.

    Descend into the heaviest child while it holds more than n//3 vertices.
    At t, child sub-trees are taken heaviest first (lowest id on ties) until
    T has more than n//3 vertices, then while T stays within ceil((n+1)/2).
    """
    n = tree.n
    if n < 3:
        raise SeparatorError(f"cannot separate a tree with {n} vertices")
    sizes = tree.subtree_sizes()
    lower = n // 3 + 1
    upper = (n + 2) // 2

    def heaviest_first(v):
        return sorted(tree.children[v], key=lambda c: (-sizes[c], c))

    t = tree.root
    while tree.children[t]:
        heavy = heaviest_first(t)[0]
        if sizes[heavy] < lower:
            break
        t = heavy

    chosen = []
    size_t = 1
    for c in heaviest_first(t):
        if size_t < lower or size_t + sizes[c] <= upper:
            chosen.append(c)
            size_t += int(sizes[c])

    in_t = np.zeros(n, dtype=bool)
    in_t[t] = True
    stack = list(chosen)
    while stack:
        v = stack.pop()
        in_t[v] = True
        stack.extend(tree.children[v])
    in_s = ~in_t
    in_s[t] = True
    return Separation(t=int(t), path=tree.path_from_root(t), in_s=in_s, in_t=in_t, root=tree.root)


class LcaIndex:
    """Euler tour with a sparse table of depth minima.

    first[v] and last[v] bound the occurrences of v in the tour, so u is in
    the subtree of v iff first[v] <= first[u] <= last[v].
    """

    def __init__(self, tree: BfsTree):
        n = tree.n
        euler = [tree.root]
        first = np.zeros(n, dtype=np.int64)
        last = np.zeros(n, dtype=np.int64)
        stack = [[tree.root, 0]]
        while stack:
            frame = stack[-1]
            kids = tree.children[frame[0]]
            if frame[1] < len(kids):
                child = kids[frame[1]]
                frame[1] += 1
                first[child] = len(euler)
                euler.append(child)
                stack.append([child, 0])
            else:
                last[frame[0]] = len(euler) - 1
                stack.pop()
                if stack:
                    euler.append(stack[-1][0])
        self.euler = np.array(euler, dtype=np.int64)
        self.first = first
        self.last = last
        depths = tree.depth[self.euler]
        size = self.euler.size
        levels = size.bit_length()
        table = np.zeros((levels, size), dtype=np.int64)
        table[0] = np.arange(size)
        for k in range(1, levels):
            half = 1 << (k - 1)
            span = size - (1 << k) + 1
            left = table[k - 1, :span]
            right = table[k - 1, half:half + span]
            table[k, :span] = np.where(depths[left] <= depths[right], left, right)
        self._table = table
        self._depths = depths
        self._log = np.zeros(size + 1, dtype=np.int64)
        for length in range(2, size + 1):
            self._log[length] = self._log[length // 2] + 1

    def lca(self, u: int, v: int) -> int:
        return int(self.lca_many(np.array([u]), np.array([v]))[0])

    def lca_many(self, us, vs) -> np.ndarray:
        fu = self.first[np.asarray(us, dtype=np.int64)]
        fv = self.first[np.asarray(vs, dtype=np.int64)]
        lo = np.minimum(fu, fv)
        hi = np.maximum(fu, fv)
        k = self._log[hi - lo + 1]
        a = self._table[k, lo]
        b = self._table[k, hi - (1 << k) + 1]
        best = np.where(self._depths[a] <= self._depths[b], a, b)
        return self.euler[best]


def build_lca(tree: BfsTree) -> LcaIndex:
    return LcaIndex(tree)


def on_tree_path(idx: LcaIndex, tree: BfsTree, x: int, e: Tuple[int, int]) -> bool:
    """True iff the tree edge e lies on the root-to-x tree path."""
    u, v = e
    if not tree.is_tree_edge(u, v):
        raise TreeError(f"({u}, {v}) is not a tree edge")
    return idx.lca(v, x) == v


def on_path_mask(idx: LcaIndex, tree: BfsTree) -> np.ndarray:
    """mask[v, x] is True iff the edge with head v lies on the root-to-x path."""
    first = idx.first
    mask = first[:, None] <= first[None, :]
    mask &= first[None, :] <= idx.last[:, None]
    mask[tree.root] = False
    return mask
