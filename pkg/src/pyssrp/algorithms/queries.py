"""
Query sets of one recursion node.

A query (e, x, w) is stored as a cell of a boolean matrix, one matrix per
weight function: row = head of the tree edge e, column = destination x.
"""
from typing import List

import numpy as np


class QuerySet:

    def __init__(self, n: int):
        self.n = int(n)
        self.masks: List[np.ndarray] = []

    @classmethod
    def full(cls, n: int, root: int) -> 'QuerySet':
        """E(K) x V for a single weight function."""
        queries = cls(n)
        queries.add(full_rows(n, root))
        return queries

    def add(self, mask) -> int:
        """Register the queries of a new weight function, returns its id."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.n, self.n):
            raise ValueError(f"query mask must be {self.n}x{self.n}")
        self.masks.append(mask)
        return len(self.masks) - 1

    @property
    def n_weights(self) -> int:
        return len(self.masks)

    def count(self) -> int:
        return sum(int(mask.sum()) for mask in self.masks)

    def restricted(self, w: int, to_parent: np.ndarray, root: int) -> np.ndarray:
        """Queries of weight w carried into a child with local ids; the child root row is dropped."""
        mask = self.masks[w][np.ix_(to_parent, to_parent)].copy()
        mask[root] = False
        return mask


def full_rows(n: int, root: int) -> np.ndarray:
    mask = np.ones((n, n), dtype=bool)
    mask[root] = False
    return mask
