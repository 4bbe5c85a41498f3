"""
Query results keyed by (tree edge, destination, weight-function id).
"""
from typing import Dict, Iterator, NamedTuple, Tuple

import numpy as np
from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.core.graph import format_dist, parse_dist
from pyssrp.errors import CoverageError, GraphParseError

logger = set_logger(get_module_name(__file__))

TSV_HEADER = ('eu', 'ev', 'x', 'dist')
MISSING = -1

Edge = Tuple[int, int]


class Query(NamedTuple):
    e: Edge
    x: int
    w: int = 0


class EstimateTable:
    """Distance estimates d^_w(s, x, e), stored one row per (edge, w).

    Parameters
    ----------
    n: int
        Number of destinations x, rows have this length.
    """

    def __init__(self, n: int):
        self.n = int(n)
        self._rows: Dict[Tuple[Edge, int], np.ndarray] = {}

    def set_row(self, e: Edge, w: int, values) -> None:
        values = np.asarray(values, dtype=np.int64)
        if values.shape != (self.n,):
            raise ValueError(f"row must have {self.n} entries")
        self._rows[((int(e[0]), int(e[1])), int(w))] = values.copy()

    def row(self, e: Edge, w: int = 0) -> np.ndarray:
        return self._rows[((int(e[0]), int(e[1])), int(w))]

    def get(self, e: Edge, x: int, w: int = 0) -> int:
        return int(self.row(e, w)[x])

    def __getitem__(self, query: Query) -> int:
        return self.get(query.e, query.x, query.w)

    def edges(self, w: int = 0):
        return sorted(e for e, key_w in self._rows if key_w == w)

    def __len__(self):
        return sum(int((row != MISSING).sum()) for row in self._rows.values())

    def __iter__(self) -> Iterator[Tuple[Query, int]]:
        for (e, w) in sorted(self._rows, key=lambda key: (key[1], key[0])):
            for x, value in enumerate(self._rows[(e, w)].tolist()):
                if value != MISSING:
                    yield Query(e, x, w), value

    def missing(self) -> int:
        return sum(int((row == MISSING).sum()) for row in self._rows.values())

    def to_tsv(self, w: int = 0) -> str:
        lines = ['\t'.join(TSV_HEADER)]
        for e in self.edges(w):
            for x, value in enumerate(self.row(e, w).tolist()):
                if value != MISSING:
                    lines.append(f"{e[0]}\t{e[1]}\t{x}\t{format_dist(value)}")
        return '\n'.join(lines) + '\n'


def read_estimates_tsv(text: str, n: int) -> EstimateTable:
    """Parse a results document; cells it does not mention stay MISSING."""
    table = EstimateTable(n)
    rows: Dict[Edge, np.ndarray] = {}
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split('\t')
        if not header_seen:
            if tuple(f.strip() for f in fields) != TSV_HEADER:
                raise GraphParseError(lineno, f"expected header {' '.join(TSV_HEADER)}")
            header_seen = True
            continue
        if len(fields) != 4:
            raise GraphParseError(lineno, f"expected 4 tab-separated fields, got {len(fields)}")
        try:
            eu, ev, x = (int(f) for f in fields[:3])
            dist = parse_dist(fields[3])
        except ValueError as err:
            raise GraphParseError(lineno, str(err)) from None
        if not 0 <= x < n:
            raise GraphParseError(lineno, f"destination {x} out of range")
        row = rows.setdefault((eu, ev), np.full(n, MISSING, dtype=np.int64))
        if row[x] != MISSING:
            raise GraphParseError(lineno, f"duplicate row for edge ({eu}, {ev}), x={x}")
        row[x] = dist
    for e, row in rows.items():
        table.set_row(e, 0, row)
    return table


def check_coverage(table: EstimateTable, edges, w: int = 0) -> None:
    """Raise CoverageError unless every (edge, x) pair carries a value."""
    for e in edges:
        try:
            row = table.row(e, w)
        except KeyError:
            raise CoverageError(f"no estimates for edge {e}") from None
        gap = np.flatnonzero(row == MISSING)
        if gap.size:
            raise CoverageError(f"edge {e} misses destination {int(gap[0])}")
