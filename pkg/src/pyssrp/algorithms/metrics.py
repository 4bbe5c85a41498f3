"""
Per-call counters of the recursion and the structural budgets they obey.
"""
from collections import defaultdict
from dataclasses import asdict, dataclass
import json
import math
from typing import Dict, List, Optional

from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp import Q_, ureg

logger = set_logger(get_module_name(__file__))

NEW_QUERY_FACTOR = 40
DEPTH_FACTOR = 4


@dataclass
class CallMetrics:
    """Counters of one recursion node."""
    level: int
    n_vertices: int
    n_edges: int
    n_weights: int
    n_queries: int
    base_case: bool = False
    path_length: int = 0
    n_pivots: int = 0
    n_weights_t: Optional[int] = None
    n_weights_s: Optional[int] = None
    n_new_queries: int = 0
    max_band_product: int = 0
    traversals: int = 0
    seconds: float = 0.0

    @property
    def wall_time(self):
        return Q_(self.seconds, ureg.second)

    def as_dict(self) -> dict:
        record = asdict(self)
        del record['seconds']
        record['wall_time_ms'] = round(self.wall_time.to(ureg.millisecond).magnitude, 3)
        return record


class MetricsRecorder:
    """Collects CallMetrics of a run; merging is order independent."""

    def __init__(self):
        self.calls: List[CallMetrics] = []

    def record(self, metrics: CallMetrics) -> None:
        self.calls.append(metrics)

    @property
    def depth(self) -> int:
        return max((m.level for m in self.calls), default=0)

    @property
    def traversals(self) -> int:
        return sum(m.traversals for m in self.calls)

    def levels(self) -> Dict[int, dict]:
        totals = defaultdict(lambda: defaultdict(int))
        for m in self.calls:
            level = totals[m.level]
            level['calls'] += 1
            level['vertices'] += m.n_vertices
            level['edges'] += m.n_edges
            level['weights'] += m.n_weights
            level['queries'] += m.n_queries
            level['new_queries'] += m.n_new_queries
            level['traversals'] += m.traversals
        return {k: dict(v) for k, v in sorted(totals.items())}

    def to_json_lines(self) -> str:
        ordered = sorted(self.calls, key=lambda m: m.level)
        return ''.join(json.dumps(m.as_dict(), sort_keys=True) + '\n' for m in ordered)

    def check_budgets(self, global_n: int, global_m: int, c: float) -> List[str]:
        """Every violated structural budget, as readable messages."""
        violations = []
        log_n = math.log(max(global_n, 2))
        for m in self.calls:
            if m.base_case:
                continue
            where = f"level {m.level} (n_H={m.n_vertices})"
            if m.n_weights_t is not None and m.n_weights_t != m.n_weights + 1:
                violations.append(f"{where}: |W_T|={m.n_weights_t}, expected {m.n_weights + 1}")
            if m.n_weights_s is not None and m.n_weights_s != m.n_weights + 1 + m.n_pivots:
                violations.append(f"{where}: |W_S|={m.n_weights_s}, expected {m.n_weights + 1 + m.n_pivots}")
            if m.n_new_queries > NEW_QUERY_FACTOR * m.n_vertices ** 2 * log_n:
                violations.append(f"{where}: {m.n_new_queries} new queries")
            if m.max_band_product > 3 * c * log_n * m.n_vertices:
                violations.append(f"{where}: |P_k||B_k|={m.max_band_product}")
        for level, totals in self.levels().items():
            if totals['vertices'] > 2 * global_n:
                violations.append(f"level {level}: {totals['vertices']} vertices")
            if totals['edges'] > global_m:
                violations.append(f"level {level}: {totals['edges']} edges")
        if global_n > 1 and self.depth > DEPTH_FACTOR * math.log2(global_n):
            violations.append(f"recursion depth {self.depth}")
        for message in violations:
            logger.warning(f"budget violated: {message}")
        return violations
