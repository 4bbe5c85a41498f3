"""
Command line: ``pyssrp gen|solve|verify|bench|minplus|apsp``.

Exit codes: 0 success, 1 usage or input error, 2 verification failure,
3 internal error.
"""
import argparse
import csv
import io
from pathlib import Path
import sys
import time
from typing import Optional, Sequence

import numpy as np
from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp import Q_, __version__, ureg
from pyssrp.algorithms.metrics import MetricsRecorder
from pyssrp.algorithms.ssrp import solve_ssrp
from pyssrp.config import RunConfig, add_arguments
from pyssrp.core.estimates import read_estimates_tsv
from pyssrp.core.graph import WeightFunction, format_graph, load_graph, random_reachable_graph
from pyssrp.core.oracle import ssrp_oracle, verify_estimates
from pyssrp.core.tree import build_bfs_tree
from pyssrp.errors import InternalError, SsrpError
from pyssrp.reduction.matrix import format_matrix, load_matrix, minplus_direct, random_unit_interval_matrix
from pyssrp.reduction.minplus import METHODS, apsp_via_minplus, floyd_warshall, minplus_via_ssrp

logger = set_logger(get_module_name(__file__))

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_INTERNAL = 3

BENCH_FIELDS = ['n', 'm', 'repeat', 'seed', 'time_ms', 'oracle_time_ms', 'traversals', 'depth',
                'max_level_vertices', 'max_level_edges', 'max_new_queries', 'budget_violations']


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits with EXIT_USAGE on bad arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding='utf-8')
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def _milliseconds(seconds: float) -> float:
    return round(Q_(seconds, ureg.second).to(ureg.millisecond).magnitude, 3)


def cmd_gen(n: int, m: int, seed: int = 0, out: Optional[str] = None) -> int:
    graph = random_reachable_graph(n, m, np.random.default_rng(seed))
    _emit(format_graph(graph, comment=f"pyssrp gen n={n} m={m} seed={seed}"), out)
    return EXIT_OK


def cmd_solve(graph: str, source: int, config: RunConfig, out: Optional[str] = None,
              metrics: Optional[str] = None) -> int:
    g = load_graph(graph)
    recorder = MetricsRecorder()
    table = solve_ssrp(g, source, config, recorder)
    _emit(table.to_tsv(), out)
    if metrics:
        Path(metrics).write_text(recorder.to_json_lines(), encoding='utf-8')
        logger.info(f"Wrote {len(recorder.calls)} metrics records to {metrics}")
    violations = recorder.check_budgets(g.n, g.m, config.c)
    if violations:
        raise InternalError(f"{len(violations)} budget violations, first: {violations[0]}")
    return EXIT_OK


def cmd_verify(graph: str, source: int, results: str, out: Optional[str] = None) -> int:
    g = load_graph(graph)
    table = read_estimates_tsv(Path(results).read_text(encoding='utf-8'), g.n)
    report = verify_estimates(g, source, table)
    lines = [report.summary()]
    lines.extend(f"underestimate: edge=({e[0]},{e[1]}) x={x} got={got} expected={want}"
                 for e, x, got, want in report.underestimates)
    _emit('\n'.join(lines) + '\n', out)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_bench(n_list: Sequence[int], avg_degree: float = 4.0, repeats: int = 1, seed: int = 0,
              config: Optional[RunConfig] = None, out: Optional[str] = None, oracle_limit: int = 256) -> int:
    """One CSV row per (n, repeat); the oracle is timed only for n <= oracle_limit."""
    config = config if config is not None else RunConfig(seed=seed)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=BENCH_FIELDS, lineterminator='\n')
    writer.writeheader()
    for n in n_list:
        m = min(n * (n - 1), max(n - 1, int(round(avg_degree * n))))
        for repeat in range(repeats):
            run_seed = seed + repeat
            graph = random_reachable_graph(n, m, np.random.default_rng([run_seed, n]))
            recorder = MetricsRecorder()
            started = time.perf_counter()
            solve_ssrp(graph, 0, config.with_changes(seed=run_seed), recorder)
            elapsed = time.perf_counter() - started
            oracle_ms = ''
            if n <= oracle_limit:
                started = time.perf_counter()
                ssrp_oracle(graph, WeightFunction.infinite(n, 0), build_bfs_tree(graph, 0).tree_edges())
                oracle_ms = _milliseconds(time.perf_counter() - started)
            violations = recorder.check_budgets(n, m, config.c)
            if violations:
                raise InternalError(f"n={n} repeat={repeat}: {violations[0]}")
            levels = recorder.levels().values()
            writer.writerow({
                'n': n, 'm': m, 'repeat': repeat, 'seed': run_seed,
                'time_ms': _milliseconds(elapsed), 'oracle_time_ms': oracle_ms,
                'traversals': recorder.traversals, 'depth': recorder.depth,
                'max_level_vertices': max(level['vertices'] for level in levels),
                'max_level_edges': max(level['edges'] for level in levels),
                'max_new_queries': max(c.n_new_queries for c in recorder.calls),
                'budget_violations': len(violations),
            })
            logger.info(f"bench n={n} m={m} repeat={repeat}: {_milliseconds(elapsed)} ms")
    _emit(buffer.getvalue(), out)
    return EXIT_OK


def cmd_minplus(size: int, seed: int = 0, check: bool = False, out: Optional[str] = None) -> int:
    rng = np.random.default_rng(seed)
    x = random_unit_interval_matrix(size, rng)
    y = random_unit_interval_matrix(size, rng)
    z = minplus_via_ssrp(x, y)
    _emit(format_matrix(z), out)
    if check and z != minplus_direct(x, y):
        sys.stderr.write("min-plus product differs from the direct product\n")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_apsp(matrix: str, check: bool = False, method: str = 'ssrp', out: Optional[str] = None) -> int:
    w0 = load_matrix(matrix)
    d = apsp_via_minplus(w0, method=method)
    _emit(format_matrix(d), out)
    if check and d != floyd_warshall(w0):
        sys.stderr.write("distances differ from Floyd-Warshall\n")
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='pyssrp', description='Single-source replacement paths in unweighted digraphs.')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    gen = commands.add_parser('gen', help='random graph with every vertex reachable from 0')
    gen.add_argument('--n', type=int, required=True)
    gen.add_argument('--m', type=int, required=True)
    add_arguments(gen, ['seed'])
    gen.add_argument('--out')
    gen.set_defaults(handler=lambda a: cmd_gen(a.n, a.m, a.seed, a.out))

    solve = commands.add_parser('solve', help='replacement distances for every BFS-tree edge')
    solve.add_argument('--graph', required=True)
    solve.add_argument('--source', type=int, default=0)
    add_arguments(solve)
    solve.add_argument('--out')
    solve.add_argument('--metrics', help='JSON-lines file receiving one record per recursion node')
    solve.set_defaults(handler=lambda a: cmd_solve(a.graph, a.source, RunConfig.from_mapping(vars(a)),
                                                   a.out, a.metrics))

    verify = commands.add_parser('verify', help='compare a results file with the exact oracle')
    verify.add_argument('--graph', required=True)
    verify.add_argument('--source', type=int, default=0)
    verify.add_argument('--results', required=True)
    verify.add_argument('--out')
    verify.set_defaults(handler=lambda a: cmd_verify(a.graph, a.source, a.results, a.out))

    bench = commands.add_parser('bench', help='time the solver on random graphs')
    bench.add_argument('--n', type=int, nargs='+', required=True)
    bench.add_argument('--avg-degree', type=float, default=4.0)
    bench.add_argument('--repeats', type=int, default=1)
    add_arguments(bench)
    bench.add_argument('--out')
    bench.set_defaults(handler=lambda a: cmd_bench(a.n, a.avg_degree, a.repeats, a.seed,
                                                   RunConfig.from_mapping(vars(a)), a.out))

    minplus = commands.add_parser('minplus', help='min-plus product of random [1, 2) matrices')
    minplus.add_argument('--size', type=int, required=True)
    add_arguments(minplus, ['seed'])
    minplus.add_argument('--check', action='store_true')
    minplus.add_argument('--out')
    minplus.set_defaults(handler=lambda a: cmd_minplus(a.size, a.seed, a.check, a.out))

    apsp = commands.add_parser('apsp', help='all-pairs distances by repeated min-plus squaring')
    apsp.add_argument('--matrix', required=True)
    apsp.add_argument('--method', choices=METHODS, default='ssrp')
    apsp.add_argument('--check', action='store_true')
    apsp.add_argument('--out')
    apsp.set_defaults(handler=lambda a: cmd_apsp(a.matrix, a.check, a.method, a.out))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except InternalError as err:
        logger.error(f"internal error: {err}")
        sys.stderr.write(f"internal error: {err}\n")
        return EXIT_INTERNAL
    except (SsrpError, OSError, ValueError) as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
