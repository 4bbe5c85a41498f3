"""
Square min-plus matrices over integers or binary fixed-point values.
"""
from pathlib import Path

import numpy as np
from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.core.graph import INFINITY, ext_add
from pyssrp.errors import FixedPointError, MatrixParseError, ReductionError
from pyssrp.reduction.fixed import ONE, SCALE_BITS, FixedRational, format_raw, to_raw

logger = set_logger(get_module_name(__file__))


class MinPlusMatrix:
    """n x n matrix of raw int64 entries at a binary scale.

    Parameters
    ----------
    values: array-like
        Raw entries, INFINITY for absent ones.
    scale_bits: int
        0 for plain integers, SCALE_BITS for fixed-point values.
    """

    def __init__(self, values, scale_bits: int = 0):
        values = np.minimum(np.asarray(values, dtype=np.int64), INFINITY)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ReductionError(f"matrix must be square, got shape {values.shape}")
        values.setflags(write=False)
        self.values = values
        self.scale_bits = int(scale_bits)

    @classmethod
    def from_rows(cls, rows, scale_bits: int = SCALE_BITS) -> 'MinPlusMatrix':
        """Build from numbers or strings such as '1.25' and 'inf'."""
        return cls([[to_raw(str(v), scale_bits) for v in row] for row in rows], scale_bits)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def finite_count(self) -> int:
        return int((self.values < INFINITY).sum())

    @property
    def is_fixed(self) -> bool:
        return self.scale_bits == SCALE_BITS

    def entry(self, i: int, j: int):
        raw = int(self.values[i, j])
        if self.is_fixed:
            return FixedRational(raw)
        return raw

    def in_unit_interval(self) -> bool:
        """All finite entries lie in [1, 2)."""
        finite = self.values[self.values < INFINITY]
        one = 1 << self.scale_bits
        return bool(np.all((finite >= one) & (finite < 2 * one)))

    def __eq__(self, other):
        if not isinstance(other, MinPlusMatrix):
            return NotImplemented
        return self.scale_bits == other.scale_bits and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self):
        return f"MinPlusMatrix(size={self.size}, finite={self.finite_count}, scale_bits={self.scale_bits})"


def parse_matrix(text: str) -> MinPlusMatrix:
    """Read ``<n>`` then n rows of n entries; integers, binary decimals or 'inf'.

    The matrix is integral when every finite entry is an integer, fixed-point
    otherwise.
    """
    lines = [(no, raw.split()) for no, raw in enumerate(text.splitlines(), start=1)
             if raw.strip() and not raw.strip().startswith('#')]
    if not lines:
        raise MatrixParseError(1, "missing size line")
    no, fields = lines[0]
    if len(fields) != 1:
        raise MatrixParseError(no, "expected a single size value")
    try:
        n = int(fields[0])
    except ValueError:
        raise MatrixParseError(no, f"invalid size {fields[0]!r}") from None
    if n < 1:
        raise MatrixParseError(no, "size must be positive")
    rows = lines[1:]
    if len(rows) != n:
        raise MatrixParseError(rows[-1][0] if rows else no, f"expected {n} rows, found {len(rows)}")
    raw = np.zeros((n, n), dtype=np.int64)
    integral = True
    for i, (no, fields) in enumerate(rows):
        if len(fields) != n:
            raise MatrixParseError(no, f"expected {n} entries, found {len(fields)}")
        for j, field in enumerate(fields):
            try:
                raw[i, j] = to_raw(field)
            except FixedPointError as err:
                logger.error(f"Bad matrix entry on line {no}: {field}")
                raise MatrixParseError(no, str(err)) from None
            if raw[i, j] < INFINITY and raw[i, j] % ONE:
                integral = False
    if integral:
        raw = np.where(raw < INFINITY, raw >> SCALE_BITS, INFINITY)
        return MinPlusMatrix(raw, 0)
    return MinPlusMatrix(raw, SCALE_BITS)


def format_matrix(matrix: MinPlusMatrix) -> str:
    lines = [str(matrix.size)]
    for row in matrix.values.tolist():
        lines.append(' '.join(format_raw(v, matrix.scale_bits) for v in row))
    return '\n'.join(lines) + '\n'


def load_matrix(path) -> MinPlusMatrix:
    matrix = parse_matrix(Path(path).read_text(encoding='utf-8'))
    logger.info(f"Loaded {matrix} from {path}")
    return matrix


def minplus_direct(x: MinPlusMatrix, y: MinPlusMatrix) -> MinPlusMatrix:
    """Textbook product Z[i, j] = min_k X[i, k] + Y[k, j]."""
    if x.size != y.size or x.scale_bits != y.scale_bits:
        raise ReductionError("operands differ in size or scale")
    z = np.full((x.size, x.size), INFINITY, dtype=np.int64)
    for k in range(x.size):
        np.minimum(z, ext_add(x.values[:, k, None], y.values[None, k, :]), out=z)
    return MinPlusMatrix(z, x.scale_bits)


def random_unit_interval_matrix(size: int, rng: np.random.Generator, fraction_bits: int = 2,
                                infinity_rate: float = 0.2) -> MinPlusMatrix:
    """Entries drawn from {1, 1 + 2^-b, ..., 2 - 2^-b} or inf."""
    steps = 1 << fraction_bits
    raw = ONE + rng.integers(steps, size=(size, size)) * (ONE // steps)
    raw = np.where(rng.random((size, size)) < infinity_rate, INFINITY, raw)
    return MinPlusMatrix(raw, SCALE_BITS)


def random_integer_matrix(size: int, rng: np.random.Generator, max_weight: int = 10,
                          density: float = 0.3) -> MinPlusMatrix:
    """Weighted digraph adjacency matrix with zero diagonal."""
    raw = rng.integers(1, max_weight + 1, size=(size, size))
    raw = np.where(rng.random((size, size)) < density, raw, INFINITY)
    np.fill_diagonal(raw, 0)
    return MinPlusMatrix(raw, 0)
