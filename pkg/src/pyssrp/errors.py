"""
Exception hierarchy of the package.

Library code raises these; only the command line turns them into exit codes.
"""


class SsrpError(Exception):
    """Base class of every error raised by pyssrp."""


class GraphError(SsrpError):
    """Invalid graph construction or traversal input."""


class GraphParseError(GraphError):
    """Malformed edge-list document.

    Parameters
    ----------
    line: int
        1-based line number of the offending line in the document.
    message: str
        What is wrong with that line.
    """

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnreachableVertexError(GraphError):
    """A vertex cannot be reached from the requested root."""

    def __init__(self, vertex, root):
        super().__init__(f"vertex {vertex} is not reachable from {root}")
        self.vertex = vertex
        self.root = root


class TreeError(SsrpError):
    """Invalid BFS tree or tree-edge argument."""


class SeparatorError(TreeError):
    """The tree is too small to be separated."""


class PathError(SsrpError):
    """A vertex sequence is not a path of the graph."""


class WeightRequirementError(SsrpError):
    """A weight function violates w(v) >= d(s, v)."""


class PivotSamplingError(SsrpError):
    """Pivot resampling exhausted its retry budget."""


class InternalError(SsrpError):
    """A recursion invariant did not hold."""


class CoverageError(SsrpError):
    """A result table does not cover the queries it is checked against."""


class ReductionError(SsrpError):
    """Input outside the scope of the min-plus reduction."""


class FixedPointError(ReductionError):
    """A value cannot be represented exactly at the binary scale in use."""


class MatrixParseError(ReductionError):
    """Malformed matrix document."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigError(SsrpError):
    """Invalid run configuration."""
