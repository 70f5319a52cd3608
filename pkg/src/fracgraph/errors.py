"""Exception hierarchy.

Every error raised on purpose by the package derives from ``FracGraphError``.
The CLI maps the four families below onto its exit codes.
"""


class FracGraphError(Exception):
    """Base class for all package errors."""


# -- graph model / validation (exit code 1) ---------------------------------

class GraphError(FracGraphError, ValueError):
    pass


class NonPositiveMeasure(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class UnknownEndpoint(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class UnknownVertex(GraphError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class Disconnected(GraphError):
    pass


class InvalidParams(GraphError):
    pass


class DimensionMismatch(FracGraphError, ValueError):
    pass


class LayoutMismatch(FracGraphError, ValueError):
    pass


class InvalidS(FracGraphError, ValueError):
    pass


class NegativeTime(FracGraphError, ValueError):
    pass


class NonPositiveArgument(FracGraphError, ValueError):
    pass


class NonPositivePotential(FracGraphError, ValueError):
    pass


class UnknownName(FracGraphError, ValueError):
    pass


class InvalidParam(FracGraphError, ValueError):
    pass


class WrongSignPart(FracGraphError, ValueError):
    pass


class TooLarge(FracGraphError, ValueError):
    pass


# -- numerics (exit code 2) -------------------------------------------------

class NumericalError(FracGraphError, ArithmeticError):
    pass


class EigenFailure(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    pass


class BracketFailure(NumericalError):
    """Nehari bracketing ran past 2**60; the nonlinearity violates (F3)/(F4)."""


class HypothesisViolation(BracketFailure):
    pass


class NotConverged(NumericalError):
    def __init__(self, msg, solution=None):
        super().__init__(msg)
        self.solution = solution


# -- I/O and configuration (exit code 3) ------------------------------------

class GraphIOError(FracGraphError, OSError):
    pass


class ParseError(FracGraphError, ValueError):
    def __init__(self, msg, line=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.line = line


class ConfigError(FracGraphError, ValueError):
    pass


class SchemaError(ConfigError):
    pass


class RangeError(ConfigError):
    pass
