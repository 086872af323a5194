"""Exception types shared across the package.

Row and column numbers carried by exceptions are 1-based, matching the
text formats; the Python API itself indexes rows and columns from 0.
"""


class LatinError(Exception):
    """Base class for every error raised by this package."""


# square validation

class NonSquareInput(LatinError, ValueError):
    pass


class SymbolOutOfRange(LatinError, ValueError):
    def __init__(self, row, col, symbol, n):
        super().__init__(f"symbol {symbol} at row {row}, column {col} is outside 1..{n}")
        self.row, self.col, self.symbol = row, col, symbol


class DuplicateInRow(LatinError, ValueError):
    def __init__(self, row, symbol):
        super().__init__(f"symbol {symbol} repeats in row {row}")
        self.row, self.symbol = row, symbol


class DuplicateInColumn(LatinError, ValueError):
    def __init__(self, col, symbol):
        super().__init__(f"symbol {symbol} repeats in column {col}")
        self.col, self.symbol = col, symbol


class OrderMismatch(LatinError, ValueError):
    pass


# constructions

class OddOrder(LatinError, ValueError):
    pass


class UnsupportedOrder(LatinError, ValueError):
    pass


class SameQuadrant(LatinError, ValueError):
    pass


class RowMismatch(LatinError, ValueError):
    pass


# trades

class MissingSymbolAtCell(LatinError):
    pass


class OutOfBounds(LatinError, IndexError):
    pass


# completion

class IneligibleCell(LatinError):
    pass


class ChoicesExhausted(LatinError):
    """A candidate scan found no survivor."""


class AvoidSetTooLarge(LatinError, ValueError):
    pass


class Infeasible(LatinError):
    """The density bounds do not certify that the requested run succeeds."""


class TinyOrderFallbackFailed(LatinError):
    """Exhaustive search proved the small partial square has no completion."""


class NotABijection(LatinError, ValueError):
    pass


class TriesExhausted(LatinError):
    pass


# reductions and triangulation

class NotUniform(LatinError, ValueError):
    pass


class MatchingFailed(LatinError):
    pass


class TooLarge(LatinError, ValueError):
    pass


class OverlappingTriangles(LatinError, ValueError):
    pass


class BalanceViolated(LatinError, ValueError):
    pass


class OverloadedSegment(LatinError):
    pass


# io

class ParseError(LatinError, ValueError):
    def __init__(self, line, column, reason):
        super().__init__(f"line {line}, column {column}: {reason}")
        self.line, self.column, self.reason = line, column, reason


class InfeasibleDensities(LatinError, ValueError):
    pass
