"""Exception hierarchy shared by every aircast module."""


class AircastError(Exception):
    """Base class for all aircast errors."""


# dataset
class SchemaError(AircastError, ValueError):
    def __init__(self, column):
        super().__init__(f"missing required column: {column!r}")
        self.column = column


class ParseError(AircastError, ValueError):
    def __init__(self, column, row, value):
        super().__init__(f"cannot parse {value!r} in column {column!r} at row {row}")
        self.column = column
        self.row = row


class EmptyInputError(AircastError, ValueError):
    pass


class DomainError(AircastError, ValueError):
    """A cell violates its domain bound (hour 25, month 13, ...)."""


class UnfillableColumnError(AircastError, ValueError):
    def __init__(self, column):
        super().__init__(f"column {column!r} has no observed values to fill from")
        self.column = column


class GapError(AircastError, ValueError):
    def __init__(self, date):
        super().__init__(f"no hourly rows for date {date}")
        self.date = date


class SplitError(AircastError, ValueError):
    pass


class StateMismatchError(AircastError, ValueError):
    pass


# numerics
class SingularMatrixError(AircastError, ArithmeticError):
    pass


class DegenerateSeriesError(AircastError, ValueError):
    pass


class SeriesLengthError(AircastError, ValueError):
    pass


class ConvergenceError(AircastError, RuntimeError):
    """Optimizer gave up; ``best`` holds the best-so-far fit."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ExhaustedSearchError(AircastError, RuntimeError):
    pass


class FeatureMismatchError(AircastError, ValueError):
    pass


class ConfigError(AircastError, ValueError):
    pass


class ShapeError(AircastError, ValueError):
    pass


class DivergenceError(AircastError, FloatingPointError):
    def __init__(self, epoch, batch):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


# metrics / bench
class ZeroDenominatorError(AircastError, ZeroDivisionError):
    def __init__(self, indices):
        self.indices = [int(i) for i in indices]
        super().__init__(f"actual values too close to zero at indices {self.indices}")


class DegenerateDenominatorError(AircastError, ZeroDivisionError):
    pass


class SelectionError(AircastError, ValueError):
    pass
