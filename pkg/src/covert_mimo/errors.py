"""Exception hierarchy.

``NumericalError`` subclasses map to CLI exit code 2, everything else
deriving from ``CovertMimoError`` maps to exit code 1.
"""


class CovertMimoError(Exception):
    pass


class NumericalError(CovertMimoError):
    pass


class RankDeficient(NumericalError):
    def __init__(self, which, numerical_rank, expected=None):
        self.which = which
        self.numerical_rank = numerical_rank
        self.expected = expected
        msg = f"{which} has numerical rank {numerical_rank}"
        if expected is not None:
            msg += f", expected {expected}"
        super().__init__(msg)


class ConvergenceFailure(NumericalError):
    pass


class DimensionMismatch(CovertMimoError, ValueError):
    pass


class DomainError(CovertMimoError, ValueError):
    pass


class InfeasibleBudget(CovertMimoError, ValueError):
    pass


class EmptyCodebook(CovertMimoError, ValueError):
    pass


class BudgetExceeded(CovertMimoError, ValueError):
    pass


class KeySizeNegative(CovertMimoError, ValueError):
    pass


class DepthTooLarge(CovertMimoError, ValueError):
    pass


class IndexOutOfRange(CovertMimoError, IndexError):
    pass


class ParseError(CovertMimoError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)


class ValidationError(CovertMimoError):
    def __init__(self, field, message=None):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)
