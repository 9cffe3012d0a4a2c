"""Exception hierarchy shared by the library and the command line."""


class BridgewalkError(Exception):
    """Base class for all errors raised by this package."""


class DataError(BridgewalkError, ValueError):
    """Malformed or inconsistent input data (files, partitions, records)."""


class ParseError(DataError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NumericalError(BridgewalkError, ArithmeticError):
    """A linear solve, iteration or rank-one update failed numerically."""


class ConvergenceError(NumericalError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class SingularUpdateError(NumericalError):
    """Sherman-Morrison denominator is (numerically) zero."""


class StaleUpdateError(BridgewalkError, ValueError):
    """A rank-one update was built against a graph that has since changed."""
